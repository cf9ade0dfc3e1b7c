// Copyright 2026 The noisebath Authors
// SPDX-License-Identifier: Apache-2.0

mod common;

#[test]
fn propagator_is_unitary() {
    common::unitarity().unwrap();
}

#[test]
fn lindblad_preserves_trace_and_positivity() {
    common::trace_preservation().unwrap();
}

#[test]
fn excitation_number_is_conserved() {
    common::n_plus_conservation().unwrap();
}

#[test]
fn runs_are_deterministic() {
    common::determinism().unwrap();
}

#[test]
fn ensemble_is_worker_independent() {
    common::order_independence().unwrap();
}
