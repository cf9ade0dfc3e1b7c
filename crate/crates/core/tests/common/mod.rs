// Copyright 2026 The noisebath Authors
// SPDX-License-Identifier: Apache-2.0

//! Randomized invariants shared by the property tests and the acceptance run.

#![allow(dead_code)]

use noisebath::lindblad::{integrate, DensityMatrix, LindbladSpec};
use noisebath::models::{build_central_spin_model, InitialEnsemble, InitialStateSpec, ModelTopology};
use noisebath::noisegen::NoiseParams;
use noisebath::numkernel::{expm_unitary, pauli, ComplexMatrix, StateVector, C64};
use noisebath::trajectory::{propagate_step, run_ensemble, run_trajectory, Observable, TrajectoryConfig};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

pub const CASES: u32 = 128;

pub fn runner() -> TestRunner {
    let config = Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn hermitian(n: usize, xs: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |r, c| C64::new(xs[2 * (r * n + c)], xs[2 * (r * n + c) + 1])).hermitian_part()
}

fn general(n: usize, xs: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |r, c| C64::new(xs[2 * (r * n + c)], xs[2 * (r * n + c) + 1]))
}

fn matrix_entries(n: usize, scale: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-scale..scale, 2 * n * n)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), TestCaseError> {
    if cond {
        Ok(())
    } else {
        Err(TestCaseError::fail(msg()))
    }
}

/// exp(-iH dt) is unitary and one propagation step keeps the state normalized.
pub fn unitarity() -> Result<(), String> {
    let strategy = (2usize..=6).prop_flat_map(|n| (Just(n), matrix_entries(n, 3.0), prop::collection::vec(-1.0..1.0f64, 2 * n), 0.0..2.0f64));
    runner()
        .run(&strategy, |(n, hx, vx, dt)| {
            let h = hermitian(n, &hx);
            let u = expm_unitary(&h, dt).map_err(|e| TestCaseError::fail(e.to_string()))?;
            let err = u.dagger().matmul(&u).unwrap().max_abs_diff(&ComplexMatrix::identity(n));
            ensure(err < 1e-10, || format!("U†U deviates from I by {err:.3e}"))?;
            let psi = StateVector::new((0..n).map(|k| C64::new(vx[2 * k], vx[2 * k + 1])).collect());
            prop_assume!(psi.norm() > 1e-3);
            let psi = psi.normalized().unwrap();
            let out = propagate_step(&psi, &h, dt).map_err(|e| TestCaseError::fail(e.to_string()))?;
            ensure((out.norm() - 1.0).abs() < 1e-10, || format!("norm {}", out.norm()))
        })
        .map_err(|e| e.to_string())
}

/// The Lindblad integrator keeps ρ Hermitian, positive and of unit trace.
pub fn trace_preservation() -> Result<(), String> {
    let strategy = (2usize..=4).prop_flat_map(|n| {
        (
            Just(n),
            matrix_entries(n, 1.0),
            prop::collection::vec(matrix_entries(n, 1.0), 1..=3),
            prop::collection::vec(0.0..1.0f64, 3),
            prop::collection::vec(0.0..1.0f64, n),
        )
    });
    runner()
        .run(&strategy, |(n, hx, jx, rates, pops)| {
            let h = hermitian(n, &hx);
            let jumps = jx.iter().zip(&rates).map(|(x, &g)| (general(n, x), g)).collect();
            let spec = LindbladSpec::new(h, jumps).map_err(|e| TestCaseError::fail(e.to_string()))?;
            let total: f64 = pops.iter().sum();
            prop_assume!(total > 1e-3);
            let p: Vec<f64> = pops.iter().map(|x| x / total).collect();
            let rho0 = DensityMatrix::diagonal(&p).unwrap();
            let grid = [0.25, 0.5, 1.0];
            let states = integrate(&spec, &rho0, &grid, spec.max_dt()).map_err(|e| TestCaseError::fail(e.to_string()))?;
            for s in &states {
                let drift = (s.matrix().trace() - C64::new(1.0, 0.0)).norm();
                ensure(drift < 1e-9, || format!("trace drift {drift:.3e}"))?;
                ensure(s.matrix().hermiticity_error() < 1e-12, || "lost hermiticity".into())?;
                let min = s.min_eigenvalue().unwrap();
                ensure(min > -1e-8, || format!("negative eigenvalue {min:.3e}"))?;
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn spin_config(n: usize, probs: &[f64], c_tau: f64, n_traj: usize, seed: u64) -> TrajectoryConfig {
    let topo = ModelTopology::spins(n);
    let model = build_central_spin_model(0.1, &topo).unwrap();
    let noise = NoiseParams::new(c_tau, 1.0, 1e-3, 100).unwrap();
    let initial = InitialEnsemble::pure(InitialStateSpec::with_excitations(pauli::up(), probs));
    let mut cfg = TrajectoryConfig::uniform(
        model,
        noise,
        initial,
        vec![Observable::sigma_z(), Observable::n_plus(&topo)],
        n_traj,
        seed,
    );
    cfg.record_stride = 10;
    cfg.workers = 1;
    cfg
}

fn spin_case() -> impl Strategy<Value = (usize, Vec<f64>, f64, u64)> {
    (1usize..=3).prop_flat_map(|n| {
        (
            Just(n),
            prop::collection::vec(0.0..=1.0f64, n),
            prop::sample::select(vec![1e-3, 1e-2, 1e-1, 1.0]),
            any::<u64>(),
        )
    })
}

/// ⟨N̂₊⟩ stays at its initial value along every noise realization.
pub fn n_plus_conservation() -> Result<(), String> {
    runner()
        .run(&(spin_case(), 0usize..64), |((n, probs, c_tau, seed), index)| {
            let cfg = spin_config(n, &probs, c_tau, 64, seed);
            let expected = 1.0 + probs.iter().sum::<f64>();
            let traj = run_trajectory(&cfg, index).map_err(|e| TestCaseError::fail(e.to_string()))?;
            let series = traj.series("n_plus").unwrap();
            let drift = series.values.iter().map(|v| (v - expected).abs()).fold(0.0, f64::max);
            ensure(drift < 1e-9, || format!("N₊ drift {drift:.3e}"))
        })
        .map_err(|e| e.to_string())
}

/// Identical config and seed reproduce identical trajectories and ensembles.
pub fn determinism() -> Result<(), String> {
    runner()
        .run(&spin_case(), |(n, probs, c_tau, seed)| {
            let cfg = spin_config(n, &probs, c_tau, 8, seed);
            let a = run_trajectory(&cfg, 3).unwrap();
            let b = run_trajectory(&cfg, 3).unwrap();
            ensure(a.values == b.values, || "trajectory differs between runs".into())?;
            let ea = run_ensemble(&cfg).unwrap();
            let eb = run_ensemble(&cfg).unwrap();
            ensure(ea.mean == eb.mean && ea.stderr == eb.stderr, || "ensemble differs between runs".into())
        })
        .map_err(|e| e.to_string())
}

/// Ensemble statistics do not depend on the number of worker threads.
pub fn order_independence() -> Result<(), String> {
    runner()
        .run(&(spin_case(), 2usize..=80, 2usize..=4), |((n, probs, c_tau, seed), n_traj, workers)| {
            let serial = spin_config(n, &probs, c_tau, n_traj, seed);
            let parallel = TrajectoryConfig { workers, ..serial.clone() };
            let a = run_ensemble(&serial).unwrap();
            let b = run_ensemble(&parallel).unwrap();
            ensure(a.mean == b.mean && a.stderr == b.stderr, || format!("{workers} workers changed the result"))
        })
        .map_err(|e| e.to_string())
}

pub const PROPERTIES: [(&str, fn() -> Result<(), String>); 5] = [
    ("unitarity", unitarity),
    ("trace preservation", trace_preservation),
    ("N₊ conservation", n_plus_conservation),
    ("determinism", determinism),
    ("order independence", order_independence),
];
