// Copyright 2026 The noisebath Authors
// SPDX-License-Identifier: Apache-2.0

//! Classical-noise models of open quantum systems and their Lindblad
//! reference dynamics.

pub mod error;
pub mod harness;
pub mod lindblad;
pub mod models;
pub mod noisegen;
pub mod numkernel;
pub mod trajectory;

pub use error::{Error, Result};
