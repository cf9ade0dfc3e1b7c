// Copyright 2026 The noisebath Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {left:?} vs {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("{op} requires a Hermitian matrix (max deviation {deviation:.3e})")]
    NotHermitian { op: &'static str, deviation: f64 },

    #[error("{op} requires a square matrix, got {rows}x{cols}")]
    NotSquare {
        op: &'static str,
        rows: usize,
        cols: usize,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("site {site} out of range for topology with {n_sites} sites")]
    SiteOutOfRange { site: usize, n_sites: usize },

    #[error("empty ensemble passed to {0}")]
    EmptyEnsemble(&'static str),

    #[error("missing noise sample for label {0}")]
    MissingNoiseSample(usize),

    #[error("no rate solution: {0}")]
    NoRateSolution(String),

    #[error("integration failed at t = {t}: {reason}")]
    Integration { t: f64, reason: String },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("time grids do not overlap")]
    DisjointGrids,

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("config error at `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }
}
