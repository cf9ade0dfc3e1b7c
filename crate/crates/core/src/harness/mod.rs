// Copyright 2026 The noisebath Authors
// SPDX-License-Identifier: Apache-2.0

//! Experiment configuration, presets and reports.
//!
//! A config file is a JSON object with a `preset` key and optional flat
//! overrides of any [`ExperimentConfig`] field; omitted fields take the
//! preset's defaults.

mod presets;
mod report;

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

pub use presets::{
    calibrate_effective_gamma, excitation_initial_state, run_preset, total_variation, PresetOutput, REFERENCE_GAMMA,
    REFERENCE_GAMMA_TOL,
};
pub use report::{
    compare_series, detect_oscillation, export_csv, import_csv, interpolate, monotone_violation, Check, Column,
    ComparisonReport, Oscillation, Relation, Report, SeriesTable, Tolerance,
};

/// Fully resolved experiment parameters. Times and rates are in units of c.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub preset: String,
    pub seed: u64,
    pub n_traj: usize,
    /// Worker threads; 0 uses every available core.
    pub workers: usize,
    pub omega_s: f64,
    /// Noise memory times cτ, one run per entry.
    pub c_tau: Vec<f64>,
    /// Propagation and noise step c Δt.
    pub dt: f64,
    /// Horizon; `null` derives it from the slowest mapped rate.
    pub t_max: Option<f64>,
    pub record_stride: usize,
    /// Auxiliary counts N, one run per entry.
    pub n_aux: Vec<usize>,
    /// Target ⟨N̂₊⟩ values, one run per entry.
    pub n_plus: Vec<f64>,
    /// Effective γ; `null` calibrates it from the single-noise model.
    pub gamma: Option<f64>,
    pub calibration_n_traj: usize,
    /// neg_temp: [E_H, E_C]; quench: [E_2, E_3].
    pub energies: Vec<f64>,
    /// neg_temp: [Γ_H, Γ_C]; quench: [γ_21, γ_32, γ_31].
    pub rates: Vec<f64>,
    /// neg_temp: [β_H, β_C]; quench: [β] of the equilibrium state.
    pub betas: Vec<f64>,
    /// quench: conserved counts [m_1, m_2, m_3].
    pub counts: Vec<usize>,
    /// quench: distance of both initial states from equilibrium, as a
    /// fraction of the infinite-temperature distance.
    pub quench_distance: f64,
    /// quench: relaxation threshold ε as a fraction of that distance.
    pub quench_epsilon: f64,
    pub k_sigma: f64,
    pub abs_tol: f64,
    pub out_dir: String,
}

pub const PRESETS: [(&str, &str); 8] = [
    ("fig2a", "<σz>(t) for N = 2, 3, 5 auxiliaries at N₊ = 1 against the mapped two-level master equation"),
    ("fig2b", "<σz>(t) for N = 2 at N₊ = 0.5, 1, 1.5, 1.75 set by auxiliary excitation probabilities"),
    ("fig2c", "decay of |<σ⁺>| for N = 2, 3, 5, compared with γN and the master-equation rate γ(N+1)"),
    ("fig2d", "<σz>(t) for N = 2 across cτ = 1e-3 .. 1, from monotone decay to oscillation"),
    ("fig3", "normalized OU correlation functions and spectra for cτ = 1, 0.1, 0.01, 0.001"),
    ("neg_temp", "three-level system between hot and cold spin baths; population inversion of |1> and |2>"),
    ("quench", "three-level relaxation from two thermal states equidistant from equilibrium"),
    ("calibrate_gamma", "effective γ from the single-noise model and the N = 1 central spin model"),
];

/// Preset names with one-line descriptions, in a fixed order.
pub fn list_presets() -> Vec<(&'static str, &'static str)> {
    PRESETS.to_vec()
}

impl ExperimentConfig {
    /// Defaults of a named preset.
    pub fn preset_defaults(name: &str) -> Result<Self> {
        let mut c = Self {
            preset: name.into(),
            seed: 2026,
            n_traj: 10_000,
            workers: 0,
            omega_s: 0.1,
            c_tau: vec![1e-3],
            dt: 1e-4,
            t_max: None,
            record_stride: 100,
            n_aux: vec![],
            n_plus: vec![],
            gamma: None,
            calibration_n_traj: 10_000,
            energies: vec![],
            rates: vec![],
            betas: vec![],
            counts: vec![],
            quench_distance: 0.0,
            quench_epsilon: 0.0,
            k_sigma: 3.0,
            abs_tol: 0.02,
            out_dir: "out".into(),
        };
        match name {
            "fig2a" => {
                c.n_aux = vec![2, 3, 5];
                c.n_plus = vec![1.0];
            }
            "fig2b" => {
                c.n_aux = vec![2];
                c.n_plus = vec![0.5, 1.0, 1.5, 1.75];
            }
            "fig2c" => c.n_aux = vec![2, 3, 5],
            "fig2d" => {
                c.n_aux = vec![2];
                c.n_plus = vec![1.0];
                c.c_tau = vec![1e-3, 1e-2, 1e-1, 1.0];
            }
            "fig3" => {
                c.c_tau = vec![1.0, 1e-1, 1e-2, 1e-3];
                c.abs_tol = 0.05;
            }
            "calibrate_gamma" => c.n_aux = vec![1],
            "neg_temp" => {
                c.c_tau = vec![1e-2];
                c.dt = 2e-3;
                c.t_max = Some(36.0);
                c.record_stride = 250;
                c.energies = vec![2.0, 1.0];
                c.rates = vec![0.2, 0.2];
                c.betas = vec![0.5 * 2f64.ln(), 3f64.ln()];
                c.abs_tol = 0.05;
            }
            "quench" => {
                c.c_tau = vec![1e-2];
                c.dt = 2e-3;
                c.t_max = Some(5.0);
                c.record_stride = 25;
                c.energies = vec![2f64.ln(), 4f64.ln()];
                c.rates = vec![0.5, 0.25, 0.0];
                c.betas = vec![1.0];
                c.counts = vec![3, 1, 0];
                c.quench_distance = 0.9;
                c.quench_epsilon = 0.2;
                c.abs_tol = 0.05;
            }
            other => return Err(Error::UnknownPreset(other.into())),
        }
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, reason: &str| {
            Err(Error::Config {
                field: field.into(),
                reason: reason.into(),
            })
        };
        if self.n_traj == 0 {
            return bad("n_traj", "must be at least 1");
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt", "must be positive");
        }
        if self.t_max.is_some_and(|t| !(t > 0.0 && t.is_finite())) {
            return bad("t_max", "must be positive or null");
        }
        if self.record_stride == 0 {
            return bad("record_stride", "must be at least 1");
        }
        if self.c_tau.is_empty() || self.c_tau.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return bad("c_tau", "needs at least one positive value");
        }
        if self.gamma.is_some_and(|g| !(g > 0.0 && g.is_finite())) {
            return bad("gamma", "must be positive or null");
        }
        if self.gamma.is_none() && self.calibration_n_traj < 2 {
            return bad("calibration_n_traj", "must be at least 2");
        }
        if !(self.k_sigma >= 0.0) || !(self.abs_tol >= 0.0) {
            return bad("k_sigma", "tolerances must be non-negative");
        }
        if self.n_plus.iter().any(|&v| !(v >= 0.0)) {
            return bad("n_plus", "must be non-negative");
        }
        let lens = |field: &str, v: usize, want: usize| {
            if v != want {
                Err(Error::Config {
                    field: field.into(),
                    reason: format!("expected {want} entries, got {v}"),
                })
            } else {
                Ok(())
            }
        };
        match self.preset.as_str() {
            "fig2a" | "fig2b" | "fig2c" | "fig2d" | "calibrate_gamma" if self.n_aux.is_empty() => bad("n_aux", "needs at least one value"),
            "fig2a" | "fig2b" | "fig2d" if self.n_plus.is_empty() => bad("n_plus", "needs at least one value"),
            "neg_temp" => {
                lens("energies", self.energies.len(), 2)?;
                lens("rates", self.rates.len(), 2)?;
                lens("betas", self.betas.len(), 2)
            }
            "quench" => {
                lens("energies", self.energies.len(), 2)?;
                lens("rates", self.rates.len(), 3)?;
                lens("betas", self.betas.len(), 1)?;
                lens("counts", self.counts.len(), 3)?;
                if !(self.quench_distance > 0.0 && self.quench_distance < 1.0) {
                    return bad("quench_distance", "must lie in (0, 1)");
                }
                if !(self.quench_epsilon > 0.0 && self.quench_epsilon < 1.0) {
                    return bad("quench_epsilon", "must lie in (0, 1)");
                }
                Ok(())
            }
            name if PRESETS.iter().any(|p| p.0 == name) => Ok(()),
            other => Err(Error::UnknownPreset(other.into())),
        }
    }
}

/// Resolves a parsed config document against its preset defaults.
/// `preset_override` replaces the document's `preset` before defaults apply.
pub fn resolve_config(doc: Value, preset_override: Option<&str>) -> Result<ExperimentConfig> {
    let Value::Object(mut user) = doc else {
        return Err(Error::Config {
            field: "<root>".into(),
            reason: "expected a JSON object".into(),
        });
    };
    if let Some(p) = preset_override {
        user.insert("preset".into(), Value::String(p.into()));
    }
    let preset = match user.get("preset") {
        Some(Value::String(s)) => s.clone(),
        Some(_) => {
            return Err(Error::Config {
                field: "preset".into(),
                reason: "must be a string".into(),
            })
        }
        None => {
            return Err(Error::Config {
                field: "preset".into(),
                reason: "missing".into(),
            })
        }
    };
    let defaults = ExperimentConfig::preset_defaults(&preset)?;
    let Value::Object(base) = serde_json::to_value(&defaults)? else {
        unreachable!("config serializes to an object")
    };
    for (key, value) in &user {
        if !base.contains_key(key) {
            return Err(Error::Config {
                field: key.clone(),
                reason: "unknown key".into(),
            });
        }
        let mut single: Map<String, Value> = base.clone();
        single.insert(key.clone(), value.clone());
        if let Err(e) = serde_json::from_value::<ExperimentConfig>(Value::Object(single)) {
            return Err(Error::Config {
                field: key.clone(),
                reason: e.to_string(),
            });
        }
    }
    let mut merged = base;
    merged.extend(user);
    let cfg: ExperimentConfig = serde_json::from_value(Value::Object(merged))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config(text: &str, preset_override: Option<&str>) -> Result<ExperimentConfig> {
    resolve_config(serde_json::from_str(text)?, preset_override)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    parse_config(&std::fs::read_to_string(path)?, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_is_filled_from_preset() {
        let cfg = parse_config(r#"{"preset": "fig2a"}"#, None).unwrap();
        assert_eq!(cfg, ExperimentConfig::preset_defaults("fig2a").unwrap());
        assert_eq!(cfg.n_aux, vec![2, 3, 5]);
        assert_eq!(cfg.n_traj, 10_000);
    }

    #[test]
    fn overrides_and_validation() {
        let cfg = parse_config(r#"{"preset": "fig2a", "n_traj": 50, "gamma": 2.0}"#, None).unwrap();
        assert_eq!((cfg.n_traj, cfg.gamma), (50, Some(2.0)));

        for (doc, field) in [
            (r#"{"preset": "fig2a", "n_traj": -5}"#, "n_traj"),
            (r#"{"preset": "fig2a", "n_trajectories": 5}"#, "n_trajectories"),
            (r#"{"preset": "fig2a", "dt": -1.0}"#, "dt"),
            (r#"{"n_traj": 5}"#, "preset"),
        ] {
            match parse_config(doc, None) {
                Err(Error::Config { field: f, .. }) => assert_eq!(f, field, "{doc}"),
                other => panic!("{doc}: {other:?}"),
            }
        }
        assert!(matches!(parse_config(r#"{"preset": "fig9"}"#, None), Err(Error::UnknownPreset(_))));
    }

    #[test]
    fn preset_override_and_round_trip() {
        let cfg = parse_config(r#"{"preset": "fig2a", "seed": 9}"#, Some("quench")).unwrap();
        assert_eq!(cfg.preset, "quench");
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.counts, vec![3, 1, 0]);
        for (name, _) in list_presets() {
            let cfg = ExperimentConfig::preset_defaults(name).unwrap();
            let text = serde_json::to_string(&cfg).unwrap();
            assert_eq!(parse_config(&text, None).unwrap(), cfg);
        }
    }

    #[test]
    fn preset_listing() {
        let names: Vec<&str> = list_presets().iter().map(|p| p.0).collect();
        assert!(names.contains(&"fig2a"));
        assert!(names.contains(&"neg_temp") && names.contains(&"quench"));
        assert!(names.len() >= 8);
    }
}
