// Copyright 2026 The noisebath Authors
// SPDX-License-Identifier: Apache-2.0

//! Pure-state propagation under sampled noise and ensemble statistics.
//!
//! Each trajectory draws one complex OU path per coupling label, holds the
//! Hamiltonian constant over each step, and propagates inside the invariant
//! subspace reachable from the initial state (see [`crate::models::sector`]).
//! Trajectory `j` owns RNG stream `j` of the master seed, and ensemble
//! reduction runs over fixed chunks in index order, so results do not depend
//! on the number of workers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::sector::{product_support, reachable_space, ReducedSpace, SparseOp};
use crate::models::{InitialEnsemble, ModelTopology, NoiseModel, OperatorSum};
use crate::noisegen::{stream_rng, ComplexOu, NoiseParams};
use crate::numkernel::{apply, expm_unitary, pauli, ComplexMatrix, StateVector, C64, HERMITIAN_TOL, ZERO};

/// Allowed drift of ‖ψ‖ along a trajectory.
pub const NORM_TOL: f64 = 1e-9;
/// Trajectories per reduction chunk.
const CHUNK: usize = 32;
/// Largest ‖H‖·h per Taylor substep.
const TAYLOR_STEP: f64 = 0.5;
const TAYLOR_MAX_TERMS: usize = 40;

#[derive(Clone, Debug, PartialEq)]
pub enum ObservableKind {
    /// Operator on the central site.
    Central(ComplexMatrix),
    /// Sum of product operators on the full space.
    Global(OperatorSum),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    pub name: String,
    pub kind: ObservableKind,
}

impl Observable {
    pub fn central(name: &str, op: ComplexMatrix) -> Self {
        Self {
            name: name.into(),
            kind: ObservableKind::Central(op),
        }
    }

    pub fn sigma_z() -> Self {
        Self::central("sigma_z", pauli::sigma_z())
    }

    pub fn sigma_x() -> Self {
        Self::central("sigma_x", pauli::sigma_x())
    }

    pub fn sigma_y() -> Self {
        Self::central("sigma_y", pauli::sigma_y())
    }

    /// |level><level| on a central site of dimension `dim`, named `p<level+1>`.
    pub fn population(level: usize, dim: usize) -> Self {
        Self::central(&format!("p{}", level + 1), ComplexMatrix::transition(level, level, dim))
    }

    pub fn n_plus(topo: &ModelTopology) -> Self {
        Self {
            name: "n_plus".into(),
            kind: ObservableKind::Global(crate::models::n_plus_sum(topo)),
        }
    }

    fn as_sum(&self) -> OperatorSum {
        match &self.kind {
            ObservableKind::Central(op) => OperatorSum::local(0, op.clone()),
            ObservableKind::Global(sum) => sum.clone(),
        }
    }

    fn check(&self) -> Result<()> {
        if let ObservableKind::Central(op) = &self.kind {
            let dev = op.hermiticity_error();
            if dev > HERMITIAN_TOL {
                return Err(Error::NotHermitian {
                    op: "Observable",
                    deviation: dev,
                });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryConfig {
    pub model: NoiseModel,
    /// Noise parameters per coupling label; every entry shares `dt` and `n_steps`.
    pub noise: Vec<NoiseParams>,
    pub initial: InitialEnsemble,
    pub observables: Vec<Observable>,
    pub record_stride: usize,
    pub n_traj: usize,
    pub master_seed: u64,
    /// Worker threads for [`run_ensemble`]; 0 uses all available cores.
    pub workers: usize,
    /// Replace every noise sample by zero.
    pub zero_noise: bool,
}

impl TrajectoryConfig {
    /// Config with the same noise parameters on every label.
    pub fn uniform(
        model: NoiseModel,
        noise: NoiseParams,
        initial: InitialEnsemble,
        observables: Vec<Observable>,
        n_traj: usize,
        master_seed: u64,
    ) -> Self {
        let labels = model.n_labels();
        Self {
            model,
            noise: vec![noise; labels],
            initial,
            observables,
            record_stride: 1,
            n_traj,
            master_seed,
            workers: 0,
            zero_noise: false,
        }
    }

    pub fn dt(&self) -> f64 {
        self.noise.first().map_or(0.0, |p| p.dt)
    }

    pub fn n_steps(&self) -> usize {
        self.noise.first().map_or(0, |p| p.n_steps)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_traj == 0 {
            return Err(Error::param("n_traj", "must be at least 1"));
        }
        if self.record_stride == 0 {
            return Err(Error::param("record_stride", "must be at least 1"));
        }
        if self.noise.len() != self.model.n_labels() {
            return Err(Error::param(
                "noise",
                format!("expected {} noise labels, got {}", self.model.n_labels(), self.noise.len()),
            ));
        }
        let first = self.noise.first().ok_or_else(|| Error::param("noise", "model has no couplings"))?;
        for (k, p) in self.noise.iter().enumerate() {
            p.validate()?;
            if p.dt != first.dt || p.n_steps != first.n_steps {
                return Err(Error::param(format!("noise[{k}]"), "all labels must share dt and n_steps"));
            }
        }
        self.initial.validate()?;
        for o in &self.observables {
            o.check()?;
        }
        Ok(())
    }

    pub fn record_steps(&self) -> Vec<usize> {
        (0..=self.n_steps()).step_by(self.record_stride).collect()
    }

    pub fn record_times(&self) -> Vec<f64> {
        let dt = self.dt();
        self.record_steps().iter().map(|&k| k as f64 * dt).collect()
    }

    /// (component, first global index, count) per stratum. A single component
    /// takes all trajectories; otherwise each gets its weighted share, at least
    /// two so that its standard error is defined.
    pub fn allocation(&self) -> Vec<(usize, usize, usize)> {
        let comps = &self.initial.components;
        let mut out = Vec::with_capacity(comps.len());
        let mut start = 0;
        for (k, (w, _)) in comps.iter().enumerate() {
            let count = if comps.len() == 1 {
                self.n_traj
            } else {
                ((w * self.n_traj as f64).round() as usize).max(2)
            };
            out.push((k, start, count));
            start += count;
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableSeries {
    pub name: String,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

/// Record of one trajectory: `values[o][k]` is observable `o` at record `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub names: Vec<String>,
    pub values: Vec<Vec<f64>>,
    pub max_norm_error: f64,
}

impl Trajectory {
    pub fn series(&self, name: &str) -> Option<ObservableSeries> {
        let k = self.names.iter().position(|n| n == name)?;
        Some(ObservableSeries {
            name: name.into(),
            times: self.times.clone(),
            values: self.values[k].clone(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub times: Vec<f64>,
    pub names: Vec<String>,
    pub mean: Vec<Vec<f64>>,
    pub stderr: Vec<Vec<f64>>,
    pub n_traj: usize,
    pub max_norm_error: f64,
}

impl EnsembleStats {
    fn index(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::param("observable", format!("`{name}` was not recorded")))
    }

    pub fn mean_series(&self, name: &str) -> Result<ObservableSeries> {
        let k = self.index(name)?;
        Ok(ObservableSeries {
            name: name.into(),
            times: self.times.clone(),
            values: self.mean[k].clone(),
        })
    }

    pub fn stderr_of(&self, name: &str) -> Result<&[f64]> {
        Ok(&self.stderr[self.index(name)?])
    }
}

/// ψ ← exp(-i H dt) ψ with a dense Hamiltonian.
pub fn propagate_step(psi: &StateVector, h: &ComplexMatrix, dt: f64) -> Result<StateVector> {
    apply(&expm_unitary(h, dt)?, psi)
}

/// ⟨ψ|A|ψ⟩ for Hermitian A.
pub fn observe(psi: &StateVector, op: &ComplexMatrix) -> Result<f64> {
    let dev = op.hermiticity_error();
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian {
            op: "observe",
            deviation: dev,
        });
    }
    Ok(psi.inner(&apply(op, psi)?).re)
}

/// Sparse ‖A‖₂ bound sqrt(‖A‖₁ ‖A‖_∞).
fn norm_bound(op: &SparseOp) -> f64 {
    let mut rows = vec![0.0; op.dim];
    let mut cols = vec![0.0; op.dim];
    for &(r, c, v) in &op.entries {
        rows[r] += v.norm();
        cols[c] += v.norm();
    }
    let max = |v: Vec<f64>| v.into_iter().fold(0.0, f64::max);
    (max(rows) * max(cols)).sqrt()
}

struct Coupling {
    label: usize,
    strength: f64,
    norm: f64,
}

/// Nonzero of one coupling operator (or its adjoint) on the reduced space.
struct Entry {
    row: usize,
    col: usize,
    value: C64,
    coupling: usize,
    adjoint: bool,
}

/// Work buffers of one trajectory.
struct Scratch {
    term: Vec<C64>,
    next: Vec<C64>,
    vals: Vec<C64>,
}

impl Scratch {
    fn new(dim: usize, n_entries: usize) -> Self {
        Self {
            term: vec![ZERO; dim],
            next: vec![ZERO; dim],
            vals: vec![ZERO; n_entries],
        }
    }
}

/// Reduced-space propagator shared by all trajectories of one config.
pub struct Engine<'a> {
    config: &'a TrajectoryConfig,
    space: ReducedSpace,
    diag: Vec<f64>,
    diag_norm: f64,
    couplings: Vec<Coupling>,
    entries: Vec<Entry>,
    observables: Vec<SparseOp>,
    initial: Vec<Vec<C64>>,
    allocation: Vec<(usize, usize, usize)>,
}

impl<'a> Engine<'a> {
    pub fn new(config: &'a TrajectoryConfig) -> Result<Self> {
        config.validate()?;
        let model = &config.model;
        let topo = &model.topo;
        let mut seeds = Vec::new();
        for (_, spec) in &config.initial.components {
            seeds.extend(product_support(spec, topo)?);
        }
        let space = reachable_space(model, &seeds)?;
        let diag: Vec<f64> = space
            .states
            .iter()
            .map(|&s| model.h_central[(space.basis.digits(s)[0], space.basis.digits(s)[0])].re)
            .collect();
        let diag_norm = diag.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        let mut couplings = Vec::with_capacity(model.couplings.len());
        let mut entries = Vec::new();
        for (k, c) in model.couplings.iter().enumerate() {
            let op = space.restrict(&c.op);
            for (adjoint, part) in [(false, &op), (true, &op.dagger())] {
                entries.extend(part.entries.iter().map(|&(row, col, value)| Entry {
                    row,
                    col,
                    value,
                    coupling: k,
                    adjoint,
                }));
            }
            couplings.push(Coupling {
                label: c.noise_label,
                strength: c.strength,
                norm: norm_bound(&op),
            });
        }
        entries.sort_by_key(|e| (e.row, e.col));
        let observables = config
            .observables
            .iter()
            .map(|o| space.restrict_sum(&o.as_sum()))
            .collect();
        let initial = config
            .initial
            .components
            .iter()
            .map(|(_, spec)| space.product_state(spec, topo))
            .collect::<Result<_>>()?;
        Ok(Self {
            config,
            allocation: config.allocation(),
            space,
            diag,
            diag_norm,
            couplings,
            entries,
            observables,
            initial,
        })
    }

    pub fn space(&self) -> &ReducedSpace {
        &self.space
    }

    pub fn total_trajectories(&self) -> usize {
        self.allocation.iter().map(|a| a.2).sum()
    }

    /// Initial-state component used by global trajectory `index`.
    pub fn component_of(&self, index: usize) -> usize {
        self.allocation
            .iter()
            .find(|&&(_, start, count)| index >= start && index < start + count)
            .map_or(self.allocation.len() - 1, |a| a.0)
    }

    /// Matrix elements of the noise part of H for the samples `eta`.
    fn noise_values(&self, eta: &[C64], vals: &mut [C64]) {
        for (v, e) in vals.iter_mut().zip(&self.entries) {
            let c = &self.couplings[e.coupling];
            let w = eta[c.label] * c.strength;
            *v = e.value * if e.adjoint { w.conj() } else { w };
        }
    }

    /// y = H x with the noise part given by `vals`.
    fn apply_h(&self, vals: &[C64], x: &[C64], y: &mut [C64]) {
        for ((yi, xi), d) in y.iter_mut().zip(x).zip(&self.diag) {
            *yi = xi * d;
        }
        for (v, e) in vals.iter().zip(&self.entries) {
            y[e.row] += v * x[e.col];
        }
    }

    /// ψ ← exp(-i H dt) ψ by a Taylor series summed to machine precision, in
    /// substeps with ‖H‖ h ≤ 1/2.
    fn step(&self, eta: &[C64], dt: f64, psi: &mut [C64], scratch: &mut Scratch) {
        let Scratch { term, next, vals } = scratch;
        self.noise_values(eta, vals);
        let bound = self.diag_norm
            + self
                .couplings
                .iter()
                .map(|c| c.strength.abs() * eta[c.label].norm() * c.norm)
                .sum::<f64>();
        let n_sub = ((bound * dt / TAYLOR_STEP).ceil() as usize).max(1);
        let h = dt / n_sub as f64;
        for _ in 0..n_sub {
            term.copy_from_slice(psi);
            for n in 1..=TAYLOR_MAX_TERMS {
                self.apply_h(vals, term, next);
                let f = C64::new(0.0, -h / n as f64);
                let mut size = 0.0f64;
                for ((t, nx), p) in term.iter_mut().zip(next.iter()).zip(psi.iter_mut()) {
                    *t = nx * f;
                    *p += *t;
                    size = size.max(t.norm_sqr());
                }
                if size < 1e-36 {
                    break;
                }
            }
        }
    }

    fn record(&self, psi: &[C64], out: &mut [Vec<f64>]) {
        for (o, series) in self.observables.iter().zip(out.iter_mut()) {
            series.push(o.expectation(psi).re);
        }
    }

    /// Deterministic function of (master_seed, index).
    pub fn run(&self, index: usize) -> Result<Trajectory> {
        let cfg = self.config;
        let dt = cfg.dt();
        let n_steps = cfg.n_steps();
        let n_labels = cfg.noise.len();
        let mut psi = self.initial[self.component_of(index)].clone();
        let dim = psi.len();
        let mut scratch = Scratch::new(dim, self.entries.len());
        let mut rng = stream_rng(cfg.master_seed, index as u64);
        let mut noise: Vec<ComplexOu> = if cfg.zero_noise {
            Vec::new()
        } else {
            cfg.noise.iter().map(|p| ComplexOu::start(p, &mut rng)).collect()
        };
        let mut eta = vec![ZERO; n_labels];
        let n_records = n_steps / cfg.record_stride + 1;
        let mut values: Vec<Vec<f64>> = (0..self.observables.len()).map(|_| Vec::with_capacity(n_records)).collect();
        let mut max_norm_error = 0.0f64;
        self.record(&psi, &mut values);
        for k in 1..=n_steps {
            for (e, ou) in eta.iter_mut().zip(&noise) {
                *e = ou.value();
            }
            self.step(&eta, dt, &mut psi, &mut scratch);
            for ou in noise.iter_mut() {
                ou.advance(&mut rng);
            }
            if k % cfg.record_stride == 0 {
                let norm_err = (psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() - 1.0).abs();
                max_norm_error = max_norm_error.max(norm_err);
                if norm_err > NORM_TOL {
                    return Err(Error::Integration {
                        t: k as f64 * dt,
                        reason: format!("norm drift {norm_err:.3e} in trajectory {index}"),
                    });
                }
                self.record(&psi, &mut values);
            }
        }
        Ok(Trajectory {
            times: cfg.record_times(),
            names: cfg.observables.iter().map(|o| o.name.clone()).collect(),
            values,
            max_norm_error,
        })
    }
}

pub fn run_trajectory(config: &TrajectoryConfig, index: usize) -> Result<Trajectory> {
    Engine::new(config)?.run(index)
}

/// Running mean and sum of squared deviations per observable and record.
#[derive(Clone, Debug)]
struct Moments {
    count: usize,
    mean: Vec<Vec<f64>>,
    m2: Vec<Vec<f64>>,
    max_norm_error: f64,
}

impl Moments {
    fn empty(n_obs: usize, n_rec: usize) -> Self {
        Self {
            count: 0,
            mean: vec![vec![0.0; n_rec]; n_obs],
            m2: vec![vec![0.0; n_rec]; n_obs],
            max_norm_error: 0.0,
        }
    }

    fn push(&mut self, traj: &Trajectory) {
        self.count += 1;
        let n = self.count as f64;
        for ((mean, m2), xs) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(&traj.values) {
            for ((m, s), &x) in mean.iter_mut().zip(m2.iter_mut()).zip(xs) {
                let d = x - *m;
                *m += d / n;
                *s += d * (x - *m);
            }
        }
        self.max_norm_error = self.max_norm_error.max(traj.max_norm_error);
    }

    /// Chan et al. pairwise combination.
    fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        for o in 0..self.mean.len() {
            for k in 0..self.mean[o].len() {
                let d = other.mean[o][k] - self.mean[o][k];
                self.mean[o][k] += d * nb / n;
                self.m2[o][k] += other.m2[o][k] + d * d * na * nb / n;
            }
        }
        self.count += other.count;
        self.max_norm_error = self.max_norm_error.max(other.max_norm_error);
    }

    fn stderr(&self) -> Vec<Vec<f64>> {
        let n = self.count as f64;
        self.m2
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&s| if self.count > 1 { (s / (n - 1.0) / n).sqrt() } else { 0.0 })
                    .collect()
            })
            .collect()
    }
}

/// Ensemble mean and standard error. For a mixed initial ensemble each
/// component is sampled separately and combined as mean = Σ w_k mean_k,
/// stderr = (Σ w_k² stderr_k²)^{1/2}.
pub fn run_ensemble(config: &TrajectoryConfig) -> Result<EnsembleStats> {
    let engine = Engine::new(config)?;
    let n_obs = config.observables.len();
    let n_rec = config.record_steps().len();
    let mut chunks: Vec<(usize, usize, usize)> = Vec::new();
    for &(comp, start, count) in &engine.allocation {
        let mut s = start;
        while s < start + count {
            let e = (s + CHUNK).min(start + count);
            chunks.push((comp, s, e));
            s = e;
        }
    }
    let work = |&(comp, s, e): &(usize, usize, usize)| -> Result<(usize, Moments)> {
        let mut m = Moments::empty(n_obs, n_rec);
        for j in s..e {
            m.push(&engine.run(j)?);
        }
        Ok((comp, m))
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::param("workers", e.to_string()))?;
    let partial: Vec<(usize, Moments)> = pool.install(|| chunks.par_iter().map(work).collect::<Result<_>>())?;

    let mut per_comp: Vec<Moments> = (0..engine.allocation.len()).map(|_| Moments::empty(n_obs, n_rec)).collect();
    for (comp, m) in &partial {
        per_comp[*comp].merge(m);
    }
    let weights: Vec<f64> = config.initial.components.iter().map(|(w, _)| *w).collect();
    let mut mean = vec![vec![0.0; n_rec]; n_obs];
    let mut var = vec![vec![0.0; n_rec]; n_obs];
    let mut max_norm_error = 0.0f64;
    for (m, &w) in per_comp.iter().zip(&weights) {
        let se = m.stderr();
        for o in 0..n_obs {
            for k in 0..n_rec {
                mean[o][k] += w * m.mean[o][k];
                var[o][k] += w * w * se[o][k] * se[o][k];
            }
        }
        max_norm_error = max_norm_error.max(m.max_norm_error);
    }
    Ok(EnsembleStats {
        times: config.record_times(),
        names: config.observables.iter().map(|o| o.name.clone()).collect(),
        mean,
        stderr: var.into_iter().map(|row| row.into_iter().map(f64::sqrt).collect()).collect(),
        n_traj: engine.total_trajectories(),
        max_norm_error,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub rate: f64,
    /// Standard error of the fitted rate from the regression residuals.
    pub rate_stderr: f64,
    /// RMS residual of the log-linear fit.
    pub residual: f64,
    pub n_points: usize,
}

/// Least-squares slope of log|values - floor| over `window` (whole series if
/// `None`). The shifted values must be nonzero and of one sign.
pub fn fit_exponential_decay(series: &ObservableSeries, floor: f64, window: Option<(f64, f64)>) -> Result<DecayFit> {
    let (lo, hi) = window.unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
    let pts: Vec<(f64, f64)> = series
        .times
        .iter()
        .zip(&series.values)
        .filter(|(t, _)| **t >= lo && **t <= hi)
        .map(|(&t, &v)| (t, v - floor))
        .collect();
    if pts.len() < 3 {
        return Err(Error::Fit(format!("{} points in the fit window, need 3", pts.len())));
    }
    let sign = pts[0].1.signum();
    if pts.iter().any(|&(_, d)| d == 0.0 || d.signum() != sign || !d.is_finite()) {
        return Err(Error::Fit(format!(
            "`{}` crosses or touches the floor {floor} inside the fit window",
            series.name
        )));
    }
    let xy: Vec<(f64, f64)> = pts.iter().map(|&(t, d)| (t, d.abs().ln())).collect();
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xy.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    Ok(DecayFit {
        rate: -slope,
        rate_stderr: (ss / (n - 2.0) / sxx).sqrt(),
        residual: (ss / n).sqrt(),
        n_points: xy.len(),
    })
}

/// Largest time window starting at the first record over which
/// |mean - floor| stays above `k_sigma` standard errors and `min_signal`.
pub fn significant_window(stats: &EnsembleStats, name: &str, floor: f64, k_sigma: f64, min_signal: f64) -> Result<(f64, f64)> {
    let k = stats.index(name)?;
    let mut end = 0;
    for i in 0..stats.times.len() {
        let d = (stats.mean[k][i] - floor).abs();
        if d <= k_sigma * stats.stderr[k][i] || d <= min_signal {
            break;
        }
        end = i;
    }
    if end < 2 {
        return Err(Error::Fit(format!("`{name}` falls into the noise after {end} records")));
    }
    Ok((stats.times[0], stats.times[end]))
}

/// |⟨σ⁺⟩| = ½ (⟨σx⟩² + ⟨σy⟩²)^{1/2} from ensemble means, with the standard
/// error propagated to first order.
pub fn coherence_magnitude(stats: &EnsembleStats) -> Result<(ObservableSeries, Vec<f64>)> {
    let (x, y) = (stats.index("sigma_x")?, stats.index("sigma_y")?);
    let mut values = Vec::with_capacity(stats.times.len());
    let mut errs = Vec::with_capacity(stats.times.len());
    for i in 0..stats.times.len() {
        let (mx, my) = (stats.mean[x][i], stats.mean[y][i]);
        let r = (mx * mx + my * my).sqrt();
        values.push(0.5 * r);
        let (sx, sy) = (stats.stderr[x][i], stats.stderr[y][i]);
        errs.push(if r > 0.0 {
            0.5 * ((mx * sx).powi(2) + (my * sy).powi(2)).sqrt() / r
        } else {
            0.5 * sx.max(sy)
        });
    }
    Ok((
        ObservableSeries {
            name: "abs_sigma_plus".into(),
            times: stats.times.clone(),
            values,
        },
        errs,
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaCalibration {
    /// Effective γ in units of c.
    pub gamma: f64,
    /// Fitted decay rate 4γ of ⟨σz⟩.
    pub rate: f64,
    pub rate_stderr: f64,
    pub window: (f64, f64),
}

/// Fits ⟨σz⟩ ∝ e^{-4γt} for an ensemble started in |+⟩ under a model whose
/// ⟨σz⟩ relaxes to zero (the single-noise model or the N = 1 central spin).
pub fn calibrate_gamma(stats: &EnsembleStats) -> Result<GammaCalibration> {
    let window = significant_window(stats, "sigma_z", 0.0, 5.0, 0.02)?;
    let fit = fit_exponential_decay(&stats.mean_series("sigma_z")?, 0.0, Some(window))?;
    Ok(GammaCalibration {
        gamma: fit.rate / 4.0,
        rate: fit.rate,
        rate_stderr: fit.rate_stderr,
        window,
    })
}
