// Copyright 2026 The noisebath Authors
// SPDX-License-Identifier: Apache-2.0

//! Ornstein–Uhlenbeck (Johnson) noise.
//!
//! Paths are advanced with the exact OU update
//!
//! ```text
//! xi(t + dt) = xi(t) e^{-dt/tau} + [ (1/(c tau)) (1 - e^{-2 dt/tau}) ]^{1/2} chi
//! ```
//!
//! and started from the stationary distribution, so that the correlation
//! function is `(1/(c tau)) exp(-|t' - t|/tau)` at every pair of times and does
//! not depend on the step size.

use std::io::Write;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::C64;

/// Per-trajectory generator keyed by `(master_seed, stream)`.
///
/// ChaCha streams are independent counters, so the draws seen by a given
/// stream never depend on how many other streams were consumed before it.
pub fn stream_rng(master_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    /// Memory time, in units of 1/c.
    pub tau: f64,
    /// Diffusion constant; sets the inverse time unit.
    pub c: f64,
    /// Time step, in units of 1/c.
    pub dt: f64,
    pub n_steps: usize,
}

impl NoiseParams {
    pub fn new(tau: f64, c: f64, dt: f64, n_steps: usize) -> Result<Self> {
        let p = Self { tau, c, dt, n_steps };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("tau", self.tau), ("c", self.c), ("dt", self.dt)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, format!("must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }

    /// Whether the step resolves the memory time well enough for colored-noise work.
    pub fn resolves_memory(&self) -> bool {
        self.dt <= self.tau / 10.0
    }

    pub fn stationary_variance(&self) -> f64 {
        1.0 / (self.c * self.tau)
    }

    pub fn decay_factor(&self) -> f64 {
        (-self.dt / self.tau).exp()
    }

    /// Standard deviation of the innovation term of one exact step.
    pub fn innovation_scale(&self) -> f64 {
        (self.stationary_variance() * (1.0 - (-2.0 * self.dt / self.tau).exp())).sqrt()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.n_steps).map(|k| k as f64 * self.dt).collect()
    }
}

/// Stationary initial value: (1/(c tau))^{1/2} chi.
pub fn ou_init_from(params: &NoiseParams, chi: f64) -> f64 {
    params.stationary_variance().sqrt() * chi
}

pub fn ou_init<R: Rng + ?Sized>(params: &NoiseParams, rng: &mut R) -> f64 {
    let chi: f64 = rng.sample(StandardNormal);
    ou_init_from(params, chi)
}

/// One exact OU update.
pub fn ou_step(xi: f64, params: &NoiseParams, chi: f64) -> f64 {
    xi * params.decay_factor() + params.innovation_scale() * chi
}

/// Exact OU stepper with the exponentials precomputed, for inner loops.
#[derive(Clone, Copy, Debug)]
pub struct OuStepper {
    decay: f64,
    innovation: f64,
    stationary_sd: f64,
}

impl OuStepper {
    pub fn new(params: &NoiseParams) -> Self {
        Self {
            decay: params.decay_factor(),
            innovation: params.innovation_scale(),
            stationary_sd: params.stationary_variance().sqrt(),
        }
    }

    #[inline]
    pub fn init<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let chi: f64 = rng.sample(StandardNormal);
        self.stationary_sd * chi
    }

    #[inline]
    pub fn step<R: Rng + ?Sized>(&self, xi: f64, rng: &mut R) -> f64 {
        let chi: f64 = rng.sample(StandardNormal);
        xi * self.decay + self.innovation * chi
    }
}

/// Complex noise eta = xi_1 + i xi_2 built from two independent OU processes
/// with identical parameters.
#[derive(Clone, Copy, Debug)]
pub struct ComplexOu {
    stepper: OuStepper,
    value: C64,
}

impl ComplexOu {
    pub fn start<R: Rng + ?Sized>(params: &NoiseParams, rng: &mut R) -> Self {
        let stepper = OuStepper::new(params);
        let re = stepper.init(rng);
        let im = stepper.init(rng);
        Self {
            stepper,
            value: C64::new(re, im),
        }
    }

    #[inline]
    pub fn value(&self) -> C64 {
        self.value
    }

    #[inline]
    pub fn advance<R: Rng + ?Sized>(&mut self, rng: &mut R) -> C64 {
        let re = self.stepper.step(self.value.re, rng);
        let im = self.stepper.step(self.value.im, rng);
        self.value = C64::new(re, im);
        self.value
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealNoisePath {
    pub values: Vec<f64>,
    pub params: NoiseParams,
    pub seed: u64,
}

impl RealNoisePath {
    pub fn times(&self) -> Vec<f64> {
        self.params.times()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexNoisePath {
    pub values: Vec<C64>,
    pub params: NoiseParams,
}

fn fill_real_path<R: Rng + ?Sized>(params: &NoiseParams, rng: &mut R) -> Vec<f64> {
    let stepper = OuStepper::new(params);
    let mut values = Vec::with_capacity(params.n_steps + 1);
    let mut xi = stepper.init(rng);
    values.push(xi);
    for _ in 0..params.n_steps {
        xi = stepper.step(xi, rng);
        values.push(xi);
    }
    values
}

/// Real OU path drawn from stream `stream` of `seed`.
pub fn gen_real_path(params: &NoiseParams, seed: u64, stream: u64) -> Result<RealNoisePath> {
    params.validate()?;
    let mut rng = stream_rng(seed, stream);
    Ok(RealNoisePath {
        values: fill_real_path(params, &mut rng),
        params: *params,
        seed,
    })
}

/// Complex path from two independent real paths (streams 0 and 1 of `seed`).
pub fn gen_complex_path(params: &NoiseParams, seed: u64) -> Result<ComplexNoisePath> {
    let re = gen_real_path(params, seed, 0)?;
    let im = gen_real_path(params, seed, 1)?;
    Ok(ComplexNoisePath {
        values: re.values.iter().zip(&im.values).map(|(&a, &b)| C64::new(a, b)).collect(),
        params: *params,
    })
}

/// Ensemble of real paths; path `k` uses stream `k` of `seed`.
pub fn gen_real_ensemble(params: &NoiseParams, seed: u64, n_paths: usize) -> Result<Vec<RealNoisePath>> {
    (0..n_paths as u64).map(|k| gen_real_path(params, seed, k)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEstimate {
    pub lags: Vec<f64>,
    pub values: Vec<f64>,
    pub n_samples: usize,
}

impl CorrelationEstimate {
    /// C(t)/C(0)
    pub fn normalized(&self) -> Vec<f64> {
        let c0 = self.values[0];
        self.values.iter().map(|v| v / c0).collect()
    }
}

fn check_ensemble(paths: &[RealNoisePath], op: &'static str) -> Result<usize> {
    let first = paths.first().ok_or(Error::EmptyEnsemble(op))?;
    let len = first.values.len();
    if let Some(bad) = paths.iter().find(|p| p.values.len() != len) {
        return Err(Error::DimensionMismatch {
            op,
            left: (len, 1),
            right: (bad.values.len(), 1),
        });
    }
    Ok(len)
}

/// C(t_k) = ensemble average of xi(t_k) xi(0).
pub fn estimate_correlation(paths: &[RealNoisePath]) -> Result<CorrelationEstimate> {
    let len = check_ensemble(paths, "estimate_correlation")?;
    let mut acc = vec![0.0; len];
    for p in paths {
        let x0 = p.values[0];
        for (a, x) in acc.iter_mut().zip(&p.values) {
            *a += x0 * x;
        }
    }
    let n = paths.len() as f64;
    let dt = paths[0].params.dt;
    Ok(CorrelationEstimate {
        lags: (0..len).map(|k| k as f64 * dt).collect(),
        values: acc.into_iter().map(|a| a / n).collect(),
        n_samples: paths.len(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    /// Angular frequencies, starting at 0.
    pub omegas: Vec<f64>,
    pub power: Vec<f64>,
}

/// Ensemble-averaged periodogram |FFT(xi)|^2 dt / T over non-negative frequencies.
pub fn estimate_spectrum(paths: &[RealNoisePath]) -> Result<Spectrum> {
    let len = check_ensemble(paths, "estimate_spectrum")?;
    let dt = paths[0].params.dt;
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(len);
    let n_freq = len / 2 + 1;
    let mut power = vec![0.0; n_freq];
    let mut buf = vec![C64::new(0.0, 0.0); len];
    for p in paths {
        for (b, &x) in buf.iter_mut().zip(&p.values) {
            *b = C64::new(x, 0.0);
        }
        fft.process(&mut buf);
        for (acc, z) in power.iter_mut().zip(&buf) {
            *acc += z.norm_sqr();
        }
    }
    let total_time = len as f64 * dt;
    let norm = dt * dt / total_time / paths.len() as f64;
    let omegas = (0..n_freq)
        .map(|k| 2.0 * std::f64::consts::PI * k as f64 / total_time)
        .collect();
    Ok(Spectrum {
        omegas,
        power: power.into_iter().map(|s| s * norm).collect(),
    })
}

/// Fits 1/S(omega) = a + b omega^2 over `omega <= omega_max` (skipping the DC
/// bin) and returns the half-power frequency sqrt(a/b).
pub fn fit_half_power(spec: &Spectrum, omega_max: f64) -> Result<f64> {
    let pts: Vec<(f64, f64)> = spec
        .omegas
        .iter()
        .zip(&spec.power)
        .skip(1)
        .filter(|(w, s)| **w <= omega_max && **s > 0.0)
        .map(|(w, s)| (w * w, 1.0 / s))
        .collect();
    let (a, b) = linear_fit(&pts).ok_or_else(|| Error::Fit("too few spectral points".into()))?;
    if a <= 0.0 || b <= 0.0 {
        return Err(Error::Fit(format!("non-Lorentzian spectrum (a = {a}, b = {b})")));
    }
    Ok((a / b).sqrt())
}

/// Least-squares slope of log S against log omega over `[lo, hi]`.
pub fn log_log_slope(spec: &Spectrum, lo: f64, hi: f64) -> Result<f64> {
    let pts: Vec<(f64, f64)> = spec
        .omegas
        .iter()
        .zip(&spec.power)
        .filter(|(w, s)| **w >= lo && **w <= hi && **s > 0.0)
        .map(|(w, s)| (w.ln(), s.ln()))
        .collect();
    linear_fit(&pts)
        .map(|(_, slope)| slope)
        .ok_or_else(|| Error::Fit("too few spectral points in band".into()))
}

/// Ordinary least squares y = a + b x; returns (a, b).
fn linear_fit(pts: &[(f64, f64)]) -> Option<(f64, f64)> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let b = sxy / sxx;
    Some((my - b * mx, b))
}

/// Pointwise weighted sum of independent OU paths. Component `k` uses stream
/// `k` of `seed`.
pub fn sum_johnson(components: &[(NoiseParams, f64)], seed: u64) -> Result<RealNoisePath> {
    let (first, _) = components
        .first()
        .ok_or_else(|| Error::param("components", "at least one component is required"))?;
    let len = first.n_steps + 1;
    let mut values = vec![0.0; len];
    for (k, (params, weight)) in components.iter().enumerate() {
        if params.n_steps + 1 != len || params.dt != first.dt {
            return Err(Error::DimensionMismatch {
                op: "sum_johnson",
                left: (len, 1),
                right: (params.n_steps + 1, 1),
            });
        }
        let path = gen_real_path(params, seed, k as u64)?;
        for (v, x) in values.iter_mut().zip(&path.values) {
            *v += weight * x;
        }
    }
    Ok(RealNoisePath {
        values,
        params: *first,
        seed,
    })
}

/// Debug dump: `t,xi` for real paths.
pub fn write_real_path_csv(path: &RealNoisePath, out: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(out)?);
    writeln!(f, "t,xi")?;
    for (t, x) in path.times().iter().zip(&path.values) {
        writeln!(f, "{t:e},{x:e}")?;
    }
    Ok(())
}

/// Debug dump: `t,re_eta,im_eta` for complex paths.
pub fn write_complex_path_csv(path: &ComplexNoisePath, out: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(out)?);
    writeln!(f, "t,re_eta,im_eta")?;
    for (t, z) in path.params.times().iter().zip(&path.values) {
        writeln!(f, "{t:e},{:e},{:e}", z.re, z.im)?;
    }
    Ok(())
}
