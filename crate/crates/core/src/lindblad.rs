// Copyright 2026 The noisebath Authors
// SPDX-License-Identifier: Apache-2.0

//! Markovian reference dynamics.
//!
//! `dρ/dt = -i[H, ρ] + Σ_k Γ_k (L_k ρ L_k† - ½{L_k† L_k, ρ})`, integrated with
//! fixed-step RK4, plus the closed-form two-level solution and thermal rates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::QuenchRates;
use crate::numkernel::{anticommutator, commutator, eigh, pauli, ComplexMatrix, StateVector, C64, HERMITIAN_TOL, I, ONE};

/// Tolerances of the density-matrix contract.
pub const TRACE_TOL: f64 = 1e-9;
pub const POSITIVITY_TOL: f64 = 1e-8;
/// Largest admissible dt · max(Γ, ‖H‖).
pub const STEP_RULE: f64 = 0.01;

#[derive(Clone, Debug, PartialEq)]
pub struct Jump {
    pub op: ComplexMatrix,
    pub rate: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LindbladSpec {
    pub h: ComplexMatrix,
    pub jumps: Vec<Jump>,
    /// Admits negative rates and skips the positivity monitor.
    pub allow_unphysical: bool,
}

impl LindbladSpec {
    pub fn new(h: ComplexMatrix, jumps: Vec<(ComplexMatrix, f64)>) -> Result<Self> {
        let spec = Self {
            h,
            jumps: jumps.into_iter().map(|(op, rate)| Jump { op, rate }).collect(),
            allow_unphysical: false,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn allowing_unphysical(mut self) -> Self {
        self.allow_unphysical = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let (r, c) = self.h.dims();
        if r != c {
            return Err(Error::NotSquare {
                op: "LindbladSpec",
                rows: r,
                cols: c,
            });
        }
        let dev = self.h.hermiticity_error();
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian {
                op: "LindbladSpec",
                deviation: dev,
            });
        }
        for (k, j) in self.jumps.iter().enumerate() {
            if j.op.dims() != (r, r) {
                return Err(Error::DimensionMismatch {
                    op: "LindbladSpec",
                    left: (r, r),
                    right: j.op.dims(),
                });
            }
            if !j.rate.is_finite() || (j.rate < 0.0 && !self.allow_unphysical) {
                return Err(Error::param(format!("jumps[{k}].rate"), format!("must be non-negative, got {}", j.rate)));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.h.rows()
    }

    /// max(|Γ_k|, ‖H‖_∞), the scale entering the step-size rule.
    pub fn stiffness(&self) -> f64 {
        let h_norm = (0..self.dim())
            .map(|r| self.h.row(r).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max);
        self.jumps.iter().map(|j| j.rate.abs()).fold(h_norm, f64::max)
    }

    /// Largest dt accepted by [`integrate`].
    pub fn max_dt(&self) -> f64 {
        let s = self.stiffness();
        if s > 0.0 {
            STEP_RULE / s
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity and unit trace. Positivity is checked separately by
    /// [`DensityMatrix::min_eigenvalue`].
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let (r, c) = matrix.dims();
        if r != c {
            return Err(Error::NotSquare {
                op: "DensityMatrix",
                rows: r,
                cols: c,
            });
        }
        let dev = matrix.hermiticity_error();
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian {
                op: "DensityMatrix",
                deviation: dev,
            });
        }
        let tr = matrix.trace();
        if (tr - ONE).norm() > HERMITIAN_TOL {
            return Err(Error::param("trace", format!("expected 1, got {tr}")));
        }
        Ok(Self { matrix })
    }

    pub fn pure(psi: &StateVector) -> Result<Self> {
        Self::new(psi.normalized()?.projector())
    }

    pub fn diagonal(populations: &[f64]) -> Result<Self> {
        Self::new(ComplexMatrix::from_real_diag(populations))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.matrix.diag_real()
    }

    /// tr(ρ A)
    pub fn expect(&self, op: &ComplexMatrix) -> Result<C64> {
        Ok(op.matmul(&self.matrix)?.trace())
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(eigh(&self.matrix)?.0[0])
    }

    /// ⟨σz⟩ = ρ₊₊ - ρ₋₋ of a two-level state.
    pub fn rho_z(&self) -> f64 {
        self.matrix[(0, 0)].re - self.matrix[(1, 1)].re
    }

    /// ⟨σ⁺⟩ = ρ₋₊ of a two-level state.
    pub fn rho_plus(&self) -> C64 {
        self.matrix[(1, 0)]
    }
}

/// Γ(L ρ L† - ½{L†L, ρ}); accepts any square ρ so that RK4 stages can use it.
pub fn dissipator(rho: &ComplexMatrix, l: &ComplexMatrix, gamma: f64) -> Result<ComplexMatrix> {
    let ldag = l.dagger();
    let sandwich = l.matmul(rho)?.matmul(&ldag)?;
    let anti = anticommutator(&ldag.matmul(l)?, rho)?;
    Ok(sandwich.try_sub(&anti.scale_real(0.5))?.scale_real(gamma))
}

/// -i[H, ρ] + Σ dissipators.
pub fn rhs(rho: &ComplexMatrix, spec: &LindbladSpec) -> Result<ComplexMatrix> {
    let mut out = commutator(&spec.h, rho)?.scale(-I);
    for j in &spec.jumps {
        out.axpy(ONE, &dissipator(rho, &j.op, j.rate)?)?;
    }
    Ok(out)
}

/// The generator in the form -i(H_eff ρ - ρ H_eff†) + Σ Γ L ρ L†, with the
/// operator products precomputed.
struct Generator {
    h_eff: ComplexMatrix,
    h_eff_dag: ComplexMatrix,
    jumps: Vec<(ComplexMatrix, ComplexMatrix, f64)>,
}

impl Generator {
    fn new(spec: &LindbladSpec) -> Result<Self> {
        let mut h_eff = spec.h.clone();
        for j in &spec.jumps {
            let ldl = j.op.dagger().matmul(&j.op)?;
            h_eff.axpy(C64::new(0.0, -0.5 * j.rate), &ldl)?;
        }
        Ok(Self {
            h_eff_dag: h_eff.dagger(),
            h_eff,
            jumps: spec.jumps.iter().map(|j| (j.op.clone(), j.op.dagger(), j.rate)).collect(),
        })
    }

    fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        let mut out = self.h_eff.matmul(rho)?.try_sub(&rho.matmul(&self.h_eff_dag)?)?.scale(-I);
        for (l, ldag, rate) in &self.jumps {
            out.axpy(C64::new(*rate, 0.0), &l.matmul(rho)?.matmul(ldag)?)?;
        }
        Ok(out)
    }

    fn rk4(&self, rho: &ComplexMatrix, h: f64) -> Result<ComplexMatrix> {
        let hc = C64::new(h, 0.0);
        let k1 = self.apply(rho)?;
        let mut s = rho.clone();
        s.axpy(hc * 0.5, &k1)?;
        let k2 = self.apply(&s)?;
        let mut s = rho.clone();
        s.axpy(hc * 0.5, &k2)?;
        let k3 = self.apply(&s)?;
        let mut s = rho.clone();
        s.axpy(hc, &k3)?;
        let k4 = self.apply(&s)?;
        let mut out = rho.clone();
        out.axpy(hc / 6.0, &k1)?;
        out.axpy(hc / 3.0, &k2)?;
        out.axpy(hc / 3.0, &k3)?;
        out.axpy(hc / 6.0, &k4)?;
        Ok(out.hermitian_part())
    }
}

/// RK4 solution sampled on `t_grid` (ascending, starting at or after 0, the
/// time of `rho0`). Each grid interval is split into equal substeps no longer
/// than `dt`.
pub fn integrate(spec: &LindbladSpec, rho0: &DensityMatrix, t_grid: &[f64], dt: f64) -> Result<Vec<DensityMatrix>> {
    spec.validate()?;
    if rho0.dim() != spec.dim() {
        return Err(Error::DimensionMismatch {
            op: "integrate",
            left: (spec.dim(), spec.dim()),
            right: rho0.matrix.dims(),
        });
    }
    if !(dt > 0.0) || dt > spec.max_dt() * (1.0 + 1e-12) {
        return Err(Error::param(
            "dt",
            format!("{dt} violates dt·max(Γ, ‖H‖) ≤ {STEP_RULE} (max dt {:.3e})", spec.max_dt()),
        ));
    }
    if t_grid.first().is_some_and(|&t| t < 0.0) || t_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::param("t_grid", "must be non-negative and ascending"));
    }
    let gen = Generator::new(spec)?;
    let mut rho = rho0.matrix.clone();
    let mut t = 0.0;
    let mut out = Vec::with_capacity(t_grid.len());
    for &target in t_grid {
        let span = target - t;
        if span > 0.0 {
            let n = (span / dt).ceil().max(1.0) as usize;
            let h = span / n as f64;
            for _ in 0..n {
                rho = gen.rk4(&rho, h)?;
            }
        }
        t = target;
        let drift = (rho.trace() - ONE).norm();
        if drift > TRACE_TOL {
            return Err(Error::Integration {
                t,
                reason: format!("trace drift {drift:.3e} exceeds {TRACE_TOL:.0e}; reduce dt"),
            });
        }
        let state = DensityMatrix { matrix: rho.clone() };
        if !spec.allow_unphysical {
            let min_eig = state.min_eigenvalue()?;
            if min_eig < -POSITIVITY_TOL {
                return Err(Error::Integration {
                    t,
                    reason: format!("positivity violated, min eigenvalue {min_eig:.3e}"),
                });
            }
        }
        out.push(state);
    }
    Ok(out)
}

/// Closed-form (ρz, ρ₊) of the two-level model:
/// ρz(t) = (ρz(0) + Γ₀/(2Γ_d)) e^{-2Γ_d t} - Γ₀/(2Γ_d),
/// ρ₊(t) = ρ₊(0) e^{(iω_s - Γ_d) t}.
pub fn analytic_two_level(gamma_e: f64, gamma_a: f64, omega_s: f64, rho_z0: f64, rho_p0: C64, t: f64) -> (f64, C64) {
    let g0 = gamma_e - gamma_a;
    let gd = 0.5 * (gamma_e + gamma_a);
    let rz = if gd == 0.0 {
        rho_z0
    } else {
        let fixed = g0 / (2.0 * gd);
        (rho_z0 + fixed) * (-2.0 * gd * t).exp() - fixed
    };
    (rz, rho_p0 * (C64::new(-gd, omega_s) * t).exp())
}

/// Detailed-balance rates (Γ_e, Γ_a) = (Γ₀(N + 1), Γ₀ N), N = 1/(e^{βω_s} - 1).
///
/// For β < 0 the occupation is below -1, so non-negative rates need Γ₀ < 0
/// (recall Γ₀ = Γ_e - Γ_a).
pub fn thermal_rates(omega_s: f64, beta: f64, gamma_0: f64) -> Result<(f64, f64)> {
    if beta == 0.0 || beta.is_nan() {
        return Err(Error::param("beta", "infinite temperature: both rates are unbounded"));
    }
    let n = crate::models::bose_einstein(beta, omega_s);
    let (ge, ga) = (gamma_0 * (n + 1.0), gamma_0 * n);
    if ge < 0.0 || ga < 0.0 {
        return Err(Error::param(
            "gamma_0",
            format!("rates ({ge}, {ga}) are negative; Γ₀ must share the sign of β ω_s"),
        ));
    }
    Ok((ge, ga))
}

/// H = ω_s σz/2, jumps σ⁻ at Γ_e and σ⁺ at Γ_a.
pub fn two_level_spec(omega_s: f64, gamma_e: f64, gamma_a: f64) -> Result<LindbladSpec> {
    LindbladSpec::new(
        crate::models::build_two_level_hs(omega_s),
        vec![(pauli::sigma_minus(), gamma_e), (pauli::sigma_plus(), gamma_a)],
    )
}

/// Three-level system between a hot bath on |1>↔|3> and a cold bath on |2>↔|3>.
pub fn negative_temp_spec(e_h: f64, e_c: f64, rate_h: f64, rate_c: f64, n_h: f64, n_c: f64) -> Result<LindbladSpec> {
    let l_h = ComplexMatrix::transition(0, 2, 3);
    let l_c = ComplexMatrix::transition(1, 2, 3);
    LindbladSpec::new(
        crate::models::build_negative_temp_hs(e_h, e_c),
        vec![
            (l_h.clone(), rate_h * (n_h + 1.0)),
            (l_h.dagger(), rate_h * n_h),
            (l_c.clone(), rate_c * (n_c + 1.0)),
            (l_c.dagger(), rate_c * n_c),
        ],
    )
}

/// Three-level system with L_pq = |p><q| at `rates.get(p, q)`; zero rates are dropped.
pub fn quench_spec(e2: f64, e3: f64, rates: &QuenchRates) -> Result<LindbladSpec> {
    let mut jumps = Vec::new();
    for p in 0..3 {
        for q in 0..3 {
            if p != q && rates.get(p, q) != 0.0 {
                jumps.push((ComplexMatrix::transition(p, q, 3), rates.get(p, q)));
            }
        }
    }
    LindbladSpec::new(ComplexMatrix::from_real_diag(&[0.0, e2, e3]), jumps)
}

/// Solution series in a serializable shape.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PopulationSeries {
    pub times: Vec<f64>,
    pub populations: Vec<Vec<f64>>,
}

impl PopulationSeries {
    pub fn from_states(times: &[f64], states: &[DensityMatrix]) -> Self {
        Self {
            times: times.to_vec(),
            populations: states.iter().map(|s| s.populations()).collect(),
        }
    }

    /// Population of `level` over time.
    pub fn level(&self, level: usize) -> Vec<f64> {
        self.populations.iter().map(|p| p[level]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::ZERO;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, n, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    fn random_density(rng: &mut ChaCha8Rng, n: usize) -> DensityMatrix {
        let a = random_matrix(rng, n);
        let p = a.matmul(&a.dagger()).unwrap();
        let tr = p.trace().re;
        DensityMatrix::new(p.scale_real(1.0 / tr).hermitian_part()).unwrap()
    }

    #[test]
    fn dissipator_examples() {
        let up = DensityMatrix::pure(&pauli::up()).unwrap();
        let d = dissipator(up.matrix(), &pauli::sigma_minus(), 0.3).unwrap();
        let expected = ComplexMatrix::from_real_diag(&[-0.3, 0.3]);
        assert!(d.max_abs_diff(&expected) < 1e-15);

        let down = DensityMatrix::pure(&pauli::down()).unwrap();
        assert_eq!(dissipator(down.matrix(), &pauli::sigma_minus(), 1.0).unwrap().max_abs(), 0.0);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [2, 3, 5] {
            let rho = random_density(&mut rng, n);
            let l = random_matrix(&mut rng, n);
            assert!(dissipator(rho.matrix(), &l, 0.7).unwrap().trace().norm() < 1e-12);
        }
    }

    #[test]
    fn rhs_examples() {
        let spec = LindbladSpec::new(ComplexMatrix::from_real_diag(&[1.0, -0.5, 0.2]), vec![]).unwrap();
        let rho = DensityMatrix::diagonal(&[0.5, 0.3, 0.2]).unwrap();
        assert_eq!(rhs(rho.matrix(), &spec).unwrap().max_abs(), 0.0);

        // Gibbs state of the rates: p₊/p₋ = Γ_a/Γ_e.
        let (ge, ga) = thermal_rates(0.1, 3.0, 0.4).unwrap();
        let spec = two_level_spec(0.1, ge, ga).unwrap();
        let gibbs = DensityMatrix::diagonal(&[ga / (ge + ga), ge / (ge + ga)]).unwrap();
        assert!(rhs(gibbs.matrix(), &spec).unwrap().max_abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = random_matrix(&mut rng, 3).hermitian_part();
        let spec = LindbladSpec::new(h, vec![(random_matrix(&mut rng, 3), 0.4), (random_matrix(&mut rng, 3), 1.1)]).unwrap();
        let rho = random_density(&mut rng, 3);
        let out = rhs(rho.matrix(), &spec).unwrap();
        assert!(out.hermiticity_error() < 1e-12);
        assert!(out.trace().norm() < 1e-12);
        assert!(out.max_abs_diff(&Generator::new(&spec).unwrap().apply(rho.matrix()).unwrap()) < 1e-12);
    }

    #[test]
    fn free_precession() {
        let omega = 0.7;
        let spec = two_level_spec(omega, 0.0, 0.0).unwrap();
        let x = StateVector::new(vec![ONE, ONE]).normalized().unwrap();
        let times: Vec<f64> = (0..=20).map(|k| 0.5 * k as f64).collect();
        let out = integrate(&spec, &DensityMatrix::pure(&x).unwrap(), &times, 0.01).unwrap();
        for (t, s) in times.iter().zip(&out) {
            let expected = 0.5 * (I * omega * t).exp();
            assert!((s.rho_plus() - expected).norm() < 1e-9);
        }
    }

    #[test]
    fn integrator_matches_closed_form() {
        let (ge, ga, w) = (0.4, 0.2, 0.1);
        let spec = two_level_spec(w, ge, ga).unwrap();
        let psi = StateVector::new(vec![C64::new(0.8, 0.0), C64::new(0.0, 0.6)]);
        let rho0 = DensityMatrix::pure(&psi).unwrap();
        let times: Vec<f64> = (0..=100).map(|k| 0.5 * k as f64).collect();
        let out = integrate(&spec, &rho0, &times, spec.max_dt()).unwrap();
        for (t, s) in times.iter().zip(&out) {
            let (rz, rp) = analytic_two_level(ge, ga, w, rho0.rho_z(), rho0.rho_plus(), *t);
            assert!((s.rho_z() - rz).abs() < 1e-8);
            assert!((s.rho_plus() - rp).norm() < 1e-8);
        }
        let last = out.last().unwrap();
        assert!((last.rho_z() + (ge - ga) / (ge + ga)).abs() < 1e-6);
    }

    #[test]
    fn decoherence_rate_is_gamma_d() {
        let (ge, ga) = (0.6, 0.2);
        let spec = two_level_spec(0.3, ge, ga).unwrap();
        let x = StateVector::new(vec![ONE, ONE]).normalized().unwrap();
        let times: Vec<f64> = (0..=40).map(|k| 0.25 * k as f64).collect();
        let out = integrate(&spec, &DensityMatrix::pure(&x).unwrap(), &times, 0.01).unwrap();
        let logs: Vec<f64> = out.iter().map(|s| s.rho_plus().norm().ln()).collect();
        let slope = (logs[40] - logs[0]) / (times[40] - times[0]);
        assert!((-slope / (0.5 * (ge + ga)) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn trace_preserved_for_random_three_level() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = random_matrix(&mut rng, 3).hermitian_part();
        let jumps = (0..3).map(|_| (random_matrix(&mut rng, 3), rng.random_range(0.0..0.5))).collect();
        let spec = LindbladSpec::new(h, jumps).unwrap();
        let rho0 = random_density(&mut rng, 3);
        let times: Vec<f64> = (0..=30).map(|k| 0.1 * k as f64).collect();
        let dt = spec.max_dt();
        for s in integrate(&spec, &rho0, &times, dt).unwrap() {
            assert!((s.matrix().trace() - ONE).norm() < 1e-9);
            assert!(s.matrix().hermiticity_error() < 1e-10);
            assert!(s.min_eigenvalue().unwrap() > -1e-8);
        }
    }

    #[test]
    fn integrate_rejects_bad_input() {
        let spec = two_level_spec(0.1, 1.0, 0.5).unwrap();
        let rho0 = DensityMatrix::pure(&pauli::up()).unwrap();
        assert!(integrate(&spec, &rho0, &[1.0], 0.1).is_err());
        assert!(integrate(&spec, &rho0, &[1.0, 0.5], 0.001).is_err());
        let three = DensityMatrix::diagonal(&[1.0, 0.0, 0.0]).unwrap();
        assert!(integrate(&spec, &three, &[1.0], 0.001).is_err());
        assert!(LindbladSpec::new(pauli::sigma_plus(), vec![]).is_err());
        assert!(LindbladSpec::new(pauli::sigma_z(), vec![(pauli::sigma_minus(), -1.0)]).is_err());
    }

    #[test]
    fn analytic_examples() {
        let p0 = C64::new(0.3, -0.1);
        let (rz, rp) = analytic_two_level(0.4, 0.2, 0.1, 0.5, p0, 0.0);
        assert!((rz - 0.5).abs() < 1e-15 && rp == p0);
        let (rz, rp) = analytic_two_level(0.4, 0.2, 0.1, 1.0, p0, 1e3);
        assert!((rz + 0.2 / 0.6).abs() < 1e-14);
        assert!(rp.norm() < 1e-100);
        // Equal rates 2γ each: ρz decays to 0 as e^{-4γ t}.
        let gamma = 0.25;
        let (rz, _) = analytic_two_level(2.0 * gamma, 2.0 * gamma, 0.1, 1.0, ZERO, 2.0);
        assert!((rz - (-4.0 * gamma * 2.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn thermal_rate_examples() {
        let w = 0.5;
        let (ge, ga) = thermal_rates(w, 2f64.ln() / w, 0.3).unwrap();
        assert!((ga - 0.3).abs() < 1e-12 && (ge - 0.6).abs() < 1e-12);

        let (ge, ga) = thermal_rates(w, 1e4, 0.3).unwrap();
        assert!(ga < 1e-300 && (ge - 0.3).abs() < 1e-15);

        let (ge, ga) = thermal_rates(w, -1.0, -0.3).unwrap();
        assert!(ga > ge && ge > 0.0);
        assert!(thermal_rates(w, -1.0, 0.3).is_err());
        assert!(thermal_rates(w, 0.0, 0.3).is_err());
    }

    #[test]
    fn negative_temp_reference_is_inverted() {
        let (n_h, n_c) = (1.0, 0.5);
        let spec = negative_temp_spec(2.0, 1.0, 0.2, 0.2, n_h, n_c).unwrap();
        let rho0 = DensityMatrix::diagonal(&[1.0, 0.0, 0.0]).unwrap();
        let out = integrate(&spec, &rho0, &[200.0], spec.max_dt()).unwrap();
        let p = out[0].populations();
        // Steady ratio p₂/p₁ = N_H (N_C + 1) / ((N_H + 1) N_C), derived from the
        // zero-flux balance on both links.
        let expected = n_h * (n_c + 1.0) / ((n_h + 1.0) * n_c);
        assert!((p[1] / p[0] - expected).abs() < 1e-6);
        assert!(p[1] > p[0]);
    }

    #[test]
    fn quench_reference_reaches_gibbs() {
        let rates = crate::models::map_rates_quench([1.0, 0.5, 0.0], [3.0, 1.0, 0.0]).unwrap();
        let spec = quench_spec(2f64.ln(), 4f64.ln(), &rates).unwrap();
        let rho0 = DensityMatrix::diagonal(&[0.0, 0.0, 1.0]).unwrap();
        let out = integrate(&spec, &rho0, &[60.0], spec.max_dt()).unwrap();
        let p = out[0].populations();
        let z = 1.0 + 0.5 + 0.25;
        for (a, b) in p.iter().zip([1.0 / z, 0.5 / z, 0.25 / z]) {
            assert!((a - b).abs() < 1e-8);
        }
    }
}
