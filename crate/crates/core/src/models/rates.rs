// Copyright 2026 The noisebath Authors
// SPDX-License-Identifier: Apache-2.0

//! Maps between noise-model parameters and effective Lindblad rates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rates of the two-level central spin model: Γ_e = 2γN₋, Γ_a = 2γN₊.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateMapping {
    pub gamma: f64,
    pub n_plus: f64,
    pub n_minus: f64,
    pub gamma_e: f64,
    pub gamma_a: f64,
    pub gamma_0: f64,
    pub gamma_d: f64,
}

impl RateMapping {
    /// Number of auxiliary systems implied by N₊ + N₋ = N + 1.
    pub fn n_aux(&self) -> f64 {
        self.n_plus + self.n_minus - 1.0
    }

    /// Fixed point of the traced master equation, -Γ₀/(2Γ_d).
    pub fn steady_rho_z(&self) -> f64 {
        -self.gamma_0 / (2.0 * self.gamma_d)
    }

    /// Steady state with the upper level more populated than the lower one.
    pub fn is_unphysical(&self) -> bool {
        self.gamma_0 < 0.0
    }
}

pub fn map_rates_two_level(gamma: f64, n_plus: f64, n_minus: f64) -> Result<RateMapping> {
    for (name, v) in [("gamma", gamma), ("n_plus", n_plus), ("n_minus", n_minus)] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::param(name, format!("must be non-negative, got {v}")));
        }
    }
    if n_plus + n_minus < 1.0 {
        return Err(Error::param("n_plus + n_minus", "must be at least 1 (N >= 0)"));
    }
    let gamma_e = 2.0 * gamma * n_minus;
    let gamma_a = 2.0 * gamma * n_plus;
    Ok(RateMapping {
        gamma,
        n_plus,
        n_minus,
        gamma_e,
        gamma_a,
        gamma_0: gamma_e - gamma_a,
        gamma_d: 0.5 * (gamma_e + gamma_a),
    })
}

/// Bose–Einstein occupation 1/(e^{βE} - 1).
pub fn bose_einstein(beta: f64, energy: f64) -> f64 {
    1.0 / ((beta * energy).exp() - 1.0)
}

/// Noise parameters of one bath of the negative-temperature model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BathMapping {
    /// Effective noise strength γ_X.
    pub gamma: f64,
    /// Conserved count m_X.
    pub m: f64,
    /// Number of auxiliaries M_X.
    pub sites: usize,
}

impl BathMapping {
    pub fn is_integer(&self) -> bool {
        (self.m - self.m.round()).abs() < 1e-9
    }
}

/// Solves Γ_X (N_X + 1) = 2γ_X m_X and Γ_X N_X = 2γ_X (M_X - m_X + 1) for one bath.
pub fn solve_bath(rate: f64, occupation: f64, sites: usize) -> Result<BathMapping> {
    if !(rate > 0.0) || !(occupation >= 0.0) {
        return Err(Error::param("rate/occupation", "rate must be positive and occupation non-negative"));
    }
    let big_m = sites as f64;
    let m = if occupation.is_infinite() {
        0.5 * (big_m + 1.0)
    } else {
        (occupation + 1.0) * (big_m + 1.0) / (2.0 * occupation + 1.0)
    };
    if m > big_m + 1e-12 {
        let required = if occupation > 0.0 {
            format!("{}", ((occupation + 1.0) / occupation).ceil())
        } else {
            "unbounded".into()
        };
        return Err(Error::NoRateSolution(format!(
            "m = {m:.4} exceeds M = {sites} for occupation {occupation:.4}; required M >= {required}"
        )));
    }
    let gamma = if occupation.is_infinite() {
        // Infinite temperature: both rates diverge at fixed Γ; report the ratio limit.
        f64::INFINITY
    } else {
        rate * (occupation + 1.0) / (2.0 * m)
    };
    Ok(BathMapping { gamma, m, sites })
}

/// Smallest bath with at most `max_sites` auxiliaries whose conserved count
/// m_X comes out integer, as required for a product-state preparation.
pub fn smallest_integer_bath(rate: f64, occupation: f64, max_sites: usize) -> Result<BathMapping> {
    let mut last = None;
    for sites in 1..=max_sites {
        match solve_bath(rate, occupation, sites) {
            Ok(b) if b.is_integer() => return Ok(b),
            Ok(b) => last = Some(format!("m = {:.4} for M = {sites}", b.m)),
            Err(e) => last = Some(e.to_string()),
        }
    }
    Err(Error::NoRateSolution(format!(
        "no integer m with M <= {max_sites} for occupation {occupation:.4} (last: {})",
        last.unwrap_or_default()
    )))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NegTempMapping {
    pub hot: BathMapping,
    pub cold: BathMapping,
}

pub fn map_rates_negative_temp(
    gamma_h: f64,
    gamma_c: f64,
    n_h: f64,
    n_c: f64,
    m_h: usize,
    m_c: usize,
) -> Result<NegTempMapping> {
    Ok(NegTempMapping {
        hot: solve_bath(gamma_h, n_h, m_h)?,
        cold: solve_bath(gamma_c, n_c, m_c)?,
    })
}

/// Six transition rates of the three-level quench model, `rates[p][q]` being
/// the rate attached to L_pq = |p><q| (0-based levels).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuenchRates {
    pub rates: [[f64; 3]; 3],
}

impl QuenchRates {
    pub fn get(&self, p: usize, q: usize) -> f64 {
        self.rates[p][q]
    }
}

/// Γ_12 = 2γ_21(m_1+1), Γ_21 = 2γ_21(m_2+1), Γ_23 = 2γ_32(m_2+1),
/// Γ_32 = 2γ_32(m_3+1), Γ_13 = 2γ_31(m_1+1), Γ_31 = 2γ_31(m_3+1).
///
/// `gammas` is ordered as pairs (2,1), (3,2), (3,1); `ms` as (m_1, m_2, m_3).
pub fn map_rates_quench(gammas: [f64; 3], ms: [f64; 3]) -> Result<QuenchRates> {
    if gammas.iter().chain(ms.iter()).any(|&x| !(x >= 0.0 && x.is_finite())) {
        return Err(Error::param("gammas/ms", "must be non-negative and finite"));
    }
    let [g21, g32, g31] = gammas;
    let [m1, m2, m3] = ms;
    let mut rates = [[0.0; 3]; 3];
    rates[0][1] = 2.0 * g21 * (m1 + 1.0);
    rates[1][0] = 2.0 * g21 * (m2 + 1.0);
    rates[1][2] = 2.0 * g32 * (m2 + 1.0);
    rates[2][1] = 2.0 * g32 * (m3 + 1.0);
    rates[0][2] = 2.0 * g31 * (m1 + 1.0);
    rates[2][0] = 2.0 * g31 * (m3 + 1.0);
    Ok(QuenchRates { rates })
}

/// Auxiliary count per pair realizing [`map_rates_quench`]: M_pq = m_p + m_q + 1
/// for active pairs, 0 for pairs with γ_pq = 0.
pub fn quench_aux_counts(gammas: [f64; 3], ms: [usize; 3]) -> [usize; 3] {
    let mut out = [0; 3];
    for (k, &(p, q)) in super::QUENCH_PAIRS.iter().enumerate() {
        if gammas[k] > 0.0 {
            out[k] = ms[p] + ms[q] + 1;
        }
    }
    out
}

/// Number of pair-(p,q) auxiliaries in their upper level p when the central
/// system sits in `level`, so that the upward rate sees m_p + 1 auxiliaries in
/// q and the downward rate m_q + 1 auxiliaries in p.
pub fn quench_upper_count(pair: (usize, usize), ms: [usize; 3], level: usize) -> usize {
    let (p, q) = pair;
    let total = ms[p] + ms[q] + 1;
    if level >= p {
        ms[q] + 1
    } else {
        total - ms[p] - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_level_examples() {
        let r = map_rates_two_level(1.0, 1.0, 2.0).unwrap();
        assert_eq!(r.gamma_e / r.gamma_a, 2.0);
        assert!((r.steady_rho_z() + 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.n_aux(), 2.0);

        let sym = map_rates_two_level(0.7, 1.5, 1.5).unwrap();
        assert_eq!(sym.gamma_0, 0.0);
        assert_eq!(sym.steady_rho_z(), 0.0);

        let un = map_rates_two_level(1.0, 1.75, 1.25).unwrap();
        assert!((un.steady_rho_z() - 1.0 / 6.0).abs() < 1e-15);
        assert!(un.is_unphysical());

        assert!(map_rates_two_level(-1.0, 1.0, 1.0).is_err());
        assert!(map_rates_two_level(1.0, -0.5, 1.0).is_err());
    }

    #[test]
    fn reference_unit_rates() {
        // γ = 1: Γ_e = 2N₋, Γ_a = 2N₊
        let r = map_rates_two_level(1.0, 1.0, 3.0).unwrap();
        assert_eq!((r.gamma_e, r.gamma_a), (6.0, 2.0));
    }

    #[test]
    fn negative_temp_examples() {
        // Oracle: solve 2γm = 2Γ and 2γ(M - m + 1) = Γ with M = 2 directly:
        // dividing gives m = 2(3 - m) → m = 2, then γ = Γ/2.
        let b = solve_bath(0.3, 1.0, 2).unwrap();
        assert!((b.m - 2.0).abs() < 1e-12);
        assert!((b.gamma - 0.15).abs() < 1e-12);
        assert!(b.is_integer());

        for n in [1e3, 1e6] {
            let b = solve_bath(1.0, n, 5).unwrap();
            let ratio = b.m / (5.0 - b.m + 1.0);
            assert!((ratio - 1.0).abs() < 2.0 / n);
        }

        let err = solve_bath(1.0, 1e-4, 3).unwrap_err();
        assert!(matches!(err, Error::NoRateSolution(_)));
        assert!(err.to_string().contains("required M"));

        let hot = smallest_integer_bath(0.2, 1.0, 3).unwrap();
        assert_eq!((hot.sites, hot.m.round() as usize), (2, 2));
        let cold = smallest_integer_bath(0.2, 0.5, 3).unwrap();
        assert_eq!((cold.sites, cold.m.round() as usize), (3, 3));
        assert!(smallest_integer_bath(0.2, 0.3, 3).is_err());

        let both = map_rates_negative_temp(0.2, 0.2, 1.0, 0.5, 2, 3).unwrap();
        assert!(both.hot.is_integer() && both.cold.is_integer());
        assert!((both.cold.m - 3.0).abs() < 1e-12);
    }

    #[test]
    fn quench_examples() {
        let eq = map_rates_quench([1.0, 1.0, 1.0], [2.0, 2.0, 2.0]).unwrap();
        assert_eq!(eq.get(0, 1), eq.get(1, 0));
        assert_eq!(eq.get(1, 2), eq.get(2, 1));
        assert_eq!(eq.get(0, 2), eq.get(2, 0));

        let ms = [3.0, 1.0, 0.0];
        let r = map_rates_quench([0.4, 0.7, 1.3], ms).unwrap();
        assert!((r.get(0, 1) / r.get(1, 0) - (ms[0] + 1.0) / (ms[1] + 1.0)).abs() < 1e-14);
        let triangle = (r.get(0, 1) / r.get(1, 0)) * (r.get(1, 2) / r.get(2, 1));
        assert!((triangle - r.get(0, 2) / r.get(2, 0)).abs() < 1e-12);

        // Thermal target at β = 1: ratios are e^{βE_2} and e^{βE_3}.
        let e2 = (2.0f64).ln();
        let e3 = (4.0f64).ln();
        assert!((r.get(0, 1) / r.get(1, 0) - (e2).exp()).abs() < 1e-12);
        assert!((r.get(0, 2) / r.get(2, 0) - (e3).exp()).abs() < 1e-12);

        assert!(map_rates_quench([1.0, -1.0, 0.0], ms).is_err());
    }

    #[test]
    fn quench_counts_reproduce_rates() {
        let ms = [3, 1, 0];
        assert_eq!(quench_aux_counts([1.0, 0.3, 0.0], ms), [5, 2, 0]);
        // Pair (2,1): central in |1>, aux in q must number m_2 + 1 = 2.
        let total = 5;
        assert_eq!(total - quench_upper_count((1, 0), ms, 0), 2);
        // Central in |2>, aux in p must number m_1 + 1 = 4.
        assert_eq!(quench_upper_count((1, 0), ms, 1), 4);
    }
}
