// Copyright 2026 The noisebath Authors
// SPDX-License-Identifier: Apache-2.0

//! Noise-coupled model Hamiltonians.
//!
//! Every model is a central system (site 0) with a diagonal static Hamiltonian,
//! plus auxiliary sites. Each coupling term is a product operator `A` entering
//! the Hamiltonian as `strength * (eta A + eta* A†)` with its own complex noise.
//!
//! Two-level sites use the basis `|+>, |->` (index 0 excited). Three-level
//! sites use `|1>, |2>, |3>` at indices 0, 1, 2, ascending in energy.

mod rates;
pub mod sector;

pub use rates::*;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::{kron, pauli, ComplexMatrix, StateVector, C64, ZERO};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelTopology {
    central_dim: usize,
    aux_dims: Vec<usize>,
}

impl ModelTopology {
    pub fn new(central_dim: usize, aux_dims: Vec<usize>) -> Result<Self> {
        for (name, d) in std::iter::once(("central_dim", central_dim))
            .chain(aux_dims.iter().map(|&d| ("aux_dims", d)))
        {
            if d != 2 && d != 3 {
                return Err(Error::param(name, format!("local dimension must be 2 or 3, got {d}")));
            }
        }
        Ok(Self { central_dim, aux_dims })
    }

    /// Two-level central system with `n` two-level auxiliaries.
    pub fn spins(n: usize) -> Self {
        Self {
            central_dim: 2,
            aux_dims: vec![2; n],
        }
    }

    pub fn central_dim(&self) -> usize {
        self.central_dim
    }

    pub fn aux_dims(&self) -> &[usize] {
        &self.aux_dims
    }

    /// Number of auxiliary systems.
    pub fn n_aux(&self) -> usize {
        self.aux_dims.len()
    }

    pub fn n_sites(&self) -> usize {
        self.aux_dims.len() + 1
    }

    pub fn site_dim(&self, site: usize) -> Result<usize> {
        match site {
            0 => Ok(self.central_dim),
            s if s <= self.aux_dims.len() => Ok(self.aux_dims[s - 1]),
            s => Err(Error::SiteOutOfRange {
                site: s,
                n_sites: self.n_sites(),
            }),
        }
    }

    pub fn site_dims(&self) -> Vec<usize> {
        std::iter::once(self.central_dim).chain(self.aux_dims.iter().copied()).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.site_dims().iter().product()
    }
}

/// I ⊗ … ⊗ local ⊗ … ⊗ I with `local` at `site` (site 0 is the central system).
pub fn embed_site_op(local: &ComplexMatrix, site: usize, topo: &ModelTopology) -> Result<ComplexMatrix> {
    ProductOp::single(site, local.clone()).dense(topo)
}

/// Tensor product of local operators on distinct sites, identity elsewhere.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductOp {
    factors: Vec<(usize, ComplexMatrix)>,
}

impl ProductOp {
    pub fn new(mut factors: Vec<(usize, ComplexMatrix)>) -> Result<Self> {
        factors.sort_by_key(|(s, _)| *s);
        if factors.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::param("factors", "sites must be distinct"));
        }
        if let Some((_, m)) = factors.iter().find(|(_, m)| !m.is_square()) {
            return Err(Error::NotSquare {
                op: "ProductOp",
                rows: m.rows(),
                cols: m.cols(),
            });
        }
        Ok(Self { factors })
    }

    pub fn single(site: usize, local: ComplexMatrix) -> Self {
        Self {
            factors: vec![(site, local)],
        }
    }

    pub fn factors(&self) -> &[(usize, ComplexMatrix)] {
        &self.factors
    }

    pub fn dagger(&self) -> Self {
        Self {
            factors: self.factors.iter().map(|(s, m)| (*s, m.dagger())).collect(),
        }
    }

    pub fn check(&self, topo: &ModelTopology) -> Result<()> {
        for (site, m) in &self.factors {
            let d = topo.site_dim(*site)?;
            if m.rows() != d {
                return Err(Error::DimensionMismatch {
                    op: "embed_site_op",
                    left: m.dims(),
                    right: (d, d),
                });
            }
        }
        Ok(())
    }

    pub fn dense(&self, topo: &ModelTopology) -> Result<ComplexMatrix> {
        self.check(topo)?;
        let mut out = ComplexMatrix::identity(1);
        for (site, d) in topo.site_dims().into_iter().enumerate() {
            let local = match self.factors.iter().find(|(s, _)| *s == site) {
                Some((_, m)) => m.clone(),
                None => ComplexMatrix::identity(d),
            };
            out = kron(&out, &local);
        }
        Ok(out)
    }

    /// Nonzero entries of the column for product-basis state `digits`, as
    /// `(row digits, value)`.
    pub fn column(&self, digits: &[usize]) -> Vec<(Vec<usize>, C64)> {
        let mut out = vec![(digits.to_vec(), C64::new(1.0, 0.0))];
        for (site, m) in &self.factors {
            let col = digits[*site];
            let mut next = Vec::with_capacity(out.len());
            for (d, v) in &out {
                for r in 0..m.rows() {
                    let x = m[(r, col)];
                    if x != ZERO {
                        let mut nd = d.clone();
                        nd[*site] = r;
                        next.push((nd, v * x));
                    }
                }
            }
            out = next;
        }
        out
    }
}

/// Linear combination of product operators.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct OperatorSum {
    pub terms: Vec<(C64, ProductOp)>,
}

impl OperatorSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, coeff: f64, op: ProductOp) -> Self {
        self.terms.push((C64::new(coeff, 0.0), op));
        self
    }

    pub fn local(site: usize, op: ComplexMatrix) -> Self {
        Self::new().with(1.0, ProductOp::single(site, op))
    }

    pub fn dense(&self, topo: &ModelTopology) -> Result<ComplexMatrix> {
        let n = topo.total_dim();
        let mut out = ComplexMatrix::zeros(n, n);
        for (c, op) in &self.terms {
            out.axpy(*c, &op.dense(topo)?)?;
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CouplingTerm {
    /// Operator multiplying eta_i(t); its adjoint multiplies eta_i*(t).
    pub op: ProductOp,
    pub noise_label: usize,
    /// Real amplitude applied to the noise on this term.
    pub strength: f64,
    /// Bath or transition group, used to scale strengths per group.
    pub group: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoiseModel {
    pub name: String,
    pub topo: ModelTopology,
    /// Static Hamiltonian of the central system (diagonal).
    pub h_central: ComplexMatrix,
    pub couplings: Vec<CouplingTerm>,
}

impl NoiseModel {
    pub fn n_labels(&self) -> usize {
        self.couplings.iter().map(|c| c.noise_label + 1).max().unwrap_or(0)
    }

    pub fn static_dense(&self) -> Result<ComplexMatrix> {
        embed_site_op(&self.h_central, 0, &self.topo)
    }

    pub fn set_group_strength(&mut self, group: &str, strength: f64) {
        for c in self.couplings.iter_mut().filter(|c| c.group == group) {
            c.strength = strength;
        }
    }

    pub fn groups(&self) -> Vec<String> {
        let mut g: Vec<String> = Vec::new();
        for c in &self.couplings {
            if !g.contains(&c.group) {
                g.push(c.group.clone());
            }
        }
        g
    }

    /// H = H_s + Σ_i strength_i (eta_i A_i + eta_i* A_i†) on the full space.
    pub fn assemble_h(&self, eta: &[C64]) -> Result<ComplexMatrix> {
        let mut h = self.static_dense()?;
        for term in &self.couplings {
            let e = *eta.get(term.noise_label).ok_or(Error::MissingNoiseSample(term.noise_label))?;
            let a = term.op.dense(&self.topo)?;
            h.axpy(e * term.strength, &a)?;
            h.axpy(e.conj() * term.strength, &a.dagger())?;
        }
        Ok(h)
    }
}

/// H_s = omega_s sigma_z / 2
pub fn build_two_level_hs(omega_s: f64) -> ComplexMatrix {
    ComplexMatrix::from_real_diag(&[omega_s / 2.0, -omega_s / 2.0])
}

/// H(t) = H_s + eta sigma+ + eta* sigma-, no auxiliary sites.
pub fn build_single_noise_model(omega_s: f64) -> NoiseModel {
    NoiseModel {
        name: "single_noise".into(),
        topo: ModelTopology::spins(0),
        h_central: build_two_level_hs(omega_s),
        couplings: vec![CouplingTerm {
            op: ProductOp::single(0, pauli::sigma_plus()),
            noise_label: 0,
            strength: 1.0,
            group: "bath".into(),
        }],
    }
}

/// Central spin model: H_s + Σ_i (eta_i s_i^- sigma+ + h.c.).
pub fn build_central_spin_model(omega_s: f64, topo: &ModelTopology) -> Result<NoiseModel> {
    if topo.central_dim() != 2 || topo.aux_dims().iter().any(|&d| d != 2) {
        return Err(Error::param("topology", "central spin model needs two-level sites only"));
    }
    let couplings = (1..=topo.n_aux())
        .map(|i| CouplingTerm {
            op: ProductOp::new(vec![(0, pauli::sigma_plus()), (i, pauli::sigma_minus())]).unwrap(),
            noise_label: i - 1,
            strength: 1.0,
            group: "bath".into(),
        })
        .collect();
    Ok(NoiseModel {
        name: format!("central_spin_n{}", topo.n_aux()),
        topo: topo.clone(),
        h_central: build_two_level_hs(omega_s),
        couplings,
    })
}

/// diag(0, E_H - E_C, E_H)
pub fn build_negative_temp_hs(e_h: f64, e_c: f64) -> ComplexMatrix {
    ComplexMatrix::from_real_diag(&[0.0, e_h - e_c, e_h])
}

/// Three-level system coupled to a hot (|1>↔|3>) and a cold (|2>↔|3>) set of
/// two-level auxiliaries. Sites 1..=m_h belong to the hot bath, the next m_c to
/// the cold one. Each term is eta s^- L_X† with L_H = |1><3|, L_C = |2><3|.
pub fn build_negative_temp_model(e_h: f64, e_c: f64, m_h: usize, m_c: usize) -> Result<NoiseModel> {
    if !(e_h > e_c && e_c > 0.0 && e_h.is_finite()) {
        return Err(Error::param("energies", format!("need E_H > E_C > 0, got E_H = {e_h}, E_C = {e_c}")));
    }
    let topo = ModelTopology::new(3, vec![2; m_h + m_c])?;
    let l_dag = |x: &str| match x {
        "H" => ComplexMatrix::transition(2, 0, 3),
        _ => ComplexMatrix::transition(2, 1, 3),
    };
    let mut couplings = Vec::new();
    for (k, site) in (1..=m_h + m_c).enumerate() {
        let group = if site <= m_h { "H" } else { "C" };
        couplings.push(CouplingTerm {
            op: ProductOp::new(vec![(0, l_dag(group)), (site, pauli::sigma_minus())])?,
            noise_label: k,
            strength: 1.0,
            group: group.into(),
        });
    }
    Ok(NoiseModel {
        name: "negative_temperature".into(),
        topo,
        h_central: build_negative_temp_hs(e_h, e_c),
        couplings,
    })
}

/// Level pairs (p, q), p > q, in 0-based indices: (2,1), (3,2), (3,1).
pub const QUENCH_PAIRS: [(usize, usize); 3] = [(1, 0), (2, 1), (2, 0)];

pub fn quench_group(pair: (usize, usize)) -> String {
    format!("{}{}", pair.0 + 1, pair.1 + 1)
}

/// Three-level system with three-level auxiliaries, `m_pq[k]` of them attached
/// to pair `QUENCH_PAIRS[k]`; each term is eta L~_{i,pq} L_pq with
/// L_pq = |p><q| on both the auxiliary and the central system.
pub fn build_quench_model(e2: f64, e3: f64, m_pq: [usize; 3]) -> Result<NoiseModel> {
    if !(e2.is_finite() && e3.is_finite()) {
        return Err(Error::param("energies", "must be finite"));
    }
    let n_aux: usize = m_pq.iter().sum();
    let topo = ModelTopology::new(3, vec![3; n_aux])?;
    let mut couplings = Vec::new();
    let mut site = 1;
    for (k, &(p, q)) in QUENCH_PAIRS.iter().enumerate() {
        for _ in 0..m_pq[k] {
            couplings.push(CouplingTerm {
                op: ProductOp::new(vec![
                    (0, ComplexMatrix::transition(p, q, 3)),
                    (site, ComplexMatrix::transition(p, q, 3)),
                ])?,
                noise_label: site - 1,
                strength: 1.0,
                group: quench_group((p, q)),
            });
            site += 1;
        }
    }
    Ok(NoiseModel {
        name: "quench".into(),
        topo,
        h_central: ComplexMatrix::from_real_diag(&[0.0, e2, e3]),
        couplings,
    })
}

/// Initial condition of one auxiliary site.
#[derive(Clone, Debug, PartialEq)]
pub enum AuxInit {
    /// sqrt(p)|+> + sqrt(1-p)|-> on a two-level site.
    Excitation(f64),
    /// Arbitrary local pure state (normalized on use).
    State(StateVector),
}

#[derive(Clone, Debug, PartialEq)]
pub struct InitialStateSpec {
    pub central: StateVector,
    pub aux: Vec<AuxInit>,
}

impl InitialStateSpec {
    /// Central state with each two-level auxiliary at excitation probability p_i.
    pub fn with_excitations(central: StateVector, probs: &[f64]) -> Self {
        Self {
            central,
            aux: probs.iter().map(|&p| AuxInit::Excitation(p)).collect(),
        }
    }

    /// Normalized local states, central first.
    pub fn local_states(&self, topo: &ModelTopology) -> Result<Vec<StateVector>> {
        if self.aux.len() != topo.n_aux() {
            return Err(Error::param(
                "aux",
                format!("expected {} auxiliary states, got {}", topo.n_aux(), self.aux.len()),
            ));
        }
        if self.central.dim() != topo.central_dim() {
            return Err(Error::param("central", "dimension does not match the central site"));
        }
        let mut out = vec![self.central.normalized()?];
        for (i, a) in self.aux.iter().enumerate() {
            let d = topo.aux_dims()[i];
            let v = match a {
                AuxInit::Excitation(p) => {
                    if !(0.0..=1.0).contains(p) || d != 2 {
                        return Err(Error::param(
                            format!("aux[{i}]"),
                            format!("excitation probability {p} invalid for a {d}-level site"),
                        ));
                    }
                    StateVector::new(vec![C64::new(p.sqrt(), 0.0), C64::new((1.0 - p).sqrt(), 0.0)])
                }
                AuxInit::State(s) => {
                    if s.dim() != d {
                        return Err(Error::param(format!("aux[{i}]"), "dimension mismatch"));
                    }
                    s.normalized()?
                }
            };
            out.push(v);
        }
        Ok(out)
    }

    /// <sigma+ sigma-> + Σ p_i for two-level topologies.
    pub fn expected_n_plus(&self) -> f64 {
        let c = self.central.normalized().map(|s| s.amps()[0].norm_sqr()).unwrap_or(0.0);
        c + self
            .aux
            .iter()
            .map(|a| match a {
                AuxInit::Excitation(p) => *p,
                AuxInit::State(s) => s.normalized().map(|s| s.amps()[0].norm_sqr()).unwrap_or(0.0),
            })
            .sum::<f64>()
    }
}

/// Dense product state on the full space.
pub fn initial_product_state(spec: &InitialStateSpec, topo: &ModelTopology) -> Result<StateVector> {
    let locals = spec.local_states(topo)?;
    Ok(locals[1..].iter().fold(locals[0].clone(), |acc, s| acc.kron(s)))
}

/// Classical mixture of product states, e.g. a diagonal thermal state of the
/// central system with level-dependent auxiliary preparations.
#[derive(Clone, Debug, PartialEq)]
pub struct InitialEnsemble {
    pub components: Vec<(f64, InitialStateSpec)>,
}

impl InitialEnsemble {
    pub fn pure(spec: InitialStateSpec) -> Self {
        Self {
            components: vec![(1.0, spec)],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.components.is_empty() {
            return Err(Error::param("initial", "at least one component is required"));
        }
        let total: f64 = self.components.iter().map(|(w, _)| *w).sum();
        if self.components.iter().any(|(w, _)| *w < 0.0) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::param("initial", format!("weights must be non-negative and sum to 1, got {total}")));
        }
        Ok(())
    }
}

/// sigma+ sigma- + Σ s_i^+ s_i^-
pub fn n_plus_sum(topo: &ModelTopology) -> OperatorSum {
    let up = ComplexMatrix::transition(0, 0, 2);
    (0..topo.n_sites()).fold(OperatorSum::new(), |acc, s| acc.with(1.0, ProductOp::single(s, up.clone())))
}

/// sigma- sigma+ + Σ s_i^- s_i^+
pub fn n_minus_sum(topo: &ModelTopology) -> OperatorSum {
    let down = ComplexMatrix::transition(1, 1, 2);
    (0..topo.n_sites()).fold(OperatorSum::new(), |acc, s| acc.with(1.0, ProductOp::single(s, down.clone())))
}

/// Expectations of the two conserved excitation counts.
pub fn compute_n_pm(state: &StateVector, topo: &ModelTopology) -> Result<(f64, f64)> {
    if topo.site_dims().iter().any(|&d| d != 2) {
        return Err(Error::param("topology", "excitation counts need two-level sites"));
    }
    let expect = |op: &ComplexMatrix| -> Result<f64> {
        let v = crate::numkernel::apply(op, state)?;
        Ok(state.inner(&v).re)
    };
    Ok((expect(&n_plus_sum(topo).dense(topo)?)?, expect(&n_minus_sum(topo).dense(topo)?)?))
}

/// Σ_i s_{X,i}^- s_{X,i}^+ + L_X L_X† for bath `group` of the negative-temperature model.
pub fn negative_temp_conserved(model: &NoiseModel, group: &str) -> OperatorSum {
    let level = if group == "H" { 0 } else { 1 };
    let mut sum = OperatorSum::new().with(1.0, ProductOp::single(0, ComplexMatrix::transition(level, level, 3)));
    for c in model.couplings.iter().filter(|c| c.group == group) {
        let site = c.op.factors().iter().find(|(s, _)| *s != 0).unwrap().0;
        sum = sum.with(1.0, ProductOp::single(site, ComplexMatrix::transition(1, 1, 2)));
    }
    sum
}

/// Candidate conserved combinations for pair `pair` of the quench model:
/// Σ_i L~_{i,pq} L~_{i,pq}† + sign · L_pq L_pq†.
pub fn quench_pair_candidate(model: &NoiseModel, pair: (usize, usize), sign: f64) -> OperatorSum {
    let p = pair.0;
    let group = quench_group(pair);
    let mut sum = OperatorSum::new().with(sign, ProductOp::single(0, ComplexMatrix::transition(p, p, 3)));
    for c in model.couplings.iter().filter(|c| c.group == group) {
        let site = c.op.factors().iter().find(|(s, _)| *s != 0).unwrap().0;
        sum = sum.with(1.0, ProductOp::single(site, ComplexMatrix::transition(p, p, 3)));
    }
    sum
}

/// Level height of the central system minus the excitations stored in the
/// auxiliaries: |2><2| + 2|3><3| - n_21 - n_32 - 2 n_31, where n_pq counts
/// pair-pq auxiliaries in their upper level p. Conserved by every term.
pub fn quench_height_invariant(model: &NoiseModel) -> OperatorSum {
    let mut sum = OperatorSum::new()
        .with(1.0, ProductOp::single(0, ComplexMatrix::transition(1, 1, 3)))
        .with(2.0, ProductOp::single(0, ComplexMatrix::transition(2, 2, 3)));
    for c in &model.couplings {
        let (site, m) = c.op.factors().iter().find(|(s, _)| *s != 0).unwrap();
        // The auxiliary factor is |p><q|; its upper level is the row index.
        let (p, q) = (0..3)
            .flat_map(|r| (0..3).map(move |col| (r, col)))
            .find(|&(r, col)| m[(r, col)] != ZERO)
            .unwrap();
        sum = sum.with(-((p - q) as f64), ProductOp::single(*site, ComplexMatrix::transition(p, p, 3)));
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::{commutator, StateVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_eta(rng: &mut impl Rng, n: usize) -> Vec<C64> {
        (0..n).map(|_| C64::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0))).collect()
    }

    #[test]
    fn embed_cases() {
        let topo = ModelTopology::spins(1);
        let z0 = embed_site_op(&pauli::sigma_z(), 0, &topo).unwrap();
        assert_eq!(z0, kron(&pauli::sigma_z(), &ComplexMatrix::identity(2)));
        let topo3 = ModelTopology::new(3, vec![2, 3]).unwrap();
        for site in 0..3 {
            let d = topo3.site_dim(site).unwrap();
            let id = embed_site_op(&ComplexMatrix::identity(d), site, &topo3).unwrap();
            assert_eq!(id, ComplexMatrix::identity(18));
        }
        let topo2 = ModelTopology::spins(2);
        let a = embed_site_op(&pauli::sigma_plus(), 1, &topo2).unwrap();
        let b = embed_site_op(&pauli::sigma_minus(), 2, &topo2).unwrap();
        assert_eq!(commutator(&a, &b).unwrap().max_abs(), 0.0);
        assert!(matches!(
            embed_site_op(&pauli::sigma_z(), 3, &topo2),
            Err(Error::SiteOutOfRange { .. })
        ));
        assert!(embed_site_op(&ComplexMatrix::identity(3), 1, &topo2).is_err());
    }

    #[test]
    fn two_level_hs() {
        assert_eq!(build_two_level_hs(0.0).max_abs(), 0.0);
        let h = build_two_level_hs(0.1);
        assert_eq!(h.diag_real(), vec![0.05, -0.05]);
        assert_eq!(h[(0, 1)], ZERO);
    }

    #[test]
    fn single_noise_model_hamiltonian() {
        let m = build_single_noise_model(0.3);
        assert_eq!(m.assemble_h(&[ZERO]).unwrap(), build_two_level_hs(0.3));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let h = m.assemble_h(&random_eta(&mut rng, 1)).unwrap();
            assert!(h.hermiticity_error() < 1e-14);
        }
    }

    #[test]
    fn central_spin_n1_matches_single_noise_in_sector() {
        let m = build_central_spin_model(0.4, &ModelTopology::spins(1)).unwrap();
        assert_eq!(m.couplings.len(), 1);
        let single = build_single_noise_model(0.4);
        let eta = [C64::new(0.7, -1.1)];
        let h = m.assemble_h(&eta).unwrap();
        let hs = single.assemble_h(&eta).unwrap();
        // Sector N+ = 1: |+,-> (index 1) plays |+>, |-,+> (index 2) plays |->.
        let idx = [1, 2];
        for r in 0..2 {
            for c in 0..2 {
                assert!((h[(idx[r], idx[c])] - hs[(r, c)]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn central_spin_conserves_excitations() {
        let topo = ModelTopology::spins(2);
        assert_eq!(topo.total_dim(), 8);
        let m = build_central_spin_model(0.1, &topo).unwrap();
        let n_plus = n_plus_sum(&topo).dense(&topo).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let h = m.assemble_h(&random_eta(&mut rng, 2)).unwrap();
            assert!(commutator(&h, &n_plus).unwrap().max_abs() < 1e-14);
            let psi = StateVector::new((0..8).map(|_| C64::new(rng.random(), rng.random())).collect())
                .normalized()
                .unwrap();
            let e = psi.inner(&crate::numkernel::apply(&h, &psi).unwrap());
            assert!(e.im.abs() < 1e-12);
        }
        assert!(build_central_spin_model(0.1, &ModelTopology::new(2, vec![3]).unwrap()).is_err());
    }

    #[test]
    fn assemble_h_cases() {
        let topo = ModelTopology::spins(2);
        let m = build_central_spin_model(0.2, &topo).unwrap();
        let h0 = m.assemble_h(&[ZERO, ZERO]).unwrap();
        assert_eq!(h0, embed_site_op(&build_two_level_hs(0.2), 0, &topo).unwrap());
        assert!(matches!(m.assemble_h(&[ZERO]), Err(Error::MissingNoiseSample(1))));
    }

    #[test]
    fn initial_states_and_counts() {
        let topo = ModelTopology::spins(2);
        let spec = InitialStateSpec::with_excitations(pauli::up(), &[0.0, 0.0]);
        let psi = initial_product_state(&spec, &topo).unwrap();
        assert_eq!(psi, pauli::up().kron(&pauli::down()).kron(&pauli::down()));
        assert_eq!(compute_n_pm(&psi, &topo).unwrap(), (1.0, 2.0));

        let flipped = InitialStateSpec::with_excitations(pauli::up(), &[1.0, 0.0]);
        let (np, _) = compute_n_pm(&initial_product_state(&flipped, &topo).unwrap(), &topo).unwrap();
        assert!((np - 2.0).abs() < 1e-12);

        let half = InitialStateSpec::with_excitations(pauli::up(), &[0.5, 0.0]);
        let (np, nm) = compute_n_pm(&initial_product_state(&half, &topo).unwrap(), &topo).unwrap();
        assert!((np - 1.5).abs() < 1e-12 && (np + nm - 3.0).abs() < 1e-10);
        assert!((half.expected_n_plus() - 1.5).abs() < 1e-12);

        let topo3 = ModelTopology::spins(3);
        let all_down = InitialStateSpec::with_excitations(pauli::down(), &[0.0; 3]);
        let psi = initial_product_state(&all_down, &topo3).unwrap();
        assert_eq!(compute_n_pm(&psi, &topo3).unwrap(), (0.0, 4.0));

        // N+ = 1.75 with N = 2
        let frac = InitialStateSpec::with_excitations(pauli::up(), &[0.375, 0.375]);
        let (np, nm) = compute_n_pm(&initial_product_state(&frac, &topo).unwrap(), &topo).unwrap();
        assert!((np - 1.75).abs() < 1e-12 && (nm - 1.25).abs() < 1e-12);

        let bad = InitialStateSpec::with_excitations(pauli::up(), &[1.2, 0.0]);
        assert!(initial_product_state(&bad, &topo).is_err());
    }

    #[test]
    fn negative_temp_model_structure() {
        let hs = build_negative_temp_hs(2.0, 2.0);
        assert_eq!(hs.diag_real(), vec![0.0, 0.0, 2.0]);
        assert!(build_negative_temp_model(1.0, 2.0, 1, 1).is_err());
        let m = build_negative_temp_model(2.0, 1.0, 2, 1).unwrap();
        assert_eq!(m.topo.total_dim(), 3 * 8);
        let h0 = m.assemble_h(&[ZERO; 3]).unwrap();
        assert_eq!(m.h_central.diag_real(), vec![0.0, 1.0, 2.0]);
        assert!(h0.hermiticity_error() == 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cons: Vec<ComplexMatrix> =
            ["H", "C"].iter().map(|g| negative_temp_conserved(&m, g).dense(&m.topo).unwrap()).collect();
        for _ in 0..10 {
            let h = m.assemble_h(&random_eta(&mut rng, 3)).unwrap();
            for c in &cons {
                assert!(commutator(&h, c).unwrap().max_abs() < 1e-13);
            }
        }
    }

    #[test]
    fn quench_model_structure() {
        let empty = build_quench_model(1.0, 2.5, [0, 0, 0]).unwrap();
        assert_eq!(empty.assemble_h(&[]).unwrap(), ComplexMatrix::from_real_diag(&[0.0, 1.0, 2.5]));
        let m = build_quench_model(1.0, 2.5, [1, 1, 1]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let inv = quench_height_invariant(&m).dense(&m.topo).unwrap();
        for _ in 0..5 {
            let h = m.assemble_h(&random_eta(&mut rng, 3)).unwrap();
            assert!(h.hermiticity_error() < 1e-14);
            assert!(commutator(&h, &inv).unwrap().max_abs() < 1e-13);
        }
    }

    #[test]
    fn quench_pair_combination_carries_minus_sign() {
        // One active pair: only the difference of auxiliary and central
        // occupations of the upper level is conserved.
        let m = build_quench_model(1.0, 2.5, [2, 0, 0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let minus = quench_pair_candidate(&m, QUENCH_PAIRS[0], -1.0).dense(&m.topo).unwrap();
        let plus = quench_pair_candidate(&m, QUENCH_PAIRS[0], 1.0).dense(&m.topo).unwrap();
        let h = m.assemble_h(&random_eta(&mut rng, 2)).unwrap();
        assert!(commutator(&h, &minus).unwrap().max_abs() < 1e-13);
        assert!(commutator(&h, &plus).unwrap().max_abs() > 1e-3);
    }
}
