// Copyright 2026 The noisebath Authors
// SPDX-License-Identifier: Apache-2.0

//! Restriction to the invariant subspace reachable from an initial state.
//!
//! The static Hamiltonian is diagonal in the product basis and every coupling
//! maps product-basis states to product-basis states, so the subspace spanned
//! by the basis states reachable from the initial support is invariant under
//! every noise realization. Its connected components are the conserved
//! excitation sectors.

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::numkernel::{ComplexMatrix, C64, ZERO};

use super::{InitialStateSpec, ModelTopology, NoiseModel, OperatorSum, ProductOp};

/// Mixed-radix indexing of the product basis, site 0 most significant.
#[derive(Clone, Debug)]
pub struct ProductBasis {
    dims: Vec<usize>,
    strides: Vec<usize>,
}

impl ProductBasis {
    pub fn new(topo: &ModelTopology) -> Self {
        let dims = topo.site_dims();
        let mut strides = vec![1; dims.len()];
        for s in (0..dims.len().saturating_sub(1)).rev() {
            strides[s] = strides[s + 1] * dims[s + 1];
        }
        Self { dims, strides }
    }

    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        self.strides
            .iter()
            .map(|&s| {
                let d = index / s;
                index %= s;
                d
            })
            .collect()
    }

    pub fn index(&self, digits: &[usize]) -> usize {
        digits.iter().zip(&self.strides).map(|(d, s)| d * s).sum()
    }
}

/// Sparse operator on a reduced space, as (row, col, value) triplets.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseOp {
    pub dim: usize,
    pub entries: Vec<(usize, usize, C64)>,
}

impl SparseOp {
    pub fn dagger(&self) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|&(r, c, v)| (c, r, v.conj())).collect(),
        }
    }

    pub fn to_dense(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.dim, self.dim);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }

    /// y += s * A x
    #[inline]
    pub fn apply_add(&self, s: C64, x: &[C64], y: &mut [C64]) {
        for &(r, c, v) in &self.entries {
            y[r] += s * v * x[c];
        }
    }

    /// <x|A|x>
    pub fn expectation(&self, x: &[C64]) -> C64 {
        self.entries.iter().map(|&(r, c, v)| x[r].conj() * v * x[c]).sum()
    }

    pub fn is_diagonal(&self) -> bool {
        self.entries.iter().all(|&(r, c, _)| r == c)
    }
}

/// Invariant subspace spanned by a set of product-basis states.
#[derive(Clone, Debug)]
pub struct ReducedSpace {
    pub basis: ProductBasis,
    /// Full-space indices, ascending.
    pub states: Vec<usize>,
    /// Connected components, as positions into `states`.
    pub blocks: Vec<Vec<usize>>,
    position: HashMap<usize, usize>,
}

impl ReducedSpace {
    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn position(&self, full_index: usize) -> Option<usize> {
        self.position.get(&full_index).copied()
    }

    pub fn block_dims(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.len()).collect()
    }

    /// Restriction of a product operator to this space (entries whose row and
    /// column both lie inside).
    pub fn restrict(&self, op: &ProductOp) -> SparseOp {
        let mut entries = Vec::new();
        for (col, &full) in self.states.iter().enumerate() {
            let digits = self.basis.digits(full);
            for (row_digits, v) in op.column(&digits) {
                if let Some(row) = self.position(self.basis.index(&row_digits)) {
                    entries.push((row, col, v));
                }
            }
        }
        SparseOp {
            dim: self.dim(),
            entries,
        }
    }

    pub fn restrict_sum(&self, sum: &OperatorSum) -> SparseOp {
        let mut merged: HashMap<(usize, usize), C64> = HashMap::new();
        for (coeff, op) in &sum.terms {
            for (r, c, v) in self.restrict(op).entries {
                *merged.entry((r, c)).or_insert(ZERO) += coeff * v;
            }
        }
        let mut entries: Vec<(usize, usize, C64)> =
            merged.into_iter().filter(|(_, v)| *v != ZERO).map(|((r, c), v)| (r, c, v)).collect();
        entries.sort_by_key(|&(r, c, _)| (r, c));
        SparseOp {
            dim: self.dim(),
            entries,
        }
    }

    /// Amplitudes of a product state on this space. Fails if the state has
    /// weight outside the space.
    pub fn product_state(&self, spec: &InitialStateSpec, topo: &ModelTopology) -> Result<Vec<C64>> {
        let locals = spec.local_states(topo)?;
        let amps: Vec<C64> = self
            .states
            .iter()
            .map(|&full| {
                self.basis
                    .digits(full)
                    .iter()
                    .zip(&locals)
                    .map(|(&d, s)| s.amps()[d])
                    .product()
            })
            .collect();
        let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::param(
                "initial",
                format!("state carries weight {:.3e} outside the reduced space", 1.0 - norm),
            ));
        }
        Ok(amps)
    }
}

/// Full-space indices with nonzero amplitude in the product state.
pub fn product_support(spec: &InitialStateSpec, topo: &ModelTopology) -> Result<Vec<usize>> {
    let locals = spec.local_states(topo)?;
    let basis = ProductBasis::new(topo);
    let mut out = vec![Vec::<usize>::new()];
    for s in &locals {
        let nz: Vec<usize> = (0..s.dim()).filter(|&k| s.amps()[k] != ZERO).collect();
        out = out
            .into_iter()
            .flat_map(|d| {
                nz.iter().map(move |&k| {
                    let mut nd = d.clone();
                    nd.push(k);
                    nd
                })
            })
            .collect();
    }
    Ok(out.iter().map(|d| basis.index(d)).collect())
}

/// Closure of `seeds` under the model's couplings and their adjoints.
pub fn reachable_space(model: &NoiseModel, seeds: &[usize]) -> Result<ReducedSpace> {
    if !model.h_central.is_square() || (0..model.h_central.rows()).any(|r| {
        (0..model.h_central.cols()).any(|c| r != c && model.h_central[(r, c)] != ZERO)
    }) {
        return Err(Error::param("h_central", "sector restriction needs a diagonal static Hamiltonian"));
    }
    let basis = ProductBasis::new(&model.topo);
    let dim = basis.dim();
    if let Some(&bad) = seeds.iter().find(|&&s| s >= dim) {
        return Err(Error::param("seeds", format!("basis index {bad} out of range")));
    }
    let ops: Vec<ProductOp> = model
        .couplings
        .iter()
        .flat_map(|c| [c.op.clone(), c.op.dagger()])
        .collect();

    let mut visited: BTreeSet<usize> = BTreeSet::new();
    let mut components: Vec<Vec<usize>> = Vec::new();
    for &seed in seeds {
        if visited.contains(&seed) {
            continue;
        }
        let mut comp = vec![seed];
        visited.insert(seed);
        let mut queue = VecDeque::from([seed]);
        while let Some(cur) = queue.pop_front() {
            let digits = basis.digits(cur);
            for op in &ops {
                for (row, _) in op.column(&digits) {
                    let idx = basis.index(&row);
                    if visited.insert(idx) {
                        comp.push(idx);
                        queue.push_back(idx);
                    }
                }
            }
        }
        components.push(comp);
    }
    let states: Vec<usize> = visited.into_iter().collect();
    let position: HashMap<usize, usize> = states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let blocks = components
        .into_iter()
        .map(|c| {
            let mut b: Vec<usize> = c.iter().map(|s| position[s]).collect();
            b.sort_unstable();
            b
        })
        .collect();
    Ok(ReducedSpace {
        basis,
        states,
        blocks,
        position,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_central_spin_model, build_negative_temp_model, n_plus_sum, InitialStateSpec};
    use crate::numkernel::pauli;

    #[test]
    fn digits_round_trip() {
        let topo = ModelTopology::new(3, vec![2, 3, 2]).unwrap();
        let b = ProductBasis::new(&topo);
        assert_eq!(b.dim(), 36);
        for i in 0..36 {
            assert_eq!(b.index(&b.digits(i)), i);
        }
    }

    #[test]
    fn central_spin_sector_dimension() {
        for n in [2usize, 3, 5] {
            let topo = ModelTopology::spins(n);
            let model = build_central_spin_model(0.1, &topo).unwrap();
            let spec = InitialStateSpec::with_excitations(pauli::up(), &vec![0.0; n]);
            let support = product_support(&spec, &topo).unwrap();
            let space = reachable_space(&model, &support).unwrap();
            // N+ = 1 sector: C(N+1, 1)
            assert_eq!(space.dim(), n + 1);
            let amps = space.product_state(&spec, &topo).unwrap();
            assert!((amps.iter().map(|z| z.norm_sqr()).sum::<f64>() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn superposition_splits_into_blocks() {
        let topo = ModelTopology::spins(2);
        let model = build_central_spin_model(0.1, &topo).unwrap();
        let spec = InitialStateSpec::with_excitations(pauli::up(), &[0.5, 0.3]);
        let space = reachable_space(&model, &product_support(&spec, &topo).unwrap()).unwrap();
        assert_eq!(space.dim(), 7);
        let mut dims = space.block_dims();
        dims.sort();
        assert_eq!(dims, vec![1, 3, 3]);
    }

    #[test]
    fn restricted_hamiltonian_is_block_diagonal_in_sectors() {
        let topo = ModelTopology::spins(3);
        let model = build_central_spin_model(0.3, &topo).unwrap();
        let all: Vec<usize> = (0..topo.total_dim()).collect();
        let space = reachable_space(&model, &all).unwrap();
        assert_eq!(space.dim(), 16);
        let n_plus = space.restrict_sum(&n_plus_sum(&topo));
        assert!(n_plus.is_diagonal());
        let counts: Vec<f64> = (0..16).map(|i| n_plus.to_dense()[(i, i)].re).collect();
        for c in &model.couplings {
            for (r, col, v) in space.restrict(&c.op).entries {
                assert!(v != ZERO);
                assert_eq!(counts[r], counts[col]);
            }
        }
    }

    #[test]
    fn negative_temp_sector_dimension() {
        let model = build_negative_temp_model(2.0, 1.0, 2, 3).unwrap();
        // Central |1>, one hot auxiliary down, all cold auxiliaries down.
        let up = pauli::up();
        let down = pauli::down();
        let aux: Vec<_> = [up.clone(), down.clone(), down.clone(), down.clone(), down.clone()]
            .into_iter()
            .map(crate::models::AuxInit::State)
            .collect();
        let spec = InitialStateSpec {
            central: crate::numkernel::StateVector::basis(3, 0),
            aux,
        };
        let space = reachable_space(&model, &product_support(&spec, &model.topo).unwrap()).unwrap();
        assert_eq!(space.dim(), 6);
    }
}
