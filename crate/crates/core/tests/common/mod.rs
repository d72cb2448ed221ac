//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use evoprep::{Gate, StateVector};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C = Complex64;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// Single-qubit matrix written out from the gate definitions.
pub fn oracle_1q(g: &Gate) -> DMatrix<C> {
    match *g {
        Gate::Rz { theta, .. } => {
            let t = theta.radians() / 2.0;
            DMatrix::from_row_slice(2, 2, &[C::from_polar(1.0, -t), c(0.0, 0.0), c(0.0, 0.0), C::from_polar(1.0, t)])
        }
        Gate::X { .. } => DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]),
        Gate::Sx { .. } => DMatrix::from_row_slice(2, 2, &[c(0.5, 0.5), c(0.5, -0.5), c(0.5, -0.5), c(0.5, 0.5)]),
        Gate::Cx { .. } => unreachable!(),
    }
}

/// Full 2^n unitary: I ⊗ … ⊗ U ⊗ … ⊗ I with qubit 0 as the rightmost
/// factor, or the CX permutation matrix.
pub fn oracle_unitary(g: &Gate, n: usize) -> DMatrix<C> {
    let dim = 1 << n;
    if let Gate::Cx { control, target } = *g {
        let mut m = DMatrix::zeros(dim, dim);
        for col in 0..dim {
            let row = if col >> control & 1 == 1 { col ^ (1 << target) } else { col };
            m[(row, col)] = c(1.0, 0.0);
        }
        return m;
    }
    let q = g.qubits().iter().next().unwrap();
    let mut m = DMatrix::from_element(1, 1, c(1.0, 0.0));
    for k in (0..n).rev() {
        let factor = if k == q { oracle_1q(g) } else { DMatrix::identity(2, 2) };
        m = m.kronecker(&factor);
    }
    m
}

pub fn to_vec(s: &StateVector) -> DVector<C> {
    DVector::from_column_slice(s.amplitudes())
}

pub fn overlap(a: &DVector<C>, b: &DVector<C>) -> f64 {
    a.dotc(b).norm_sqr()
}

/// Ranks by repeatedly removing the set of points nobody remaining dominates.
pub fn strip_mining_ranks(fits: &[(u64, f64)]) -> Vec<usize> {
    let dom = |a: (u64, f64), b: (u64, f64)| a.1 >= b.1 && a.0 <= b.0 && (a.1 > b.1 || a.0 < b.0);
    let mut rank = vec![0; fits.len()];
    let mut remaining: Vec<usize> = (0..fits.len()).collect();
    let mut r = 1;
    while !remaining.is_empty() {
        let layer: Vec<usize> = remaining
            .iter()
            .copied()
            .filter(|&i| !remaining.iter().any(|&j| dom(fits[j], fits[i])))
            .collect();
        for &i in &layer {
            rank[i] = r;
        }
        remaining.retain(|i| !layer.contains(i));
        r += 1;
    }
    rank
}
