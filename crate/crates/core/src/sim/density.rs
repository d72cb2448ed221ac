use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::statevector::{apply_1q, apply_cx, circuit_fidelity, gate_matrix, Matrix2, StateVector};
use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};

/// Largest register simulated with a density matrix. Wider circuits use
/// [`predicted_noisy_fidelity`].
pub const MAX_DENSITY_QUBITS: usize = 10;

/// Depolarizing probabilities per gate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub p1: f64,
    pub p2: f64,
}

impl NoiseModel {
    pub const DEFAULT_P2: f64 = 0.0088;
    pub const DEFAULT_P1: f64 = Self::DEFAULT_P2 / 10.0;

    pub fn new(p1: f64, p2: f64) -> Result<Self> {
        for (name, p) in [("p1", p1), ("p2", p2)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Domain(format!("{name} = {p} is not a probability")));
            }
        }
        Ok(Self { p1, p2 })
    }

    pub fn noiseless() -> Self {
        Self { p1: 0.0, p2: 0.0 }
    }

    fn for_gate(&self, gate: &Gate) -> f64 {
        if gate.is_two_qubit() {
            self.p2
        } else {
            self.p1
        }
    }
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self { p1: Self::DEFAULT_P1, p2: Self::DEFAULT_P2 }
    }
}

/// Mixed state stored row-major. Element (r, c) sits at `r * dim + c`, so row
/// qubit `q` is bit `q + n` of the flat index and column qubit `q` is bit `q`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn from_pure(s: &StateVector) -> Self {
        let a = s.amplitudes();
        let mut data = Vec::with_capacity(a.len() * a.len());
        for r in a {
            data.extend(a.iter().map(|c| r * c.conj()));
        }
        Self { n_qubits: s.n_qubits(), data }
    }

    pub fn zero_state(n_qubits: usize) -> Self {
        Self::from_pure(&StateVector::zero(n_qubits))
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim() + col]
    }

    /// Row-major entries.
    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    /// ⟨s|ρ|s⟩.
    pub fn expectation(&self, s: &StateVector) -> Result<f64> {
        if s.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: s.dim() });
        }
        let a = s.amplitudes();
        let dim = self.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for (r, ar) in a.iter().enumerate() {
            let row = &self.data[r * dim..(r + 1) * dim];
            let inner: Complex64 = row.iter().zip(a).map(|(x, ac)| x * ac).sum();
            acc += ar.conj() * inner;
        }
        Ok(acc.re)
    }

    /// Largest |ρ − ρ†| entry.
    pub fn hermiticity_error(&self) -> f64 {
        let dim = self.dim();
        let mut worst = 0.0f64;
        for r in 0..dim {
            for c in r..dim {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    /// ρ → UρU†.
    pub fn apply_gate(&mut self, gate: &Gate) {
        let n = self.n_qubits;
        match *gate {
            Gate::Cx { control, target } => {
                apply_cx(&mut self.data, control + n, target + n);
                apply_cx(&mut self.data, control, target);
            }
            Gate::Rz { qubit, .. } | Gate::X { qubit } | Gate::Sx { qubit } => {
                let m = gate_matrix(gate).expect("single-qubit");
                let mc: Matrix2 = [[m[0][0].conj(), m[0][1].conj()], [m[1][0].conj(), m[1][1].conj()]];
                apply_1q(&mut self.data, qubit + n, &m);
                apply_1q(&mut self.data, qubit, &mc);
            }
        }
    }

    /// ρ → (1−p)ρ + p·Tr_S(ρ)⊗I/d on the qubits `support`.
    pub fn depolarize(&mut self, support: &[usize], p: f64) {
        if p == 0.0 {
            return;
        }
        let n = self.n_qubits;
        let k = support.len();
        let d = 1usize << k;
        let mut row_bits = Vec::with_capacity(k);
        let mut col_bits = Vec::with_capacity(k);
        for &q in support {
            row_bits.push(1usize << (q + n));
            col_bits.push(1usize << q);
        }
        let mask: usize = row_bits.iter().chain(&col_bits).sum();
        let offset = |bits: &[usize], v: usize| -> usize {
            bits.iter().enumerate().filter(|(i, _)| v >> i & 1 == 1).map(|(_, b)| b).sum()
        };
        let row_off: Vec<usize> = (0..d).map(|v| offset(&row_bits, v)).collect();
        let col_off: Vec<usize> = (0..d).map(|v| offset(&col_bits, v)).collect();
        let keep = 1.0 - p;
        for base in 0..self.data.len() {
            if base & mask != 0 {
                continue;
            }
            let mut tr = Complex64::new(0.0, 0.0);
            for v in 0..d {
                tr += self.data[base | row_off[v] | col_off[v]];
            }
            let mixed = tr * (p / d as f64);
            for a in 0..d {
                for b in 0..d {
                    let idx = base | row_off[a] | col_off[b];
                    self.data[idx] *= keep;
                    if a == b {
                        self.data[idx] += mixed;
                    }
                }
            }
        }
    }
}

/// Runs `c` from |00…0⟩⟨00…0|, following every gate with a depolarizing
/// channel on its qubits.
pub fn apply_noisy(c: &Circuit, noise: &NoiseModel) -> Result<DensityMatrix> {
    if c.n_qubits() > MAX_DENSITY_QUBITS {
        return Err(Error::Domain(format!(
            "density-matrix simulation limited to {MAX_DENSITY_QUBITS} qubits, got {}",
            c.n_qubits()
        )));
    }
    let mut rho = DensityMatrix::zero_state(c.n_qubits());
    for g in c.gates() {
        rho.apply_gate(g);
        let support: Vec<usize> = g.qubits().iter().collect();
        rho.depolarize(&support, noise.for_gate(g));
    }
    Ok(rho)
}

/// ⟨target|ρ|target⟩ for ρ = [`apply_noisy`]`(c, noise)`.
pub fn noisy_fidelity(c: &Circuit, target: &StateVector, noise: &NoiseModel) -> Result<f64> {
    if c.n_qubits() != target.n_qubits() {
        return Err(Error::DimensionMismatch { expected: target.n_qubits(), found: c.n_qubits() });
    }
    Ok(apply_noisy(c, noise)?.expectation(target)?.clamp(0.0, 1.0))
}

/// f·(1−p)^l.
pub fn predicted_noisy_fidelity(noiseless_f: f64, l: u64, p: f64) -> f64 {
    noiseless_f * (1.0 - p).powf(l as f64)
}

/// Density-matrix fidelity up to [`MAX_DENSITY_QUBITS`], otherwise the
/// prediction with l = CX count and p = p2.
pub fn evaluate_noisy(c: &Circuit, target: &StateVector, noise: &NoiseModel) -> Result<f64> {
    if c.n_qubits() <= MAX_DENSITY_QUBITS {
        noisy_fidelity(c, target, noise)
    } else {
        let f = circuit_fidelity(c, target)?;
        Ok(predicted_noisy_fidelity(f, c.cnot_count() as u64, noise.p2))
    }
}
