use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};

pub type Matrix2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Tolerance on the squared norm of a [`StateVector`].
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Pure state over `n` qubits. Amplitudes are in lexicographic basis order
/// with qubit 0 as the least significant bit.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// |00…0⟩.
    pub fn zero(n_qubits: usize) -> Self {
        let mut amps = vec![ZERO; 1 << n_qubits];
        amps[0] = ONE;
        Self { n_qubits, amps }
    }

    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let mut amps = vec![ZERO; 1 << n_qubits];
        amps[index] = ONE;
        Self { n_qubits, amps }
    }

    /// Wraps amplitudes after checking the length is a power of two and the
    /// squared norm is 1 within [`NORM_TOLERANCE`].
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let s = Self::from_amplitudes_unchecked(amps)?;
        let norm = s.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized(norm));
        }
        Ok(s)
    }

    /// Only checks the length; the norm may be anything.
    pub fn from_amplitudes_unchecked(amps: Vec<Complex64>) -> Result<Self> {
        if amps.is_empty() || !amps.len().is_power_of_two() {
            return Err(Error::Domain(format!("{} amplitudes is not a power of two", amps.len())));
        }
        let n_qubits = amps.len().trailing_zeros() as usize;
        Ok(Self { n_qubits, amps })
    }

    /// Rescales to unit norm. Fails on the zero vector.
    pub fn normalized(mut amps: Vec<Complex64>) -> Result<Self> {
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::NotNormalized(norm * norm));
        }
        for a in &mut amps {
            *a /= norm;
        }
        Self::from_amplitudes_unchecked(amps)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        self.check_dim(other.dim())?;
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    pub(crate) fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: dim });
        }
        Ok(())
    }

    pub fn apply_gate(&mut self, gate: &Gate) {
        apply_gate(&mut self.amps, gate);
    }

    pub fn apply_matrix(&mut self, qubit: usize, m: &Matrix2) {
        apply_1q(&mut self.amps, qubit, m);
    }

    pub fn apply_cx(&mut self, control: usize, target: usize) {
        apply_cx(&mut self.amps, control, target);
    }

    /// Relabels qubits: qubit `q` of `self` becomes qubit `perm[q]`.
    pub fn permute_qubits(&self, perm: &[usize]) -> StateVector {
        assert_eq!(perm.len(), self.n_qubits, "permutation length");
        let mut amps = vec![ZERO; self.dim()];
        for (i, &a) in self.amps.iter().enumerate() {
            let mut j = 0;
            for (q, &p) in perm.iter().enumerate() {
                j |= ((i >> q) & 1) << p;
            }
            amps[j] = a;
        }
        StateVector { n_qubits: self.n_qubits, amps }
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

/// Matrix of a single-qubit native gate.
pub fn gate_matrix(gate: &Gate) -> Option<Matrix2> {
    let h = 0.5;
    match *gate {
        Gate::Rz { theta, .. } => {
            let half = theta.radians() / 2.0;
            Some([[Complex64::from_polar(1.0, -half), ZERO], [ZERO, Complex64::from_polar(1.0, half)]])
        }
        Gate::X { .. } => Some([[ZERO, ONE], [ONE, ZERO]]),
        Gate::Sx { .. } => {
            let p = Complex64::new(h, h);
            let m = Complex64::new(h, -h);
            Some([[p, m], [m, p]])
        }
        Gate::Cx { .. } => None,
    }
}

pub(crate) fn apply_gate(amps: &mut [Complex64], gate: &Gate) {
    match *gate {
        Gate::Rz { qubit, theta } => {
            let half = theta.radians() / 2.0;
            let (lo, hi) = (Complex64::from_polar(1.0, -half), Complex64::from_polar(1.0, half));
            let bit = 1 << qubit;
            for (i, a) in amps.iter_mut().enumerate() {
                *a *= if i & bit == 0 { lo } else { hi };
            }
        }
        Gate::X { qubit } => {
            let bit = 1 << qubit;
            for i in 0..amps.len() {
                if i & bit == 0 {
                    amps.swap(i, i | bit);
                }
            }
        }
        Gate::Sx { qubit } => apply_1q(amps, qubit, &gate_matrix(gate).expect("single-qubit")),
        Gate::Cx { control, target } => apply_cx(amps, control, target),
    }
}

pub(crate) fn apply_1q(amps: &mut [Complex64], qubit: usize, m: &Matrix2) {
    let bit = 1 << qubit;
    for i in 0..amps.len() {
        if i & bit == 0 {
            let (a0, a1) = (amps[i], amps[i | bit]);
            amps[i] = m[0][0] * a0 + m[0][1] * a1;
            amps[i | bit] = m[1][0] * a0 + m[1][1] * a1;
        }
    }
}

pub(crate) fn apply_cx(amps: &mut [Complex64], control: usize, target: usize) {
    let (cb, tb) = (1 << control, 1 << target);
    for i in 0..amps.len() {
        if i & cb != 0 && i & tb == 0 {
            amps.swap(i, i | tb);
        }
    }
}

/// U_C·s, with gates acting on logical qubit indices.
///
/// The layout only places logical qubits on hardware; relabeling every gate
/// by a fixed permutation maps |00…0⟩ to the same state with its qubits
/// permuted, so fidelities against a logical-order target are read off here.
/// Use [`apply_circuit_physical`] for the hardware-ordered output.
pub fn apply_circuit(c: &Circuit, s: &StateVector) -> Result<StateVector> {
    if c.n_qubits() != s.n_qubits() {
        return Err(Error::DimensionMismatch { expected: s.n_qubits(), found: c.n_qubits() });
    }
    let mut out = s.clone();
    for g in c.gates() {
        out.apply_gate(g);
    }
    Ok(out)
}

/// Runs the circuit with every gate index mapped through the layout, giving
/// the state in physical qubit order. `s` is given in physical order too.
pub fn apply_circuit_physical(c: &Circuit, s: &StateVector) -> Result<StateVector> {
    if c.n_qubits() != s.n_qubits() {
        return Err(Error::DimensionMismatch { expected: s.n_qubits(), found: c.n_qubits() });
    }
    let layout = c.layout();
    let mut out = s.clone();
    for g in c.gates() {
        out.apply_gate(&g.map_qubits(|q| layout[q]));
    }
    Ok(out)
}

/// Noiseless fidelity |⟨target|U_C|00…0⟩|².
pub fn circuit_fidelity(c: &Circuit, target: &StateVector) -> Result<f64> {
    let out = apply_circuit(c, &StateVector::zero(c.n_qubits()))?;
    fidelity_pure(target, &out)
}

/// |⟨a|b⟩|², clamped to [0, 1].
pub fn fidelity_pure(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr().clamp(0.0, 1.0))
}

/// arccos |⟨a|b⟩|, in [0, π/2].
pub fn fubini_study_distance(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm().clamp(0.0, 1.0).acos())
}

impl fmt::Display for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "qubits {}", self.n_qubits)?;
        for a in &self.amps {
            writeln!(f, "{} {}", a.re, a.im)?;
        }
        Ok(())
    }
}

impl FromStr for StateVector {
    type Err = Error;

    /// Parses `qubits <n>` and then 2^n lines of `<re> <im>`.
    ///
    /// A squared norm within 1e-6 of one is accepted; if it is off by more
    /// than 1e-12 the amplitudes are rescaled.
    fn from_str(text: &str) -> Result<Self> {
        let mut n_qubits: Option<usize> = None;
        let mut amps = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            match (n_qubits, fields.as_slice()) {
                (None, ["qubits", n]) => {
                    let n: usize =
                        n.parse().map_err(|_| Error::parse(line_no, format!("bad qubit count {n:?}")))?;
                    if n == 0 || n > 24 {
                        return Err(Error::parse(line_no, format!("qubit count {n} out of range")));
                    }
                    n_qubits = Some(n);
                    amps.reserve(1 << n);
                }
                (None, _) => return Err(Error::parse(line_no, "expected `qubits <n>` header")),
                (Some(n), [re, im]) => {
                    if amps.len() == 1 << n {
                        return Err(Error::parse(line_no, format!("more than {} amplitudes", 1usize << n)));
                    }
                    let num = |s: &str| -> Result<f64> {
                        let v: f64 = s.parse().map_err(|_| Error::parse(line_no, format!("bad number {s:?}")))?;
                        if !v.is_finite() {
                            return Err(Error::parse(line_no, "amplitude must be finite"));
                        }
                        Ok(v)
                    };
                    amps.push(Complex64::new(num(re)?, num(im)?));
                }
                (Some(_), _) => return Err(Error::parse(line_no, "expected `<re> <im>`")),
            }
        }
        let n = n_qubits.ok_or_else(|| Error::parse(0, "missing `qubits <n>` header"))?;
        if amps.len() != 1 << n {
            return Err(Error::parse(0, format!("expected {} amplitudes, found {}", 1usize << n, amps.len())));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(Error::NotNormalized(norm));
        }
        if (norm - 1.0).abs() > 1e-12 {
            StateVector::normalized(amps)
        } else {
            StateVector::from_amplitudes_unchecked(amps)
        }
    }
}

/// (|00⟩ + |11⟩)/√2 on two qubits.
pub fn bell_state() -> StateVector {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    StateVector::from_amplitudes(vec![h, ZERO, ZERO, h]).expect("normalized")
}
