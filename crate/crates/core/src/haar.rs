//! Seeded randomness: Haar-random target states and random native circuits.
//!
//! All randomness comes from ChaCha20 ([`rand_chacha::ChaCha20Rng`]), whose
//! output is fixed by its specification and identical on every platform. A
//! master seed fans out into independent streams identified by a domain tag
//! and an index, so parallel workers never share generator state.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, GateKind};
use crate::coupling::CouplingMap;
use crate::error::{Error, Result};
use crate::sim::StateVector;

pub const MAX_HAAR_QUBITS: usize = 12;

/// Stream domains derived from a master seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u16)]
pub enum Domain {
    Targets = 1,
    Evolution = 2,
    Misc = 3,
}

/// Master seed for a reproducible computation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RngSeed(pub u64);

impl RngSeed {
    /// Generator for `(domain, index)`. Only the low 48 bits of `index` are used.
    pub fn stream(self, domain: Domain, index: u64) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.0);
        rng.set_stream(((domain as u64) << 48) | (index & ((1 << 48) - 1)));
        rng
    }

    /// A child seed, for handing a whole sub-computation its own master seed.
    pub fn derive(self, domain: Domain, index: u64) -> RngSeed {
        RngSeed(self.stream(domain, index).random())
    }
}

impl From<u64> for RngSeed {
    fn from(seed: u64) -> Self {
        RngSeed(seed)
    }
}

/// Normalized vector of 2^n i.i.d. standard complex Gaussians.
pub fn sample_haar_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<StateVector> {
    if !(1..=MAX_HAAR_QUBITS).contains(&n) {
        return Err(Error::Domain(format!("Haar sampling supports 1..={MAX_HAAR_QUBITS} qubits, got {n}")));
    }
    let amps: Vec<Complex64> = (0..1usize << n)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    StateVector::normalized(amps)
}

/// A CX on a uniformly chosen edge of `m` with random direction.
/// `phys_to_logical` is the inverse layout of the circuit receiving the gate.
pub fn random_cx<R: Rng + ?Sized>(m: &CouplingMap, phys_to_logical: &[usize], rng: &mut R) -> Option<Gate> {
    let edges = m.edges();
    if edges.is_empty() {
        return None;
    }
    let (a, b) = edges[rng.random_range(0..edges.len())];
    let (c, t) = if rng.random::<bool>() { (a, b) } else { (b, a) };
    Some(Gate::cx(phys_to_logical[c], phys_to_logical[t]))
}

/// A gate of the given kind on random qubits.
pub fn random_gate_of_kind<R: Rng + ?Sized>(
    kind: GateKind,
    m: &CouplingMap,
    phys_to_logical: &[usize],
    rng: &mut R,
) -> Option<Gate> {
    let n = m.n_qubits();
    match kind {
        GateKind::Rz => Some(Gate::rz(rng.random_range(0..n), rng.random_range(0.0..TAU))),
        GateKind::X => Some(Gate::x(rng.random_range(0..n))),
        GateKind::Sx => Some(Gate::sx(rng.random_range(0..n))),
        GateKind::Cx => random_cx(m, phys_to_logical, rng),
    }
}

/// Uniform gate kind, then uniform operands. On a single-qubit map CX is
/// never drawn.
pub fn random_gate<R: Rng + ?Sized>(m: &CouplingMap, phys_to_logical: &[usize], rng: &mut R) -> Gate {
    let kinds: &[GateKind] = if m.edges().is_empty() { &GateKind::ALL[..3] } else { &GateKind::ALL };
    let kind = kinds[rng.random_range(0..kinds.len())];
    random_gate_of_kind(kind, m, phys_to_logical, rng).expect("kind is available")
}

/// `length` random gates with the identity layout; valid on `m`.
pub fn random_circuit<R: Rng + ?Sized>(n: usize, length: usize, m: &CouplingMap, rng: &mut R) -> Result<Circuit> {
    if n != m.n_qubits() {
        return Err(Error::DimensionMismatch { expected: m.n_qubits(), found: n });
    }
    let identity: Vec<usize> = (0..n).collect();
    let gates = (0..length).map(|_| random_gate(m, &identity, rng)).collect();
    Circuit::new(n, gates)
}
