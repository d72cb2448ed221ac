//! Evolutionary synthesis of approximate state-preparation circuits for
//! noisy processors with restricted qubit connectivity.
//!
//! Circuits use the native gate set {RZ(θ), X, SX, CX}. The genetic
//! algorithm in [`evolution`] trades circuit cost against fidelity, seeded
//! from the exact construction in [`baseline`]. The [`theory`] module holds
//! the analytic fidelity model used to interpret the resulting fronts.

pub mod baseline;
pub mod circuit;
pub mod coupling;
pub mod error;
pub mod evolution;
pub mod experiment;
pub mod haar;
pub mod sim;
pub mod theory;

pub use circuit::{cnot_upper_bound, Angle, Circuit, Gate, GateKind};
pub use coupling::CouplingMap;
pub use error::{Error, Result};
pub use sim::{DensityMatrix, NoiseModel, StateVector};
