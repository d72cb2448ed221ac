//! Statevector and density-matrix simulation of native-gate circuits.

mod density;
mod statevector;

pub use density::{
    apply_noisy, evaluate_noisy, noisy_fidelity, predicted_noisy_fidelity, DensityMatrix, NoiseModel,
    MAX_DENSITY_QUBITS,
};
pub use statevector::{
    apply_circuit, apply_circuit_physical, bell_state, circuit_fidelity, fidelity_pure, fubini_study_distance,
    gate_matrix, Matrix2, StateVector, NORM_TOLERANCE,
};
