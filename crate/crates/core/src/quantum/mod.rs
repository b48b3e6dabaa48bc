//! Exact simulation of small quantum registers.
//!
//! Basis states are indexed by their computational-basis rank with qubit 0 as
//! the most significant bit, so `|q0 q1 … q_{n-1}⟩` has index
//! `Σ q_j · 2^{n-1-j}`.

mod circuit;
mod density;
mod measure;
mod state;

pub use circuit::{Angle, Circuit, Gate, GateBasis, Opcode, MAX_ANGLE_BITS, MAX_CIRCUIT_QUBITS};
pub use density::{
    partial_trace, schmidt_rank, uhlmann_fidelity, DensityMatrix, PartialTrace, MAX_DENSITY_QUBITS,
};
pub use measure::{
    povm_outcome_distribution, povm_outcome_distribution_density, sample_measurement,
    sample_measurement_with, sample_swap_test, swap_test, swap_test_circuit,
    swap_test_circuit_probabilities, MeasurementBasis, PovmDistribution, MAX_POVM_QUBITS,
};
pub use state::{fidelity, inner_product, StateVector, MAX_QUBITS};

pub type C64 = num_complex::Complex<f64>;

/// Normalization tolerance for states and traces.
pub const NORM_TOL: f64 = 1e-10;
/// Floor below which negative eigenvalues count as a real violation.
pub const EIGEN_FLOOR: f64 = 1e-9;
