//! Explicit finite-dimensional quantum models used as ground truth.

mod linalg;
mod magic;
mod model;
mod sample;
mod truncate;

pub use linalg::{embed, kron, kron_all, min_eigenvalue, op_norm, pauli, CMatrix};
pub use magic::{bell_factors, bell_projector, magic_basis_model, MagicBasisModel, BELL_SIGNS};
pub use model::{
    squared_distance, FiniteModel, Operator, PartyMeasurement, SourceState, MAX_DENSE_DIM,
};
pub use sample::{sample_general_model, sample_model};
pub use truncate::{
    operator_schmidt, reconstruct, schmidt_truncate, truncate_model, truncation_error,
    SchmidtTerm, Truncation,
};
