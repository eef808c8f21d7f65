//! Monomial bases, symbolic moment/localizing matrices, symmetry merging and
//! polarized objectives.

mod basis;
mod merge;
mod objective;
mod spec;

pub use basis::{enumerate_basis, MonomialBasis};
pub use merge::{symmetry_merge, MomentVariable, VariableTable, WordRef};
pub use objective::{
    cell_polynomial, polarize, probability_constraints, ObjectiveMode, ProbabilityBundle,
    ProbabilityOptions, StatePolynomial, StateTerm,
};
pub use spec::{
    LinearForm, LocalizingKind, LocalizingSpec, MomentContext, MomentMatrixSpec, SymbolicMatrix,
    WordTable, IDENTITY_ID,
};
