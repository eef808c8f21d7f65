//! Generators, words and relations of the inflated noncommutative algebra.

mod alphabet;
mod relations;
mod word;

pub use alphabet::{
    build_generators, copy_tuples, AlgebraMode, Alphabet, Copies, Letter, Profile,
};
pub use relations::{build_relations, RelationSet};
pub use word::{LetterId, Polynomial, Word};
