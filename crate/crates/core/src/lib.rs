//! Exact return probabilities of one-dimensional lattice random walks.
//!
//! The constant term of `(Σ a_k t^k)^n` is the probability `c_n` of being
//! back at the origin after `n` steps. This crate computes those sequences
//! exactly, compares them with the cosine-integral picture, recovers walks
//! from return data, and translates between walks and weight
//! decompositions of `U(1)` representations.
//!
//! ```
//! use walkprint::{corpus::simple_walk, returns::return_sequence, rational::format_rational};
//!
//! let seq = return_sequence(&simple_walk(), 4);
//! let shown: Vec<String> = seq.values.iter().map(format_rational).collect();
//! assert_eq!(shown, ["0/1", "1/2", "0/1", "3/8"]);
//! ```

pub mod cancel;
pub mod corpus;
pub mod emit;
pub mod io;
pub mod laurent;
pub mod montecarlo;
pub mod rational;
pub mod reconstruct;
pub mod rep;
pub mod returns;
pub mod scalar;
pub mod spectral;
pub mod walk;

pub use laurent::LaurentPoly;
pub use reconstruct::{ReconstructionProblem, ReconstructionResult};
pub use rep::{InvariantDimensionSequence, WeightDecomposition};
pub use returns::ReturnSequence;
pub use scalar::Coeff;
pub use spectral::CharacterFunction;
pub use walk::{StepDistribution, WalkClass, WalkType};

pub type Rational = num_rational::BigRational;
pub type Integer = num_bigint::BigInt;
pub type ExactPoly = LaurentPoly<Rational>;
pub type IntegerPoly = LaurentPoly<Integer>;
pub type FloatPoly = LaurentPoly<f64>;
pub type CharFn = CharacterFunction<f64>;
