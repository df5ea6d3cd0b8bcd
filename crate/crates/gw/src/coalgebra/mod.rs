//! Finite universal coalgebras over a small functor grammar.
//!
//! A system type is a signature built from the identity functor, constant
//! label sets, exponents, finite powersets, finitely supported probability
//! distributions, and products, coproducts, and composition. A coalgebra is
//! a finite carrier plus a structure map into the signature applied to the
//! carrier. Distribution weights are exact rationals; floating point stays
//! in the solver modules.

mod element;
mod functor;
mod homomorphism;
mod lts;
mod signature;

pub use element::{DistError, Element, FiniteDist};
pub use functor::{
    apply_functor_map, apply_functor_set, FunctorCarrier, FunctorError, FunctorMap,
    DEFAULT_ENUMERATION_CAP,
};
pub use homomorphism::{check_homomorphism, Coalgebra, CoalgebraError, HomFailure, HomVerdict};
pub use lts::{bisimilarity_partition, quotient_lts, Lts, LtsError};
pub use signature::{FunctorSignature, LabelSet, SignatureError};
