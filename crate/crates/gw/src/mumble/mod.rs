//! Finite presheaf toposes and their internal language: categories,
//! presheaves, the sieve-valued subobject classifier, the Heyting algebra
//! of subpresheaves, a typed formula language, and two independent
//! semantic evaluators (subpresheaf interpretation and stagewise forcing)
//! whose agreement is continuously tested.

pub mod category;
pub mod formula;
pub mod heyting;
pub mod omega;
pub mod parser;
pub mod presheaf;
pub mod semantics;
pub mod smallcat;

pub use category::{Arrow, CategoryError, FiniteCategory};
pub use formula::{Formula, FormulaError, Signature, Term, Type};
pub use parser::{parse_formula, parse_type, ParseError};
pub use presheaf::{NatTrans, Presheaf, PresheafError, SubPresheaf, Value};
pub use semantics::{Certificate, Forcing, Model, SemanticsError};
