//! Exact computer algebra for quadratic forms over etale algebras,
//! Clifford algebras, norm functors, K3-type Hodge data and the associated
//! Kuga-Satake constructions. All arithmetic is exact rational arithmetic;
//! no floating point enters any check.

pub mod clifford;
pub mod hodge;
pub mod json;
pub mod kugasatake;
pub mod linalg;
pub mod normfunctor;
pub mod par;
pub mod quadspace;
pub mod reptheory;
pub mod sampler;
pub mod scalars;
pub mod so4quat;
pub mod suite;

pub use linalg::{Mat, Scalar};
pub use scalars::poly::{Poly, Rat};
