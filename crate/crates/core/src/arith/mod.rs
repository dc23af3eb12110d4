//! Exact arithmetic layer: scalars, sparse multivariate polynomials,
//! dense univariate polynomials and small exact linear algebra.

pub mod linalg;
pub mod multipoly;
pub mod rational;
pub mod unipoly;

pub use multipoly::{poly_arith, ArithOp, Monomial, MultiPoly, PolyError, TermOrder};
pub use rational::Rational;
pub use unipoly::UniPoly;
