//! Exact symbolic engine for matrices over `K[x]` whose entries have degree at
//! most one. The crate classifies such matrices of rank at most two into
//! normal forms under constant invertible row and column operations, decides
//! whether a matrix is the Jacobian matrix of a quadratic polynomial map,
//! decides strong nilpotence, and constructively conjugates nilpotent
//! rank-at-most-two Jacobian matrices to strictly lower triangular form.
//! Every major operation returns a transformation certificate that can be
//! re-verified by plain matrix multiplication.
//!
//! All arithmetic is exact: arbitrary-precision rationals or a prime field
//! GF(p). There is no floating point anywhere.

pub mod classify;
pub mod degmat;
pub mod error;
pub mod families;
pub mod field;
pub mod jacobian;
pub mod linmat;
pub mod poly;
pub mod triangularize;

pub use error::Error;
pub use field::{FieldSpec, Scalar};
pub use poly::{Monomial, Poly};
