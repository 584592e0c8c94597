//! Numerical laboratory for the remainders of the Stirling expansions of
//! `ln Γ` and `ψ`, their Laplace kernels, and completely monotonic degrees.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity, clippy::needless_range_loop)]

pub mod cmdegree;
pub mod combinatorics;
pub mod error;
pub mod gammakit;
pub mod kernels;
pub mod precision;
pub mod quadrature;
pub mod remainders;
pub mod verify;

pub use error::{Error, Result};
pub use precision::{PrecisionContext, Real};
