//! Numerical engines for murmurations of L-functions: arithmetic kernels,
//! special functions, the averaging framework, the Petersson trace formula,
//! closed-form reference densities and concrete families.

// `!(x > 0.0)` is how NaN gets rejected along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arith;
pub mod compare;
pub mod densities;
pub mod error;
pub mod families;
pub mod frame;
pub mod petersson;
pub mod special;

pub use error::{Error, ErrorCategory, Result};
