//! Floating-point special functions and test functions.

pub mod bessel;
pub mod gamma;
pub mod quadrature;
pub mod truncation;
pub mod weight;

pub use bessel::{bessel_j, BesselRegime};
pub use gamma::{log_gamma, petersson_prefactor, LogScale};
pub use quadrature::{quadrature, quadrature_tol, QuadratureResult};
pub use truncation::{Truncation, TruncationPolicy};
pub use weight::{bump, indicator, Smoothness, WeightFunction};
