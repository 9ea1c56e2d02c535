//! Multiple Hermite polynomials for non-intersecting Brownian bridges with two
//! starting and two ending points: moment systems, Riemann–Hilbert recurrence
//! data, correlation kernels and Painlevé II double-scaling studies, all at
//! extended precision.

pub mod numerics;
pub mod model;
pub mod mop;
pub mod kernel;
pub mod rh;
pub mod painleve;
pub mod scaling;

/// Crate version, embedded in every artifact.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
