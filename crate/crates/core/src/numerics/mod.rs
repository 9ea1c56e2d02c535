//! Extended-precision scalars, dense linear algebra and the special functions
//! used throughout the crate.

pub mod airy;
pub mod complex;
pub mod faddeeva;
pub mod matrix;
pub mod quadrature;
pub mod real;

pub use airy::{airy_ai, airy_ai_pair, airy_ai_prime, airy_ai_scaled};
pub use complex::Cplx;
pub use faddeeva::{faddeeva, faddeeva_derivative};
pub use matrix::{solve_linear, CMatrix, DenseMatrix, LinearAlgebraError, Matrix, Scalar};
pub use real::{clamp_precision, default_precision, set_default_precision, Real, DEFAULT_PRECISION, MIN_PRECISION};

/// Extended-precision real scalar.
pub type ExtReal = Real;
/// Extended-precision complex scalar.
pub type ExtComplex = Cplx;
