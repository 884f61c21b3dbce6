//! Numerical toolkit for the Caputo fractional logistic problem
//!
//! ```text
//!   D^α u(t) = -u(t) (1 - u(t)),   u(0) = u0,   0 < α < 1,
//! ```
//!
//! where `D^α` is the Caputo derivative. Solutions with `0 < u0 < 1` exist
//! globally and decay; solutions with `u0 > 1` blow up in finite time. The
//! crate provides:
//!
//! - [`special`]: Gamma and one/two-parameter Mittag-Leffler functions.
//! - [`quadrature`]: convolution quadrature weights generated by FFT from a
//!   kernel's Laplace symbol (backward Euler generating polynomial).
//! - [`solver`]: the convolution quadrature time-marching scheme for the
//!   logistic problem and its comparison problems, with blow-up detection.
//! - [`analysis`]: closed-form bounds (blow-up brackets, decay envelope,
//!   local existence horizon, blow-up profile) and checks against runs.
//! - [`oracle`]: independent methods used for cross-validation
//!   (predictor-corrector on the Volterra form, L1 Caputo residual,
//!   arbitrary-precision Mittag-Leffler series).
//! - [`csv`]: trajectory serialization.

#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![cfg_attr(test, allow(clippy::approx_constant))]

pub mod analysis;
pub mod csv;
mod error;
pub mod oracle;
pub mod quadrature;
pub mod solver;
pub mod special;

pub use error::{Error, Result};
