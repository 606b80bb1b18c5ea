//! Numerical toolkit for W-spectral pairs of matrices.
//!
//! The crate computes numerical ranges and radii, builds conformal maps of
//! disks, ellipses and rectangles onto the unit disk, evaluates the
//! Herglotz-type representation of the functional calculus, checks the
//! positivity condition `Re h(T) >= -I` over the half-plane family, and
//! constructs finite normal dilations realizing `f(T) = 2 P_H f(N)|_H`.
//!
//! Everything operates on dense `n x n` complex matrices ([`CMatrix`]).

pub mod confmap;
pub mod dilation;
pub mod error;
pub mod experiments;
pub mod funcalc;
pub mod io;
pub mod matcore;
pub mod numrange;
pub mod tol;
pub mod wspec;

pub use error::{Error, Result};
pub use matcore::CMatrix;
pub use num_complex::Complex64;

/// Library version embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
