//! Numerical tolerances used across the crate.
//!
//! Every threshold lives here so that checks in different modules agree on
//! what "zero", "Hermitian" or "inside" mean.

use serde::{Deserialize, Serialize};

/// Relative Hermitian defect accepted by [`crate::matcore::herm_eig`].
pub const HERMITIAN_REL: f64 = 1e-12;
/// Relative pivot magnitude below which a solve reports singularity.
pub const PIVOT_REL: f64 = 1e-14;
/// Most negative eigenvalue that `psd_sqrt` clamps to zero.
pub const PSD_FLOOR: f64 = 1e-10;
/// Minimum distance between a denominator root and the spectrum.
pub const POLE_MARGIN: f64 = 1e-6;
/// Spectrum must be at least this far inside a domain.
pub const SPECTRUM_MARGIN: f64 = 1e-6;
/// A base point must be at least this far from the boundary.
pub const BASE_POINT_MARGIN: f64 = 1e-9;
/// Convexity tolerance for range boundary polylines.
pub const CONVEXITY: f64 = 1e-9;
/// Largest polynomial degree handled by the calculus.
pub const MAX_DEGREE: usize = 128;
/// Largest condition estimate accepted by the boundary least-squares fit.
pub const MAX_FIT_CONDITION: f64 = 1e12;
/// Coarse angle count for the numerical radius sweep.
pub const RADIUS_SWEEP: usize = 720;
/// Golden-section iterations used to refine maxima over an angle.
pub const GOLDEN_ITERS: usize = 60;

/// Run-time tolerance record handed to the higher-level checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub pole_margin: f64,
    pub spectrum_margin: f64,
    pub check: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            pole_margin: POLE_MARGIN,
            spectrum_margin: SPECTRUM_MARGIN,
            check: 1e-8,
        }
    }
}
