use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ginibre, pair_refutation_on, stream_rng, REFUTATION_TRIALS};
use crate::confmap::Domain;
use crate::error::{Error, Result};
use crate::matcore::{inverse, least_squares, min_singular_value, CMatrix};
use crate::numrange::boundary;
use crate::wspec::PairCheckReport;

/// Largest accepted condition number of the similarity `S`.
const MAX_CONDITION: f64 = 1e6;
/// Accepted range of the fitted axis ratio `b/a`.
const ASPECT_RANGE: (f64, f64) = (0.15, 0.95);
const MAX_RESAMPLES: usize = 1000;
const DIM: usize = 3;

/// Least-squares fit of `A x² + B xy + C y² + D x + E y = 1`, reduced to
/// center, rotation and semi-axes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConicFit {
    pub center: Complex64,
    /// Angle of the major axis.
    pub rotation: f64,
    pub a: f64,
    pub b: f64,
    /// Largest `|Q(p - center)/κ - 1|` over the fitted points.
    pub residual: f64,
}

pub fn fit_centered_conic(points: &[Complex64]) -> Result<ConicFit> {
    let rows = points.len();
    let mut mat = Vec::with_capacity(rows * 5);
    for p in points {
        let (x, y) = (p.re, p.im);
        mat.extend([x * x, x * y, y * y, x, y].map(|v| Complex64::new(v, 0.0)));
    }
    let rhs = vec![Complex64::new(1.0, 0.0); rows];
    let fit = least_squares(&mat, rows, 5, &rhs)?;
    let [qa, qb, qc, qd, qe] = [0, 1, 2, 3, 4].map(|k| fit.solution[k].re);
    let det = 4.0 * qa * qc - qb * qb;
    if !(det > 0.0) {
        return Err(Error::Experiment("fitted conic is not an ellipse".into()));
    }
    let x0 = (-2.0 * qc * qd + qb * qe) / det;
    let y0 = (qb * qd - 2.0 * qa * qe) / det;
    let kappa = 1.0 - (qa * x0 * x0 + qb * x0 * y0 + qc * y0 * y0 + qd * x0 + qe * y0);
    let mean = 0.5 * (qa + qc);
    let half = (0.25 * (qa - qc) * (qa - qc) + 0.25 * qb * qb).sqrt();
    let (lo, hi) = (mean - half, mean + half);
    let rotation = 0.5 * qb.atan2(qa - qc) + std::f64::consts::FRAC_PI_2;
    let residual = points
        .iter()
        .map(|p| {
            let (u, v) = (p.re - x0, p.im - y0);
            ((qa * u * u + qb * u * v + qc * v * v) / kappa - 1.0).abs()
        })
        .fold(0.0, f64::max);
    Ok(ConicFit {
        center: Complex64::new(x0, y0),
        rotation: rotation.rem_euclid(std::f64::consts::PI),
        a: (kappa / lo).sqrt(),
        b: (kappa / hi).sqrt(),
        residual,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct InvolutionReport {
    pub seed: u64,
    /// Draws rejected by the conditioning or aspect guards.
    pub resamples: usize,
    pub s: CMatrix,
    pub t: CMatrix,
    /// `||T² - I||`
    pub involution_defect: f64,
    pub fit: ConicFit,
    /// `|sqrt(a² - b²) - 1|`: the foci of the fitted ellipse should be ±1.
    pub focal_defect: f64,
    pub refutation: PairCheckReport,
}

/// `T = S diag(1, -1, 1) S^{-1}` for a seeded Ginibre `S`, its numerical
/// range fitted by a centered ellipse, and the sampled pair check on it.
pub fn involution_demo(seed: u64) -> Result<InvolutionReport> {
    let d = CMatrix::diag_real(&[1.0, -1.0, 1.0]);
    for k in 0..MAX_RESAMPLES {
        let mut rng = stream_rng(seed, k as u64);
        let s = ginibre(&mut rng, DIM);
        let smin = min_singular_value(&s);
        if !(smin > 0.0) || s.op_norm() / smin > MAX_CONDITION {
            continue;
        }
        let t = s.matmul(&d).matmul(&inverse(&s)?);
        let fit = fit_centered_conic(&boundary(&t, 720)?.points)?;
        let aspect = fit.b / fit.a;
        if !(ASPECT_RANGE.0..=ASPECT_RANGE.1).contains(&aspect) {
            continue;
        }
        let domain = Domain::ellipse(fit.a, fit.b)?;
        let refutation = pair_refutation_on(&t, &domain, REFUTATION_TRIALS, seed)?;
        return Ok(InvolutionReport {
            seed,
            resamples: k,
            involution_defect: (&t.matmul(&t) - &CMatrix::identity(DIM)).op_norm(),
            focal_defect: ((fit.a * fit.a - fit.b * fit.b).sqrt() - 1.0).abs(),
            s,
            t,
            fit,
            refutation,
        });
    }
    Err(Error::Experiment(format!("no admissible similarity after {MAX_RESAMPLES} draws")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{crouzeix_matrix, EllipseParams};

    #[test]
    fn conic_fit_of_rotated_ellipse() {
        let (a, b, phi) = (3.0, 1.25, 0.4);
        let c0 = Complex64::new(0.5, -0.25);
        let pts: Vec<Complex64> = (0..200)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / 200.0;
                c0 + Complex64::new(a * t.cos(), b * t.sin()) * Complex64::from_polar(1.0, phi)
            })
            .collect();
        let fit = fit_centered_conic(&pts).unwrap();
        assert!((fit.a - a).abs() < 1e-10 && (fit.b - b).abs() < 1e-10);
        assert!((fit.center - c0).norm() < 1e-10);
        assert!((fit.rotation - phi).abs() < 1e-10);
        assert!(fit.residual < 1e-10);
    }

    #[test]
    fn crouzeix_range_fit() {
        let t = crouzeix_matrix(EllipseParams::new(2.0, 1.0).unwrap());
        let fit = fit_centered_conic(&boundary(&t, 720).unwrap().points).unwrap();
        assert!((fit.a - 2.0).abs() < 1e-8 && (fit.b - 1.0).abs() < 1e-8);
        assert!(fit.center.norm() < 1e-8);
    }

    #[test]
    fn seeded_involution() {
        let r = involution_demo(1).unwrap();
        assert!(r.involution_defect < 1e-10);
        assert!(r.fit.residual < 1e-6);
        assert!(r.fit.center.norm() < 1e-6);
        assert!(r.focal_defect < 1e-6);
        assert!(!r.refutation.passed);
        assert!(r.refutation.witness.is_some());
        let again = involution_demo(1).unwrap();
        assert_eq!(again.t, r.t);
    }
}
