use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::confmap::{build_atlas, poly_approx_report, Domain};
use crate::error::{Error, Result};
use crate::matcore::CMatrix;
use crate::numrange::numerical_radius;
use crate::wspec::{check_condition_i_sampled, PairCheckReport};

/// Semi-axes of a centered ellipse, `a > b > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipseParams {
    pub a: f64,
    pub b: f64,
}

impl EllipseParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a > b && b > 0.0) {
            return Err(Error::InvalidDomain(format!("ellipse parameters need a > b > 0, got a={a}, b={b}")));
        }
        Ok(Self { a, b })
    }

    /// Half the focal distance.
    pub fn c(&self) -> f64 {
        (self.a * self.a - self.b * self.b).sqrt()
    }

    pub fn domain(&self) -> Domain {
        Domain::ellipse(self.a, self.b).expect("validated parameters")
    }
}

/// `[[c, 2b], [0, -c]]`, whose numerical range is the closed ellipse.
pub fn crouzeix_matrix(p: EllipseParams) -> CMatrix {
    let c = p.c();
    CMatrix::from_real_rows(&[&[c, 2.0 * p.b], &[0.0, -c]]).expect("2x2")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DegreeRow {
    pub degree: usize,
    /// `w(f_d(T))`
    pub w: f64,
    /// `|f_d(c)| a / c`, the value `w(f_d(T))` takes when `f_d` is odd.
    pub predicted_w: f64,
    /// `||f_d(T) - (f_d(c)/c) T||`
    pub structure_defect: f64,
    /// Boundary sup of `|f_d - g|`.
    pub sup_error: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EllipseViolation {
    pub params: EllipseParams,
    pub c: f64,
    pub w_t: f64,
    pub g_at_c: Complex64,
    /// `|g(c)| a / c`
    pub ratio: f64,
    /// `c / a`, the Schwarz lower bound for `|g(c)|`.
    pub schwarz_lower: f64,
    pub schwarz_holds: bool,
    pub per_degree: Vec<DegreeRow>,
    /// Smallest tested degree with `w(f_d(T)) > 1`.
    pub first_violating_degree: Option<usize>,
}

pub fn ellipse_violation(p: EllipseParams, degrees: &[usize]) -> Result<EllipseViolation> {
    let t = crouzeix_matrix(p);
    let c = p.c();
    let atlas = build_atlas(&p.domain())?;
    let w_t = numerical_radius(&t)?;
    let g_at_c = atlas.forward(Complex64::new(c, 0.0));
    let per_degree: Vec<DegreeRow> = degrees
        .par_iter()
        .map(|&d| {
            let rep = poly_approx_report(&atlas, d)?;
            let ft = rep.poly.apply(&t);
            let fc = rep.poly.eval(Complex64::new(c, 0.0));
            Ok(DegreeRow {
                degree: d,
                w: numerical_radius(&ft)?,
                predicted_w: fc.norm() * p.a / c,
                structure_defect: (&ft - &t.scale(fc / c)).op_norm(),
                sup_error: rep.sup_error,
            })
        })
        .collect::<Result<_>>()?;
    let first_violating_degree = per_degree.iter().filter(|r| r.w > 1.0).map(|r| r.degree).min();
    Ok(EllipseViolation {
        params: p,
        c,
        w_t,
        g_at_c,
        ratio: g_at_c.norm() * p.a / c,
        schwarz_lower: c / p.a,
        schwarz_holds: g_at_c.norm() > c / p.a,
        per_degree,
        first_violating_degree,
    })
}

/// Sampled condition (i) for the Crouzeix matrix on its own numerical range.
pub fn pair_refutation(p: EllipseParams, trials: usize, seed: u64) -> Result<PairCheckReport> {
    pair_refutation_on(&crouzeix_matrix(p), &p.domain(), trials, seed)
}

pub fn pair_refutation_on(t: &CMatrix, domain: &Domain, trials: usize, seed: u64) -> Result<PairCheckReport> {
    check_condition_i_sampled(t, domain, trials, 1e-8, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numrange::boundary;
    use crate::wspec::Witness;

    #[test]
    fn crouzeix_literal_matrix() {
        let p = EllipseParams::new(2.0, 1.0).unwrap();
        let t = crouzeix_matrix(p);
        let s3 = 3f64.sqrt();
        assert_eq!(t, CMatrix::from_real_rows(&[&[s3, 2.0], &[0.0, -s3]]).unwrap());
        let sq = t.matmul(&t);
        assert!((&sq - &CMatrix::identity(2).scale_real(3.0)).max_abs() < 1e-14);
    }

    #[test]
    fn crouzeix_range_is_the_ellipse() {
        for (a, b) in [(2.0, 1.0), (3.0, 1.0), (1.5, 1.0)] {
            let t = crouzeix_matrix(EllipseParams::new(a, b).unwrap());
            let bd = boundary(&t, 720).unwrap();
            for z in &bd.points {
                let e = z.re * z.re / (a * a) + z.im * z.im / (b * b) - 1.0;
                assert!(e.abs() < 1e-6, "a={a} b={b} z={z}");
            }
        }
    }

    #[test]
    fn degenerate_parameters_rejected() {
        assert!(EllipseParams::new(1.0, 1.0).is_err());
        assert!(EllipseParams::new(1.0, 2.0).is_err());
        assert!(EllipseParams::new(1.0, 0.0).is_err());
        assert!(EllipseParams::new(f64::NAN, 0.5).is_err());
    }

    #[test]
    fn violation_report() {
        let r = ellipse_violation(EllipseParams::new(2.0, 1.0).unwrap(), &[8, 16, 32]).unwrap();
        assert!((r.w_t - 2.0).abs() < 1e-8);
        assert!(r.ratio > 1.01, "{}", r.ratio);
        assert!(r.schwarz_holds);
        assert!(r.first_violating_degree.is_some());
        let last = r.per_degree.last().unwrap();
        assert!((last.w - r.ratio).abs() < 1e-5);
        assert!(r.per_degree.windows(2).all(|p| p[1].structure_defect <= p[0].structure_defect + 1e-12));
        // the approximants are odd, so w(f_d(T)) = |f_d(c)| a / c at every degree
        for row in &r.per_degree {
            assert!((row.w - row.predicted_w).abs() < 1e-8);
        }
    }

    #[test]
    fn ratio_tends_to_one_with_eccentricity() {
        let ratios: Vec<f64> = [0.9, 0.99]
            .iter()
            .map(|&s| ellipse_violation(EllipseParams::new(1.0, s).unwrap(), &[8]).unwrap().ratio)
            .collect();
        assert!(ratios[0] > ratios[1] && ratios[1] > 1.0);
    }

    #[test]
    fn refutation_and_disk_control() {
        let p = EllipseParams::new(2.0, 1.0).unwrap();
        let r = pair_refutation(p, 16, 3).unwrap();
        assert!(!r.passed);
        match r.witness {
            Some(Witness::Approximant { degree, .. }) => assert!(degree <= 32),
            other => panic!("unexpected witness {other:?}"),
        }
        let disk = Domain::disk(Complex64::new(0.0, 0.0), 2.0).unwrap();
        let r = pair_refutation_on(&crouzeix_matrix(p), &disk, 16, 3).unwrap();
        assert!(r.passed, "margin {}", r.margin);
    }
}
