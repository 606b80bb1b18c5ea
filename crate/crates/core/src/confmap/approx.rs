use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::atlas::ConformalAtlas;
use super::Domain;
use crate::error::{Error, Result};
use crate::funcalc::{rational_apply, Poly, RationalFn};
use crate::matcore::{gen_eig, least_squares, CMatrix, Spectrum};
use crate::numrange::golden_max;
use crate::tol;

/// A normalized polynomial approximant of `g` and its diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolyApprox {
    pub poly: Poly,
    pub degree: usize,
    pub fit_condition: f64,
    /// Sampled boundary sup of the raw fit before dividing by it.
    pub boundary_sup: f64,
    /// Sampled sup of `|p - g|` on the boundary after normalization.
    pub sup_error: f64,
}

/// `g(T)` through the degree-`d` approximant, with its boundary error.
#[derive(Debug, Clone)]
pub struct GMatrix {
    pub matrix: CMatrix,
    pub tail_estimate: f64,
    pub spectrum: Spectrum,
}

pub fn poly_approx(atlas: &ConformalAtlas, d: usize) -> Result<Poly> {
    Ok(poly_approx_report(atlas, d)?.poly)
}

/// Least-squares fit of `g` at `4d` points equispaced in the geometric
/// boundary parameter, then `p ← (p - p(z0))/M` with `M` the refined
/// boundary sup. Conformal nodes are avoided here: they thin out where
/// `g⁻¹` is nearly singular and the fit aliases between them.
pub fn poly_approx_report(atlas: &ConformalAtlas, d: usize) -> Result<PolyApprox> {
    if d < 4 {
        return Err(Error::Unsupported(format!("approximant degree must be at least 4, got {d}")));
    }
    if d > tol::MAX_DEGREE {
        return Err(Error::DegreeTooLarge {
            degree: d,
            limit: tol::MAX_DEGREE,
        });
    }
    if let Some(exact) = affine_map(atlas) {
        return Ok(PolyApprox {
            poly: exact,
            degree: 1,
            fit_condition: 1.0,
            boundary_sup: 1.0,
            sup_error: 0.0,
        });
    }
    let rows = 4 * d;
    let cols = d + 1;
    let mut a = Vec::with_capacity(rows * cols);
    let mut b = Vec::with_capacity(rows);
    let domain = atlas.domain();
    for j in 0..rows {
        let z = domain.boundary_point(TAU * j as f64 / rows as f64);
        let mut zk = Complex64::new(1.0, 0.0);
        for _ in 0..cols {
            a.push(zk);
            zk *= z;
        }
        b.push(atlas.forward(z));
    }
    let ls = least_squares(&a, rows, cols, &b)?;
    if ls.condition > tol::MAX_FIT_CONDITION {
        return Err(Error::IllConditioned { condition: ls.condition });
    }
    let raw = Poly::new(ls.solution)?;
    let (poly, boundary_sup) = normalize_on_boundary(&raw, domain, d)?;
    let sup_error = (0..8 * d)
        .map(|j| {
            let z = domain.boundary_point(TAU * (j as f64 + 0.5) / (8 * d) as f64);
            (poly.eval(z) - atlas.forward(z)).norm()
        })
        .fold(0.0, f64::max);
    Ok(PolyApprox {
        poly,
        degree: d,
        fit_condition: ls.condition,
        boundary_sup,
        sup_error,
    })
}

fn affine_map(atlas: &ConformalAtlas) -> Option<Poly> {
    if !atlas.is_affine() {
        return None;
    }
    match atlas.domain().shape {
        super::Shape::Disk { center, radius } => Poly::new(vec![-center / radius, Complex64::new(1.0 / radius, 0.0)]).ok(),
        _ => None,
    }
}

/// Shifts `p` to vanish at the base point and divides by its boundary sup.
///
/// The sup is taken over `max(8d, 256)` geometric boundary samples, refined
/// by golden section around the three largest. Returns the scaled polynomial
/// and the sup it was divided by.
pub fn normalize_on_boundary(p: &Poly, domain: &Domain, d: usize) -> Result<(Poly, f64)> {
    let shifted = p.sub(&Poly::constant(p.eval(domain.base)));
    let sup = boundary_sup(&shifted, domain, (8 * d).max(256));
    if sup == 0.0 {
        return Ok((shifted, 0.0));
    }
    Ok((shifted.scale(Complex64::new(1.0 / sup, 0.0)), sup))
}

pub(crate) fn boundary_sup(p: &Poly, domain: &Domain, samples: usize) -> f64 {
    boundary_sup_of(|z| p.eval(z).norm(), domain, samples)
}

pub fn boundary_sup_of(f: impl Fn(Complex64) -> f64, domain: &Domain, samples: usize) -> f64 {
    let step = TAU / samples as f64;
    let mut vals: Vec<(f64, f64)> = (0..samples)
        .map(|j| {
            let t = step * j as f64;
            (t, f(domain.boundary_point(t)))
        })
        .collect();
    let mut best = vals.iter().map(|v| v.1).fold(0.0, f64::max);
    vals.sort_by(|l, r| r.1.total_cmp(&l.1));
    for &(t, _) in vals.iter().take(3) {
        let (_, v) = golden_max(|s| f(domain.boundary_point(s)), t - step, t + step);
        best = best.max(v);
    }
    best
}

/// Eigenvalues of `T`, failing if any is not at least `margin` inside.
pub fn check_spectrum_inside(domain: &Domain, t: &CMatrix, margin: f64) -> Result<Spectrum> {
    let spec = gen_eig(t)?;
    for &z in &spec.points {
        let d = domain.signed_distance(z);
        if !(d < -margin) {
            return Err(Error::SpectrumOutside { point: z, distance: d });
        }
    }
    Ok(spec)
}

/// `g(T)` via [`poly_approx`]; exact for disks.
pub fn g_of_matrix(atlas: &ConformalAtlas, t: &CMatrix, d: usize) -> Result<GMatrix> {
    let domain = atlas.domain();
    check_spectrum_inside(domain, t, tol::SPECTRUM_MARGIN)?;
    let (matrix, tail_estimate) = match domain.shape {
        super::Shape::Disk { center, radius } => {
            // (z - z0) / (r + ᾱc - ᾱz) with α = (z0 - c)/r
            let alpha = (domain.base - center) / radius;
            let f = RationalFn::new(
                Poly::new(vec![-domain.base, Complex64::new(1.0, 0.0)])?,
                Poly::new(vec![radius + alpha.conj() * center, -alpha.conj()])?,
            )?;
            (rational_apply(&f, t)?, 0.0)
        }
        _ => {
            let approx = poly_approx_report(atlas, d)?;
            (approx.poly.apply(t), approx.sup_error)
        }
    };
    let spectrum = gen_eig(&matrix)?;
    Ok(GMatrix {
        matrix,
        tail_estimate,
        spectrum,
    })
}

#[cfg(test)]
mod tests {
    use super::super::build_atlas;
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn disk_approximant_is_identity() {
        let a = build_atlas(&Domain::unit_disk()).unwrap();
        for d in [4, 17, 64] {
            let p = poly_approx(&a, d).unwrap();
            assert_eq!(p.coeffs(), &[c(0.0, 0.0), c(1.0, 0.0)]);
        }
    }

    #[test]
    fn normalized_side_conditions() {
        for dom in [Domain::ellipse(2.0, 1.0).unwrap(), Domain::square(1.0).unwrap(), Domain::disk(c(0.0, 0.0), 1.0).unwrap().with_base(c(0.3, 0.2)).unwrap()] {
            let a = build_atlas(&dom).unwrap();
            for d in [8, 16, 32] {
                let r = poly_approx_report(&a, d).unwrap();
                assert!(r.poly.eval(dom.base).norm() <= 1e-14);
                let sup = boundary_sup(&r.poly, &dom, 4096);
                assert!(sup <= 1.0 + 1e-12, "{dom:?} d={d} sup={sup}");
            }
        }
    }

    #[test]
    fn ellipse_error_decreases() {
        let a = build_atlas(&Domain::ellipse(2.0, 1.0).unwrap()).unwrap();
        let errs: Vec<f64> = [8, 16, 32].iter().map(|&d| poly_approx_report(&a, d).unwrap().sup_error).collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
        assert!(errs[2] < 1e-7, "{errs:?}");
    }

    #[test]
    fn degree_bounds() {
        let a = build_atlas(&Domain::ellipse(2.0, 1.0).unwrap()).unwrap();
        assert!(poly_approx(&a, 3).is_err());
        assert!(matches!(poly_approx(&a, 129), Err(Error::DegreeTooLarge { .. })));
    }

    #[test]
    fn g_of_matrix_examples() {
        let disk = build_atlas(&Domain::unit_disk()).unwrap();
        let t = CMatrix::from_real_rows(&[&[0.1, 0.5], &[0.0, -0.2]]).unwrap();
        let g = g_of_matrix(&disk, &t, 32).unwrap();
        assert!((&g.matrix - &t).max_abs() < 1e-15);

        let ell = build_atlas(&Domain::ellipse(2.0, 1.0).unwrap()).unwrap();
        let g = g_of_matrix(&ell, &CMatrix::zeros(2), 16).unwrap();
        assert!(g.matrix.max_abs() < 1e-14);

        let s3 = 3f64.sqrt();
        let cz = CMatrix::from_real_rows(&[&[s3, 2.0], &[0.0, -s3]]).unwrap();
        let g = g_of_matrix(&ell, &cz, 40).unwrap();
        let gc = ell.forward(c(s3, 0.0));
        let expect = cz.scale(gc / s3);
        assert!((&g.matrix - &expect).max_abs() < 1e-9, "{:?}", g.matrix);
    }

    #[test]
    fn spectrum_outside_is_reported() {
        let ell = build_atlas(&Domain::ellipse(2.0, 1.0).unwrap()).unwrap();
        let t = CMatrix::diag_real(&[2.5, 0.0]);
        assert!(matches!(g_of_matrix(&ell, &t, 16), Err(Error::SpectrumOutside { .. })));
    }

    #[test]
    fn off_centre_disk_matrix_map() {
        let dom = Domain::disk(c(1.0, 0.0), 2.0).unwrap().with_base(c(1.5, 0.5)).unwrap();
        let a = build_atlas(&dom).unwrap();
        let vals = [c(0.5, 0.2), c(1.8, -0.4)];
        let g = g_of_matrix(&a, &CMatrix::diag(&vals), 8).unwrap();
        for (i, &z) in vals.iter().enumerate() {
            assert!((g.matrix[(i, i)] - a.forward(z)).norm() < 1e-14);
        }
    }
}
