//! Numerical range `W(T)` and numerical radius `w(T)` via the support
//! function: for each direction θ the top eigenpair of `Re(e^{-iθ}T)` gives
//! the supporting line and a boundary point `<Tx, x>`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::confmap::Domain;
use crate::error::Result;
use crate::matcore::{herm_eig, lambda_max, CMatrix};
use crate::tol;

/// Support value and the boundary point where it is attained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportPoint {
    pub theta: f64,
    pub support_value: f64,
    pub point: Complex64,
}

/// Sampled boundary of `W(T)` ordered by sweep angle.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RangeBoundary {
    pub points: Vec<Complex64>,
    pub angles: Vec<f64>,
    pub support_values: Vec<f64>,
    /// Unit vectors `x` with `points[k] = <T x, x>`.
    #[serde(skip)]
    pub vectors: Vec<Vec<Complex64>>,
}

impl RangeBoundary {
    /// Largest `|<Tx,x> - points[k]|` over the stored vectors.
    pub fn recheck(&self, t: &CMatrix) -> f64 {
        self.points
            .iter()
            .zip(&self.vectors)
            .map(|(p, x)| (t.quadratic_form(x) - p).norm())
            .fold(0.0, f64::max)
    }

    /// Cross-product convexity test on consecutive edges. Near-duplicate
    /// points (corners of `W(T)`) are skipped.
    pub fn is_convex(&self, tol: f64) -> bool {
        let scale = self.points.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let mut pts: Vec<Complex64> = Vec::with_capacity(self.points.len());
        for &p in &self.points {
            if pts.last().is_none_or(|q: &Complex64| (p - q).norm() > 1e-9 * scale) {
                pts.push(p);
            }
        }
        while pts.len() > 1 && (pts[0] - pts[pts.len() - 1]).norm() <= 1e-9 * scale {
            pts.pop();
        }
        let m = pts.len();
        if m < 3 {
            return true;
        }
        (0..m).all(|k| {
            let a = pts[k];
            let b = pts[(k + 1) % m];
            let c = pts[(k + 2) % m];
            let e1 = b - a;
            let e2 = c - b;
            let cross = e1.re * e2.im - e1.im * e2.re;
            cross >= -tol * scale * scale
        })
    }

    pub fn max_modulus(&self) -> f64 {
        self.points.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Top eigenpair of `Re(e^{-iθ} T)`.
pub fn support_point(t: &CMatrix, theta: f64) -> Result<SupportPoint> {
    let (sp, _) = support_point_with_vector(t, theta)?;
    Ok(sp)
}

fn support_point_with_vector(t: &CMatrix, theta: f64) -> Result<(SupportPoint, Vec<Complex64>)> {
    let rotated = t.scale(Complex64::from_polar(1.0, -theta)).re_part();
    let eig = herm_eig(&rotated)?;
    let k = t.dim() - 1;
    let x = eig.vector(k);
    let point = t.quadratic_form(&x);
    Ok((
        SupportPoint {
            theta,
            support_value: eig.values[k],
            point,
        },
        x,
    ))
}

/// Support value only; the cheap inner loop of the radius search.
pub fn support_value(t: &CMatrix, theta: f64) -> Result<f64> {
    let rotated = t.scale(Complex64::from_polar(1.0, -theta)).re_part();
    lambda_max(&rotated)
}

/// `m_samples` boundary points at equally spaced angles in `[0, 2π)`.
pub fn boundary(t: &CMatrix, m_samples: usize) -> Result<RangeBoundary> {
    let m = m_samples.max(8);
    let rows: Vec<(SupportPoint, Vec<Complex64>)> = (0..m)
        .into_par_iter()
        .map(|k| support_point_with_vector(t, TAU * k as f64 / m as f64))
        .collect::<Result<_>>()?;
    let mut out = RangeBoundary {
        points: Vec::with_capacity(m),
        angles: Vec::with_capacity(m),
        support_values: Vec::with_capacity(m),
        vectors: Vec::with_capacity(m),
    };
    for (sp, x) in rows {
        out.points.push(sp.point);
        out.angles.push(sp.theta);
        out.support_values.push(sp.support_value);
        out.vectors.push(x);
    }
    Ok(out)
}

/// Numerical radius with the default 720-angle coarse sweep.
pub fn numerical_radius(t: &CMatrix) -> Result<f64> {
    numerical_radius_with(t, tol::RADIUS_SWEEP)
}

/// `w(T) = max_θ λ_max(Re(e^{-iθ}T))`: coarse sweep, then golden-section
/// refinement around the best few coarse maxima.
pub fn numerical_radius_with(t: &CMatrix, coarse: usize) -> Result<f64> {
    let coarse = coarse.max(8);
    let step = TAU / coarse as f64;
    let values: Vec<f64> = (0..coarse)
        .map(|k| support_value(t, step * k as f64))
        .collect::<Result<_>>()?;
    let mut best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if best <= 0.0 {
        // T = 0 (or numerically so)
        return Ok(best.max(0.0));
    }
    // local maxima of the sampled support function, largest first
    let mut peaks: Vec<usize> = (0..coarse)
        .filter(|&k| {
            let prev = values[(k + coarse - 1) % coarse];
            let next = values[(k + 1) % coarse];
            values[k] >= prev && values[k] >= next
        })
        .collect();
    peaks.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    for &k in peaks.iter().take(3) {
        let centre = step * k as f64;
        let refined = golden_max(|th| support_value(t, th).unwrap_or(f64::NEG_INFINITY), centre - step, centre + step);
        best = best.max(refined.1);
    }
    Ok(best)
}

/// Golden-section maximization on `[lo, hi]`; returns `(argmax, max)`.
pub(crate) fn golden_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..tol::GOLDEN_ITERS {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Result of testing `W(T)` against a closed domain.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContainmentReport {
    pub inside: bool,
    /// Largest signed distance of a sampled boundary point to the domain
    /// boundary (negative means strictly inside).
    pub worst_violation: f64,
    pub worst_point: Complex64,
    pub samples: usize,
}

/// Checks `W(T) ⊂ domain` (inflated by `tol`) on 720 boundary samples.
pub fn range_in_domain(t: &CMatrix, domain: &Domain, tol: f64) -> Result<ContainmentReport> {
    range_in_domain_with(t, domain, tol, tol::RADIUS_SWEEP)
}

pub fn range_in_domain_with(t: &CMatrix, domain: &Domain, tol: f64, samples: usize) -> Result<ContainmentReport> {
    let b = boundary(t, samples)?;
    let (worst_point, worst_violation) = b
        .points
        .iter()
        .map(|&z| (z, domain.signed_distance(z)))
        .max_by(|l, r| l.1.total_cmp(&r.1))
        .expect("nonempty boundary");
    Ok(ContainmentReport {
        inside: worst_violation <= tol,
        worst_violation,
        worst_point,
        samples: b.points.len(),
    })
}

/// Largest `h_T(θ) - h_Ω(θ)` over the domain's critical directions: the four
/// edge normals for a rectangle (exact), a uniform sweep otherwise.
pub fn support_excess(t: &CMatrix, domain: &Domain, sweep: usize) -> Result<f64> {
    let angles: Vec<f64> = match domain.edge_normals() {
        Some(n) => n,
        None => (0..sweep).map(|k| TAU * k as f64 / sweep as f64).collect(),
    };
    let mut worst = f64::NEG_INFINITY;
    for th in angles {
        let ht = support_value(t, th)?;
        worst = worst.max(ht - domain.support(th));
    }
    Ok(worst)
}

/// Smallest `s >= 1` such that `W(T)/s` sits inside a domain star-shaped
/// about the origin, measured by support ratios.
pub fn support_ratio(t: &CMatrix, domain: &Domain, sweep: usize) -> Result<f64> {
    let angles: Vec<f64> = match domain.edge_normals() {
        Some(n) => n,
        None => (0..sweep).map(|k| TAU * k as f64 / sweep as f64).collect(),
    };
    let mut worst = 0.0f64;
    for th in angles {
        let ht = support_value(t, th)?;
        worst = worst.max(ht / domain.support(th));
    }
    Ok(worst)
}
