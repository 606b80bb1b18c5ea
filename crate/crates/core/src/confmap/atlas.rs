use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::elliptic::{agm, carlson_rf, modulus_from_nome, Jacobi};
use super::{Domain, Shape};
use crate::error::{Error, Result};
use crate::matcore::{solve, CMatrix};
use crate::tol;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone)]
enum MapKind {
    /// `g(z) = (u - α)/(1 - ᾱu)` with `u = (z - center)/radius`.
    Disk { center: Complex64, radius: f64, alpha: Complex64 },
    /// `g(z) = √k sn((2K/π) asin(z/c))`
    Ellipse { c: f64, sqrt_k: f64, jac: Jacobi },
    /// Forward through `sn` on the period rectangle followed by a Moebius
    /// map; inverse through the Schwarz-Christoffel integral.
    Rectangle {
        half_width: f64,
        jac: Jacobi,
        rot: Complex64,
        p: Complex64,
        scale: f64,
    },
}

/// The Riemann map `g: Ω → 𝔻` with `g(z0) = 0` and `g'(z0) > 0`.
#[derive(Debug, Clone)]
pub struct ConformalAtlas {
    domain: Domain,
    map: MapKind,
}

pub fn build_atlas(domain: &Domain) -> Result<ConformalAtlas> {
    let zero = Complex64::new(0.0, 0.0);
    let map = match domain.shape {
        Shape::Disk { center, radius } => MapKind::Disk {
            center,
            radius,
            alpha: (domain.base - center) / radius,
        },
        Shape::Ellipse { a, b } => {
            if domain.base != zero {
                return Err(Error::Unsupported("ellipse maps need base point 0".into()));
            }
            let c = ((a - b) * (a + b)).sqrt();
            let q = ((a - b) / (a + b)).powi(2);
            let (k, kp) = modulus_from_nome(q)?;
            MapKind::Ellipse {
                c,
                sqrt_k: k.sqrt(),
                jac: Jacobi::with_complement(k, kp)?,
            }
        }
        Shape::Rectangle { half_width, half_height } => {
            if domain.base != zero {
                return Err(Error::Unsupported("rectangle maps need base point 0".into()));
            }
            // forward: period rectangle (-K, K) x (0, K') with K'/K = 2h/w
            let q = (-TAU * half_height / half_width).exp();
            let (k, kp) = modulus_from_nome(q)?;
            let jac = Jacobi::with_complement(k, kp)?;
            // rotation making g'(0) > 0: derivative of the unrotated map at 0
            let u0 = Complex64::new(0.0, 0.5 * jac.complete_complement());
            let (s0, c0, d0) = jac.sn_cn_dn(u0);
            let deriv = c0 * d0 * (jac.complete() / half_width) / (2.0 * s0);
            let rot = deriv.conj() / deriv.norm();
            // inverse: prevertices ±e^{±iα} with h/w = K(sin α)/K(cos α)
            let alpha = rectangle_prevertex_angle(half_height / half_width);
            let p = Complex64::from_polar(1.0, 2.0 * alpha);
            let edge = carlson_rf(ONE - p, ONE - p.conj(), ONE).re;
            MapKind::Rectangle {
                half_width,
                jac,
                rot,
                p,
                scale: half_width / edge,
            }
        }
    };
    Ok(ConformalAtlas { domain: *domain, map })
}

/// Solves `agm(1, sin α)/agm(1, cos α) = ratio` by bisection.
fn rectangle_prevertex_angle(ratio: f64) -> f64 {
    if ratio == 1.0 {
        return 0.25 * PI;
    }
    let f = |a: f64| agm(1.0, a.sin()) / agm(1.0, a.cos()) - ratio;
    let (mut lo, mut hi) = (0.0, FRAC_PI_2);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

impl ConformalAtlas {
    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// True when `g` is a polynomial of degree one, so `g(T)` is exact.
    pub fn is_affine(&self) -> bool {
        matches!(self.map, MapKind::Disk { alpha, .. } if alpha == Complex64::new(0.0, 0.0))
    }

    /// `g(z)`
    pub fn forward(&self, z: Complex64) -> Complex64 {
        match self.map {
            MapKind::Disk { center, radius, alpha } => {
                let u = (z - center) / radius;
                (u - alpha) / (ONE - alpha.conj() * u)
            }
            MapKind::Ellipse { c, sqrt_k, ref jac } => {
                let arg = (z / c).asin() * (2.0 * jac.complete() / PI);
                jac.sn(arg) * sqrt_k
            }
            MapKind::Rectangle { half_width, ref jac, rot, .. } => {
                // stay in the lower half so sn is evaluated away from its pole
                if z.im > 0.0 {
                    return -self.forward(-z);
                }
                let u = z * (jac.complete() / half_width) + Complex64::new(0.0, 0.5 * jac.complete_complement());
                let s = jac.sn(u);
                let s0 = Complex64::new(0.0, 1.0 / jac.modulus().sqrt());
                rot * (s - s0) / (s + s0)
            }
        }
    }

    /// `g⁻¹(w)` for `|w| <= 1`.
    pub fn inverse(&self, w: Complex64) -> Complex64 {
        match self.map {
            MapKind::Disk { center, radius, alpha } => {
                let u = (w + alpha) / (ONE + alpha.conj() * w);
                center + u * radius
            }
            MapKind::Ellipse { c, sqrt_k, ref jac } => {
                let u = jac.sn_inverse(w / sqrt_k);
                (u * (PI / (2.0 * jac.complete()))).sin() * c
            }
            MapKind::Rectangle { p, scale, .. } => {
                let w2 = w * w;
                w * carlson_rf(ONE - p * w2, ONE - p.conj() * w2, ONE) * scale
            }
        }
    }

    /// `ζ(θ) = g⁻¹(e^{iθ})`
    pub fn boundary_param(&self, theta: f64) -> Complex64 {
        self.inverse(Complex64::from_polar(1.0, theta))
    }

    /// `g'(z0)` by a centred difference (exact closed forms are not needed).
    pub fn derivative_at_base(&self) -> Complex64 {
        let z0 = self.domain.base;
        let h = 1e-5 * (-self.domain.signed_distance(z0));
        (self.forward(z0 + h) - self.forward(z0 - h)) / (2.0 * h)
    }
}

/// Boundary nodes `ζ_j = g⁻¹(e^{2πij/m})` with uniform weights, which is
/// harmonic measure at the base point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundaryQuadrature {
    pub m: usize,
    pub nodes: Vec<Complex64>,
    /// `g(ζ_j)` on the unit circle.
    pub images: Vec<Complex64>,
    pub weights: Vec<f64>,
}

pub fn quadrature(atlas: &ConformalAtlas, m: usize) -> Result<BoundaryQuadrature> {
    if m < 4 {
        return Err(Error::Unsupported(format!("quadrature needs at least 4 nodes, got {m}")));
    }
    let images: Vec<Complex64> = (0..m).map(|j| Complex64::from_polar(1.0, TAU * j as f64 / m as f64)).collect();
    let nodes = images.iter().map(|&w| atlas.inverse(w)).collect();
    Ok(BoundaryQuadrature {
        m,
        nodes,
        images,
        weights: vec![1.0 / m as f64; m],
    })
}

/// Scalar half-plane kernel `h_ζ(z) = (g(ζ) + g(z))/(g(ζ) - g(z))`.
pub fn h_family(atlas: &ConformalAtlas, zeta: Complex64, z: Complex64) -> Complex64 {
    let gz = atlas.forward(zeta);
    let w = atlas.forward(z);
    (gz + w) / (gz - w)
}

/// Matrix kernel `(wI + G)(wI - G)^{-1}` for `w = g(ζ)` on the unit circle.
///
/// `g_spectrum` is `σ(G)`; `node` only labels the error.
pub fn h_matrix(w: Complex64, g: &CMatrix, g_spectrum: &[Complex64], node: usize) -> Result<CMatrix> {
    for &l in g_spectrum {
        let d = (w - l).norm();
        if d <= tol::POLE_MARGIN {
            return Err(Error::NodePole { node, zeta: w, distance: d });
        }
    }
    let n = g.dim();
    let plus = g.shift(w);
    let minus = &CMatrix::scalar(n, w) - g;
    solve(&minus, &plus)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn atlases() -> Vec<ConformalAtlas> {
        [
            Domain::unit_disk(),
            Domain::disk(c(1.0, -1.0), 2.0).unwrap().with_base(c(1.5, -0.5)).unwrap(),
            Domain::ellipse(2.0, 1.0).unwrap(),
            Domain::ellipse(1.0, 0.95).unwrap(),
            Domain::ellipse(5.0, 0.5).unwrap(),
            Domain::square(1.0).unwrap(),
            Domain::rectangle(2.0, 0.5).unwrap(),
            Domain::rectangle(0.7, 1.3).unwrap(),
        ]
        .iter()
        .map(|d| build_atlas(d).unwrap())
        .collect()
    }

    fn interior_grid(d: &Domain) -> Vec<Complex64> {
        let mut pts = Vec::new();
        for i in 0..10 {
            for j in 0..10 {
                let t = TAU * (i as f64 + 0.5) / 10.0;
                let r = 0.05 + 0.9 * j as f64 / 9.0;
                let b = d.boundary_point(t);
                pts.push(d.base + (b - d.base) * r);
            }
        }
        pts
    }

    #[test]
    fn unit_disk_is_identity() {
        let a = build_atlas(&Domain::unit_disk()).unwrap();
        let z = c(0.3, -0.4);
        assert_eq!(a.forward(z), z);
        assert_eq!(a.inverse(z), z);
    }

    #[test]
    fn base_point_and_normalization() {
        for a in atlases() {
            assert!(a.forward(a.domain().base).norm() < 1e-10);
            let d = a.derivative_at_base();
            assert!(d.re > 0.0 && d.im.abs() < 1e-8 * d.re, "{:?}: {d}", a.domain());
        }
    }

    #[test]
    fn boundary_maps_to_circle() {
        for a in atlases() {
            for k in 0..200 {
                let z = a.domain().boundary_point(TAU * (k as f64 + 0.31) / 200.0);
                assert!((a.forward(z).norm() - 1.0).abs() < 1e-8, "{:?} at {z}", a.domain());
            }
        }
    }

    #[test]
    fn round_trip_interior() {
        for a in atlases() {
            for z in interior_grid(a.domain()) {
                let back = a.inverse(a.forward(z));
                assert!((back - z).norm() < 1e-8, "{:?}: {z} -> {back}", a.domain());
            }
        }
    }

    #[test]
    fn odd_when_centred() {
        for a in atlases().into_iter().filter(|a| !matches!(a.domain().shape, Shape::Disk { .. })) {
            for z in interior_grid(a.domain()) {
                assert!((a.forward(-z) + a.forward(z)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn quadrature_nodes() {
        let d = build_atlas(&Domain::unit_disk()).unwrap();
        let q = quadrature(&d, 4).unwrap();
        for (z, w) in q.nodes.iter().zip([c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)]) {
            assert!((z - w).norm() < 1e-15);
        }
        assert!((q.weights.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        let e = build_atlas(&Domain::ellipse(2.0, 1.0).unwrap()).unwrap();
        let q = quadrature(&e, 16).unwrap();
        for z in &q.nodes {
            assert!((z.re * z.re / 4.0 + z.im * z.im - 1.0).abs() < 1e-8);
        }
        assert!(quadrature(&e, 3).is_err());
    }

    #[test]
    fn off_centre_base_rejected_for_ellipse() {
        let d = Domain::ellipse(2.0, 1.0).unwrap().with_base(c(0.1, 0.0)).unwrap();
        assert!(matches!(build_atlas(&d), Err(Error::Unsupported(_))));
    }

    #[test]
    fn h_family_disk_values() {
        let a = build_atlas(&Domain::unit_disk()).unwrap();
        assert!((h_family(&a, c(1.0, 0.0), c(0.0, 0.0)) - 1.0).norm() < 1e-15);
        assert!((h_family(&a, c(1.0, 0.0), c(0.5, 0.0)) - 3.0).norm() < 1e-15);
    }

    #[test]
    fn h_family_ellipse_positive_real_part() {
        let a = build_atlas(&Domain::ellipse(2.0, 1.0).unwrap()).unwrap();
        let grid = interior_grid(a.domain());
        for k in 0..24 {
            let zeta = a.boundary_param(TAU * k as f64 / 24.0);
            assert!((h_family(&a, zeta, c(0.0, 0.0)) - 1.0).norm() < 1e-10);
            for &z in &grid {
                assert!(h_family(&a, zeta, z).re > 0.0);
            }
            let near = zeta * (1.0 - 1e-9);
            assert!(h_family(&a, zeta, near).norm() > 1e6);
        }
    }

    #[test]
    fn harmonic_measure_reproduces_one() {
        for d in [Domain::unit_disk(), Domain::ellipse(2.0, 1.0).unwrap()] {
            let a = build_atlas(&d).unwrap();
            let q = quadrature(&a, 256).unwrap();
            for z in [c(0.3, 0.2), c(-0.5, 0.1), c(0.0, -0.4)] {
                let s: Complex64 = q.nodes.iter().zip(&q.weights).map(|(&zeta, w)| h_family(&a, zeta, z) * *w).sum();
                assert!((s - 1.0).norm() < 1e-8, "{d:?} {z}: {s}");
            }
        }
    }

    #[test]
    fn schwarz_contraction_on_ellipse() {
        let a = build_atlas(&Domain::ellipse(2.0, 1.0).unwrap()).unwrap();
        for z in interior_grid(a.domain()) {
            assert!(a.forward(z).norm() > z.norm() / 2.0);
        }
    }

    #[test]
    fn square_edge_length_matches_complete_integral() {
        // for the square the prevertex angle is π/4 and the edge integral is K(1/√2)/2
        let a = build_atlas(&Domain::square(1.0).unwrap()).unwrap();
        if let MapKind::Rectangle { scale, .. } = a.map {
            assert!((1.0 / scale - 0.5 * 1.8540746773013719).abs() < 1e-14);
        } else {
            unreachable!()
        }
        // the corner is a square-root singularity of g⁻¹, so rounding in the
        // prevertex is amplified to about 1e-8
        let corner = a.inverse(Complex64::from_polar(1.0, 0.25 * PI));
        assert!((corner - c(1.0, 1.0)).norm() < 1e-7, "{corner}");
    }
}
