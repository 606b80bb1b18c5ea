//! Conformal maps of disks, centred ellipses and centred rectangles onto the
//! unit disk, the half-plane family built from them, boundary quadrature for
//! harmonic measure and polynomial approximants of the map.

mod approx;
mod atlas;
pub mod elliptic;

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tol;

pub use approx::{boundary_sup_of, check_spectrum_inside, g_of_matrix, normalize_on_boundary, poly_approx, poly_approx_report, GMatrix, PolyApprox};
pub use atlas::{build_atlas, h_family, h_matrix, quadrature, BoundaryQuadrature, ConformalAtlas};
pub use elliptic::elliptic_kernel;

/// Geometric shape of a supported Jordan domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Shape {
    Disk { center: Complex64, radius: f64 },
    /// Semi-axes `a > b > 0`, centred at the origin.
    Ellipse { a: f64, b: f64 },
    Rectangle { half_width: f64, half_height: f64 },
}

/// A domain together with its base point `z0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DomainRepr")]
pub struct Domain {
    pub shape: Shape,
    pub base: Complex64,
}

#[derive(Deserialize)]
struct DomainRepr {
    shape: Shape,
    base: Complex64,
}

impl TryFrom<DomainRepr> for Domain {
    type Error = Error;
    fn try_from(r: DomainRepr) -> Result<Self> {
        Domain::new(r.shape, r.base)
    }
}

impl Domain {
    pub fn new(shape: Shape, base: Complex64) -> Result<Self> {
        match shape {
            Shape::Disk { center, radius } => {
                if !(radius > 0.0 && radius.is_finite()) || !center.re.is_finite() || !center.im.is_finite() {
                    return Err(Error::InvalidDomain(format!("disk radius must be positive, got {radius}")));
                }
            }
            Shape::Ellipse { a, b } => {
                if !(b > 0.0 && a > b && a.is_finite()) {
                    return Err(Error::InvalidDomain(format!("ellipse needs a > b > 0, got a={a}, b={b}")));
                }
            }
            Shape::Rectangle { half_width, half_height } => {
                if !(half_width > 0.0 && half_height > 0.0 && half_width.is_finite() && half_height.is_finite()) {
                    return Err(Error::InvalidDomain(format!(
                        "rectangle half sides must be positive, got {half_width} x {half_height}"
                    )));
                }
            }
        }
        let d = Self { shape, base };
        if !(d.signed_distance(base) < -tol::BASE_POINT_MARGIN) {
            return Err(Error::InvalidDomain(format!("base point {base} is not strictly interior")));
        }
        Ok(d)
    }

    pub fn unit_disk() -> Self {
        Self::disk(Complex64::new(0.0, 0.0), 1.0).expect("valid")
    }

    /// Disk with base point at its centre.
    pub fn disk(center: Complex64, radius: f64) -> Result<Self> {
        Self::new(Shape::Disk { center, radius }, center)
    }

    pub fn ellipse(a: f64, b: f64) -> Result<Self> {
        Self::new(Shape::Ellipse { a, b }, Complex64::new(0.0, 0.0))
    }

    pub fn rectangle(half_width: f64, half_height: f64) -> Result<Self> {
        Self::new(Shape::Rectangle { half_width, half_height }, Complex64::new(0.0, 0.0))
    }

    /// The square `(-s, s)²`.
    pub fn square(s: f64) -> Result<Self> {
        Self::rectangle(s, s)
    }

    pub fn with_base(self, base: Complex64) -> Result<Self> {
        Self::new(self.shape, base)
    }

    /// Parses `disk:r=1[,c=re+imi]`, `ellipse:a=2,b=1`, `square:s=1` or
    /// `rect:w=2,h=1` (half sides).
    pub fn parse(spec: &str, base: Complex64) -> Result<Self> {
        let shape: Shape = spec.parse()?;
        Self::new(shape, base)
    }

    /// Negative inside, zero on the boundary, positive outside; the magnitude
    /// is the Euclidean distance to the boundary.
    pub fn signed_distance(&self, z: Complex64) -> f64 {
        match self.shape {
            Shape::Disk { center, radius } => (z - center).norm() - radius,
            Shape::Ellipse { a, b } => {
                let (x, y) = (z.re.abs(), z.im.abs());
                let dist = ellipse_distance(a, b, x, y);
                if (x / a).powi(2) + (y / b).powi(2) < 1.0 {
                    -dist
                } else {
                    dist
                }
            }
            Shape::Rectangle { half_width, half_height } => {
                let qx = z.re.abs() - half_width;
                let qy = z.im.abs() - half_height;
                let outside = qx.max(0.0).hypot(qy.max(0.0));
                outside + qx.max(qy).min(0.0)
            }
        }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        self.signed_distance(z) < 0.0
    }

    /// Support function `max Re(e^{-iθ} z)` over the closed domain.
    pub fn support(&self, theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        match self.shape {
            Shape::Disk { center, radius } => center.re * c + center.im * s + radius,
            Shape::Ellipse { a, b } => (a * a * c * c + b * b * s * s).sqrt(),
            Shape::Rectangle { half_width, half_height } => half_width * c.abs() + half_height * s.abs(),
        }
    }

    /// Outward edge normal angles for polygons, where the support test is
    /// exact on finitely many directions.
    pub fn edge_normals(&self) -> Option<Vec<f64>> {
        match self.shape {
            Shape::Rectangle { .. } => Some(vec![0.0, 0.5 * PI, PI, 1.5 * PI]),
            _ => None,
        }
    }

    /// Geometric boundary parametrization over `t ∈ [0, 2π)`; for the
    /// rectangle `t` is proportional to arclength starting at `(w, 0)`.
    pub fn boundary_point(&self, t: f64) -> Complex64 {
        match self.shape {
            Shape::Disk { center, radius } => center + Complex64::from_polar(radius, t),
            Shape::Ellipse { a, b } => Complex64::new(a * t.cos(), b * t.sin()),
            Shape::Rectangle { half_width: w, half_height: h } => {
                let perim = 4.0 * (w + h);
                let mut s = t.rem_euclid(TAU) / TAU * perim;
                // legs: right (upper half), top, left, bottom, right (lower half)
                let legs = [(h, 0), (2.0 * w, 1), (2.0 * h, 2), (2.0 * w, 3), (h, 4)];
                for (len, id) in legs {
                    if s <= len || id == 4 {
                        return match id {
                            0 => Complex64::new(w, s),
                            1 => Complex64::new(w - s, h),
                            2 => Complex64::new(-w, h - s),
                            3 => Complex64::new(-w + s, -h),
                            _ => Complex64::new(w, -h + s.min(h)),
                        };
                    }
                    s -= len;
                }
                unreachable!()
            }
        }
    }

    pub fn label(&self) -> String {
        self.shape.to_string()
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Shape::Disk { center, radius } => {
                if center == Complex64::new(0.0, 0.0) {
                    write!(f, "disk:r={radius}")
                } else {
                    write!(f, "disk:r={radius},c={}{:+}i", center.re, center.im)
                }
            }
            Shape::Ellipse { a, b } => write!(f, "ellipse:a={a},b={b}"),
            Shape::Rectangle { half_width, half_height } if half_width == half_height => write!(f, "square:s={half_width}"),
            Shape::Rectangle { half_width, half_height } => write!(f, "rect:w={half_width},h={half_height}"),
        }
    }
}

impl FromStr for Shape {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidDomain(format!("{msg} in '{spec}'"));
        let (kind, params) = spec.split_once(':').unwrap_or((spec, ""));
        let mut kv = Vec::new();
        for part in params.split(',').filter(|p| !p.trim().is_empty()) {
            let (k, v) = part.split_once('=').ok_or_else(|| bad("expected key=value"))?;
            kv.push((k.trim().to_ascii_lowercase(), v.trim().to_string()));
        }
        let take = |key: &str| -> Result<Option<f64>> {
            kv.iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.parse::<f64>().map_err(|_| bad(&format!("bad number for {key}"))))
                .transpose()
        };
        let need = |key: &str| take(key)?.ok_or_else(|| bad(&format!("missing {key}")));
        let allow = |keys: &[&str]| -> Result<()> {
            match kv.iter().find(|(k, _)| !keys.contains(&k.as_str())) {
                Some((k, _)) => Err(bad(&format!("unknown key {k}"))),
                None => Ok(()),
            }
        };
        match kind.trim().to_ascii_lowercase().as_str() {
            "disk" => {
                allow(&["r", "c"])?;
                let radius = take("r")?.unwrap_or(1.0);
                let center = match kv.iter().find(|(k, _)| k == "c") {
                    Some((_, v)) => crate::io::parse_complex(v)?,
                    None => Complex64::new(0.0, 0.0),
                };
                Ok(Shape::Disk { center, radius })
            }
            "ellipse" => {
                allow(&["a", "b"])?;
                Ok(Shape::Ellipse { a: need("a")?, b: need("b")? })
            }
            "square" => {
                allow(&["s"])?;
                let s = take("s")?.unwrap_or(1.0);
                Ok(Shape::Rectangle { half_width: s, half_height: s })
            }
            "rect" | "rectangle" => {
                allow(&["w", "h"])?;
                Ok(Shape::Rectangle {
                    half_width: need("w")?,
                    half_height: need("h")?,
                })
            }
            other => Err(Error::InvalidDomain(format!("unknown domain kind '{other}'"))),
        }
    }
}

/// Distance from `(y0, y1)` in the closed first quadrant to the ellipse with
/// semi-axes `e0 >= e1`.
fn ellipse_distance(e0: f64, e1: f64, y0: f64, y1: f64) -> f64 {
    if y1 > 0.0 {
        if y0 > 0.0 {
            let z0 = y0 / e0;
            let z1 = y1 / e1;
            let g = z0 * z0 + z1 * z1 - 1.0;
            if g == 0.0 {
                return 0.0;
            }
            let r0 = (e0 / e1).powi(2);
            let s = ellipse_root(r0, z0, z1, g);
            let x0 = r0 * y0 / (s + r0);
            let x1 = y1 / (s + 1.0);
            (x0 - y0).hypot(x1 - y1)
        } else {
            (y1 - e1).abs()
        }
    } else {
        let numer = e0 * y0;
        let denom = e0 * e0 - e1 * e1;
        if numer < denom {
            let xde = numer / denom;
            let x0 = e0 * xde;
            let x1 = e1 * (1.0 - xde * xde).max(0.0).sqrt();
            (x0 - y0).hypot(x1)
        } else {
            (y0 - e0).abs()
        }
    }
}

fn ellipse_root(r0: f64, z0: f64, z1: f64, g: f64) -> f64 {
    let n0 = r0 * z0;
    let mut s0 = z1 - 1.0;
    let mut s1 = if g < 0.0 { 0.0 } else { n0.hypot(z1) - 1.0 };
    let mut s = 0.0;
    for _ in 0..1100 {
        s = 0.5 * (s0 + s1);
        if s == s0 || s == s1 {
            break;
        }
        let ratio0 = n0 / (s + r0);
        let ratio1 = z1 / (s + 1.0);
        let gs = ratio0 * ratio0 + ratio1 * ratio1 - 1.0;
        if gs > 0.0 {
            s0 = s;
        } else if gs < 0.0 {
            s1 = s;
        } else {
            break;
        }
    }
    s
}
