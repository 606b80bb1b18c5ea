//! Jacobi elliptic functions, complete integrals and Carlson's `R_F`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Arithmetic-geometric mean of two nonnegative numbers.
pub fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..64 {
        if (a - b).abs() <= 1e-16 * a {
            break;
        }
        let m = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = m;
    }
    0.5 * (a + b)
}

/// `K` for the modulus whose complementary modulus is `kp`.
pub fn complete_from_complement(kp: f64) -> f64 {
    FRAC_PI_2 / agm(1.0, kp)
}

/// Carlson's symmetric integral `R_F(x, y, z)` by duplication.
///
/// Valid on the cut plane with at most one argument zero.
pub fn carlson_rf(mut x: Complex64, mut y: Complex64, mut z: Complex64) -> Complex64 {
    for _ in 0..200 {
        let a = (x + y + z) / 3.0;
        let dev = (1.0 - x / a).norm().max((1.0 - y / a).norm()).max((1.0 - z / a).norm());
        if dev < 1e-3 {
            break;
        }
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lam = sx * sy + sy * sz + sz * sx;
        x = (x + lam) * 0.25;
        y = (y + lam) * 0.25;
        z = (z + lam) * 0.25;
    }
    let a = (x + y + z) / 3.0;
    let dx = 1.0 - x / a;
    let dy = 1.0 - y / a;
    let dz = -(dx + dy);
    let e2 = dx * dy - dz * dz;
    let e3 = dx * dy * dz;
    (1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - e3 * e2 * (3.0 / 44.0)) / a.sqrt()
}

fn theta_pair(q: f64) -> (f64, f64, f64) {
    // θ2, θ3, θ4 at nome q
    let mut t2 = 0.0;
    let mut t3 = 1.0;
    let mut t4 = 1.0;
    for n in 0..200u32 {
        let nf = n as f64;
        let e2 = q.powf(nf * (nf + 1.0));
        t2 += e2;
        if n > 0 {
            let e3 = q.powf(nf * nf);
            t3 += 2.0 * e3;
            t4 += if n % 2 == 0 { 2.0 * e3 } else { -2.0 * e3 };
            if e3 < 1e-18 && e2 < 1e-18 {
                break;
            }
        }
    }
    (2.0 * q.powf(0.25) * t2, t3, t4)
}

/// Modulus and complementary modulus for nome `q ∈ (0, 1)`.
pub fn modulus_from_nome(q: f64) -> Result<(f64, f64)> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::ModulusOutOfRange(q));
    }
    // The series converge fastest below e^{-π}; above it use the complementary nome.
    if q <= (-PI).exp() {
        let (t2, t3, t4) = theta_pair(q);
        Ok(((t2 / t3).powi(2), (t4 / t3).powi(2)))
    } else {
        let qc = (PI * PI / q.ln()).exp();
        let (t2, t3, t4) = theta_pair(qc);
        Ok(((t4 / t3).powi(2), (t2 / t3).powi(2)))
    }
}

/// Jacobi elliptic functions for a fixed modulus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jacobi {
    k: f64,
    kp: f64,
    big_k: f64,
    big_kp: f64,
}

/// The complete integral and `sn` handle for modulus `k`.
pub fn elliptic_kernel(k: f64) -> Result<Jacobi> {
    Jacobi::new(k)
}

impl Jacobi {
    pub fn new(k: f64) -> Result<Self> {
        if !(k > 0.0 && k < 1.0) {
            return Err(Error::ModulusOutOfRange(k));
        }
        let kp = ((1.0 - k) * (1.0 + k)).sqrt();
        Self::with_complement(k, kp)
    }

    /// Builds from both moduli, avoiding cancellation in `sqrt(1 - k²)`.
    pub fn with_complement(k: f64, kp: f64) -> Result<Self> {
        // k or k' may round to 1 when the other is tiny
        if !(k > 0.0 && k <= 1.0) {
            return Err(Error::ModulusOutOfRange(k));
        }
        if !(kp > 0.0 && kp <= 1.0) || (k * k + kp * kp - 1.0).abs() > 1e-12 {
            return Err(Error::ModulusOutOfRange(kp));
        }
        Ok(Self {
            k,
            kp,
            big_k: complete_from_complement(kp),
            big_kp: complete_from_complement(k),
        })
    }

    pub fn modulus(&self) -> f64 {
        self.k
    }

    pub fn complement(&self) -> f64 {
        self.kp
    }

    /// `K(k)`
    pub fn complete(&self) -> f64 {
        self.big_k
    }

    /// `K'(k) = K(k')`
    pub fn complete_complement(&self) -> f64 {
        self.big_kp
    }

    pub fn sn_real(&self, u: f64) -> f64 {
        landen(u, self.k, self.kp).0
    }

    pub fn sn(&self, u: Complex64) -> Complex64 {
        self.sn_cn_dn(u).0
    }

    /// `(sn, cn, dn)` at complex argument by the imaginary-argument
    /// addition formula.
    pub fn sn_cn_dn(&self, u: Complex64) -> (Complex64, Complex64, Complex64) {
        let (s, c, d) = landen(u.re, self.k, self.kp);
        if u.im == 0.0 {
            return (s.into(), c.into(), d.into());
        }
        let (s1, c1, d1) = landen(u.im, self.kp, self.k);
        let k2 = self.k * self.k;
        let den = c1 * c1 + k2 * s * s * s1 * s1;
        (
            Complex64::new(s * d1, c * d * s1 * c1) / den,
            Complex64::new(c * c1, -s * d * s1 * d1) / den,
            Complex64::new(d * c1 * d1, -k2 * s * c * s1) / den,
        )
    }

    /// Inverse of `sn` on the principal sheet: `s R_F(1 - s², 1 - k²s², 1)`.
    pub fn sn_inverse(&self, s: Complex64) -> Complex64 {
        let s2 = s * s;
        s * carlson_rf(1.0 - s2, 1.0 - s2 * (self.k * self.k), Complex64::new(1.0, 0.0))
    }
}

/// Real `(sn, cn, dn)(u | k)` by the descending Landen (AGM) scheme.
fn landen(u: f64, k: f64, kp: f64) -> (f64, f64, f64) {
    let mut a = vec![1.0];
    let mut c = vec![k];
    let mut b = kp;
    while c.last().copied().unwrap_or(0.0).abs() > 1e-16 && a.len() < 40 {
        let an = *a.last().unwrap();
        let next_c = 0.5 * (an - b);
        let next_a = 0.5 * (an + b);
        b = (an * b).sqrt();
        a.push(next_a);
        c.push(next_c);
    }
    let n = a.len() - 1;
    let mut phi = (1u64 << n) as f64 * a[n] * u;
    let mut prev = phi;
    for j in (1..=n).rev() {
        prev = phi;
        phi = 0.5 * (phi + (c[j] / a[j] * phi.sin()).asin());
    }
    let sn = phi.sin();
    let cn = phi.cos();
    let dn = if n == 0 { 1.0 } else { cn / (prev - phi).cos() };
    (sn, cn, dn)
}
