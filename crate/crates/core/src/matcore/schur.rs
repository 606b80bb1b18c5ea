//! General complex eigenvalues: Hessenberg reduction followed by
//! Wilkinson-shifted QR sweeps on the active window.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{herm_eig, CMatrix, ONE, ZERO};
use crate::error::{Error, Result};

const ITERS_PER_EIGENVALUE: usize = 60;

/// Eigenvalues with multiplicity, plus the smallest singular value of
/// `T - λI` for each as a residual certificate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Spectrum {
    pub points: Vec<Complex64>,
    pub residuals: Vec<f64>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn radius(&self) -> f64 {
        self.points.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Sorted copy, for multiset comparisons.
    pub fn sorted(&self) -> Vec<Complex64> {
        let mut p = self.points.clone();
        p.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        p
    }
}

/// Eigenvalues of a general complex matrix.
pub fn gen_eig(a: &CMatrix) -> Result<Spectrum> {
    a.ensure_finite()?;
    let points = match qr_eigenvalues(a) {
        Ok(p) => p,
        Err(e) if a.dim() <= 4 => charpoly_eigenvalues(a).ok_or(e)?,
        Err(e) => return Err(e),
    };
    let residuals = points
        .iter()
        .map(|&l| min_singular_value(&a.shift(-l)))
        .collect();
    Ok(Spectrum { points, residuals })
}

/// Smallest singular value via the Gram matrix (accurate to about sqrt(eps)·||A||).
pub fn min_singular_value(a: &CMatrix) -> f64 {
    let gram = a.adjoint().matmul(a).re_part();
    herm_eig(&gram)
        .map(|e| e.values[0].max(0.0).sqrt())
        .unwrap_or(f64::NAN)
}

fn hessenberg(a: &CMatrix) -> CMatrix {
    let n = a.dim();
    let mut h = a.clone();
    for k in 0..n.saturating_sub(2) {
        let x: Vec<Complex64> = ((k + 1)..n).map(|i| h[(i, k)]).collect();
        let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { ONE };
        let mut v = x;
        v[0] += phase * norm;
        let vn2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vn2 == 0.0 {
            continue;
        }
        // H <- P H P with P = I - 2 v v*/|v|^2 acting on indices k+1..n
        for j in 0..n {
            let dot: Complex64 = v
                .iter()
                .enumerate()
                .map(|(i, vi)| vi.conj() * h[(k + 1 + i, j)])
                .sum();
            let f = dot * (2.0 / vn2);
            for (i, vi) in v.iter().enumerate() {
                h[(k + 1 + i, j)] -= f * vi;
            }
        }
        for i in 0..n {
            let dot: Complex64 = v
                .iter()
                .enumerate()
                .map(|(j, vj)| h[(i, k + 1 + j)] * vj)
                .sum();
            let f = dot * (2.0 / vn2);
            for (j, vj) in v.iter().enumerate() {
                h[(i, k + 1 + j)] -= f * vj.conj();
            }
        }
        for i in (k + 2)..n {
            h[(i, k)] = ZERO;
        }
    }
    h
}

fn givens(x: Complex64, y: Complex64) -> (f64, Complex64) {
    let nx = x.norm();
    let ny = y.norm();
    if ny == 0.0 {
        return (1.0, ZERO);
    }
    if nx == 0.0 {
        return (0.0, ONE);
    }
    let r = nx.hypot(ny);
    (nx / r, (x / nx) * y.conj() / r)
}

fn qr_eigenvalues(a: &CMatrix) -> Result<Vec<Complex64>> {
    let n = a.dim();
    let mut h = hessenberg(a);
    let mut eig = vec![ZERO; n];
    let mut hi = n - 1;
    let mut iter = 0usize;
    let scale = a.frobenius().max(f64::MIN_POSITIVE);

    loop {
        if hi == 0 {
            eig[0] = h[(0, 0)];
            break;
        }
        let mut l = hi;
        while l > 0 {
            let s = h[(l, l)].norm() + h[(l - 1, l - 1)].norm();
            let s = if s == 0.0 { scale } else { s };
            if h[(l, l - 1)].norm() <= f64::EPSILON * s {
                h[(l, l - 1)] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == hi {
            eig[hi] = h[(hi, hi)];
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        if iter > ITERS_PER_EIGENVALUE {
            return Err(Error::NoConvergence {
                method: "shifted QR",
                iterations: ITERS_PER_EIGENVALUE,
            });
        }
        let mu = if iter % 11 == 10 {
            // exceptional shift
            h[(hi, hi)] + Complex64::new(0.75 * h[(hi, hi - 1)].norm(), 0.5 * h[(hi, hi - 1)].norm())
        } else {
            wilkinson(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };
        for k in l..=hi {
            h[(k, k)] -= mu;
        }
        let mut rots = Vec::with_capacity(hi - l);
        for k in l..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            for j in k..=hi {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = x * c + s * y;
                h[(k + 1, j)] = -s.conj() * x + y * c;
            }
            rots.push((c, s));
        }
        for (idx, &(c, s)) in rots.iter().enumerate() {
            let k = l + idx;
            for i in l..=(k + 1).min(hi) {
                let x = h[(i, k)];
                let y = h[(i, k + 1)];
                h[(i, k)] = x * c + s.conj() * y;
                h[(i, k + 1)] = -s * x + y * c;
            }
        }
        for k in l..=hi {
            h[(k, k)] += mu;
        }
    }
    Ok(eig)
}

/// Eigenvalue of the trailing 2x2 block closest to its last diagonal entry.
fn wilkinson(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr * 0.25 - det).sqrt();
    let l1 = tr * 0.5 + disc;
    let l2 = tr * 0.5 - disc;
    if (l1 - d).norm() < (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Fallback for tiny matrices: characteristic polynomial (Faddeev-LeVerrier)
/// and simultaneous Durand-Kerner root iteration.
fn charpoly_eigenvalues(a: &CMatrix) -> Option<Vec<Complex64>> {
    let n = a.dim();
    // coeffs of det(zI - A) = z^n + c[1] z^{n-1} + ... + c[n]
    let mut c = vec![ZERO; n + 1];
    c[0] = ONE;
    let mut m = CMatrix::zeros(n);
    for k in 1..=n {
        m = a.matmul(&m).shift(c[k - 1]);
        c[k] = -a.matmul(&m).trace() / k as f64;
    }
    let radius = 1.0 + c.iter().skip(1).map(|z| z.norm()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius * 0.9, 0.4 + 2.0 * std::f64::consts::PI * k as f64 / n as f64))
        .collect();
    let eval = |x: Complex64| c.iter().fold(ZERO, |acc, &ck| acc * x + ck);
    for _ in 0..500 {
        let mut delta = 0.0f64;
        for i in 0..n {
            let denom: Complex64 = (0..n).filter(|&j| j != i).map(|j| z[i] - z[j]).product();
            if denom.norm() == 0.0 {
                z[i] += Complex64::new(1e-8, 1e-8);
                continue;
            }
            let step = eval(z[i]) / denom;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta <= 1e-15 * radius {
            return Some(z);
        }
    }
    Some(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close_multiset(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
        let mut used = vec![false; b.len()];
        a.iter().all(|x| {
            let best = b
                .iter()
                .enumerate()
                .filter(|(j, _)| !used[*j])
                .min_by(|l, r| (l.1 - x).norm().total_cmp(&(r.1 - x).norm()));
            match best {
                Some((j, y)) if (y - x).norm() <= tol => {
                    used[j] = true;
                    true
                }
                _ => false,
            }
        })
    }

    #[test]
    fn triangular_gives_diagonal() {
        let a = CMatrix::from_real_rows(&[&[1.0, 5.0, -2.0], &[0.0, 3.0, 7.0], &[0.0, 0.0, -4.0]]).unwrap();
        let s = gen_eig(&a).unwrap();
        let expect = [Complex64::new(1.0, 0.0), Complex64::new(3.0, 0.0), Complex64::new(-4.0, 0.0)];
        assert!(close_multiset(&s.points, &expect, 1e-12));
    }

    #[test]
    fn crouzeix_spectrum() {
        let s3 = 3f64.sqrt();
        let t = CMatrix::from_real_rows(&[&[s3, 2.0], &[0.0, -s3]]).unwrap();
        let s = gen_eig(&t).unwrap();
        let expect = [Complex64::new(s3, 0.0), Complex64::new(-s3, 0.0)];
        assert!(close_multiset(&s.points, &expect, 1e-12));
        assert!(s.residuals.iter().all(|&r| r < 1e-7));
    }

    #[test]
    fn companion_of_z2_minus_1() {
        let c = CMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let s = gen_eig(&c).unwrap();
        let expect = [Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0)];
        assert!(close_multiset(&s.points, &expect, 1e-14));
    }

    #[test]
    fn rotation_has_complex_pair() {
        let r = CMatrix::from_real_rows(&[&[0.0, -1.0], &[1.0, 0.0]]).unwrap();
        let s = gen_eig(&r).unwrap();
        let expect = [Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0)];
        assert!(close_multiset(&s.points, &expect, 1e-14));
    }

    #[test]
    fn charpoly_fallback_agrees() {
        let a = CMatrix::from_rows(&[
            vec![Complex64::new(1.0, 1.0), Complex64::new(2.0, 0.0), ZERO],
            vec![Complex64::new(0.5, 0.0), Complex64::new(-1.0, 0.0), Complex64::new(0.0, 1.0)],
            vec![ZERO, Complex64::new(1.0, -1.0), Complex64::new(2.0, 0.0)],
        ])
        .unwrap();
        let qr = qr_eigenvalues(&a).unwrap();
        let cp = charpoly_eigenvalues(&a).unwrap();
        assert!(close_multiset(&qr, &cp, 1e-9));
    }

    #[test]
    fn larger_matrix_traces() {
        let n = 40;
        let mut a = CMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let x = ((i * 31 + j * 17) % 23) as f64 / 23.0 - 0.5;
                let y = ((i * 7 + j * 29) % 19) as f64 / 19.0 - 0.5;
                a[(i, j)] = Complex64::new(x, y);
            }
        }
        let s = gen_eig(&a).unwrap();
        let sum: Complex64 = s.points.iter().sum();
        assert!((sum - a.trace()).norm() < 1e-10);
        assert!(s.residuals.iter().all(|&r| r < 1e-6 * a.frobenius()));
    }

    proptest! {
        #[test]
        fn similarity_invariance(n in 2usize..7, v in prop::collection::vec(-1.0f64..1.0, 4 * 36)) {
            let mut a = CMatrix::zeros(n);
            let mut s = CMatrix::identity(n);
            for i in 0..n {
                for j in 0..n {
                    let k = 2 * (i * n + j);
                    a[(i, j)] = Complex64::new(v[k], v[k + 1]);
                    s[(i, j)] += Complex64::new(0.3 * v[72 + k], 0.3 * v[73 + k]);
                }
            }
            if let Ok(sinv) = crate::matcore::inverse(&s) {
                prop_assume!(s.op_norm() * sinv.op_norm() < 50.0);
                let b = s.matmul(&a).matmul(&sinv);
                let ea = gen_eig(&a).unwrap();
                let eb = gen_eig(&b).unwrap();
                prop_assert!(close_multiset(&ea.points, &eb.points, 1e-6));
            }
        }
    }
}
