//! Cyclic Jacobi eigensolver for complex Hermitian matrices.

use num_complex::Complex64;

use super::{CMatrix, ZERO};
use crate::error::{Error, Result};
use crate::tol;

const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition `A = V diag(values) V*` with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct HermEig {
    pub values: Vec<f64>,
    /// Column `k` is the unit eigenvector for `values[k]`.
    pub vectors: CMatrix,
}

impl HermEig {
    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        self.vectors.column(k)
    }

    /// `V diag(f) V*` for replacement eigenvalues `f`.
    pub fn reconstruct_with(&self, f: &[f64]) -> CMatrix {
        let n = self.vectors.dim();
        let mut out = CMatrix::zeros(n);
        for (k, &fk) in f.iter().enumerate() {
            if fk == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = self.vectors[(i, k)] * fk;
                for j in 0..n {
                    out[(i, j)] += vik * self.vectors[(j, k)].conj();
                }
            }
        }
        out.re_part()
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.reconstruct_with(&self.values)
    }
}

/// Eigenvalues and eigenvectors of a Hermitian matrix.
pub fn herm_eig(a: &CMatrix) -> Result<HermEig> {
    let mut v = CMatrix::identity(a.dim());
    let m = jacobi(a, Some(&mut v))?;
    Ok(finish(m, v))
}

/// Ascending eigenvalues only; skips the eigenvector accumulation.
pub fn herm_eigenvalues(a: &CMatrix) -> Result<Vec<f64>> {
    let m = jacobi(a, None)?;
    let mut values: Vec<f64> = (0..m.dim()).map(|i| m[(i, i)].re).collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Diagonalizes in place, accumulating rotations into `v` when given.
fn jacobi(a: &CMatrix, mut v: Option<&mut CMatrix>) -> Result<CMatrix> {
    a.ensure_finite()?;
    let scale = a.frobenius();
    let defect = a.hermitian_defect();
    if defect > tol::HERMITIAN_REL * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::NotHermitian { deviation: defect });
    }
    let n = a.dim();
    let mut m = a.re_part();
    if n == 1 || scale == 0.0 {
        return Ok(m);
    }

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            return Ok(m);
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                rotate(&mut m, v.as_deref_mut(), p, q);
            }
        }
    }
    Err(Error::NoConvergence {
        method: "Hermitian Jacobi",
        iterations: MAX_SWEEPS,
    })
}

/// One complex Jacobi rotation annihilating `m[p][q]`.
fn rotate(m: &mut CMatrix, v: Option<&mut CMatrix>, p: usize, q: usize) {
    let apq = m[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    // Reduce to the real symmetric case with the phase e^{iφ} = apq/|apq|.
    let phase = apq / mag;
    let theta = (aqq - app) / (2.0 * mag);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    // G = [[c, s·phase], [-s·conj(phase), c]] zeroes (G* M G)_{pq}.
    let n = m.dim();
    let sp = phase * s;
    let cc = Complex64::new(c, 0.0);
    // M <- M G
    for k in 0..n {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = mkp * cc - mkq * sp.conj();
        m[(k, q)] = mkp * sp + mkq * cc;
    }
    // M <- G* M
    for k in 0..n {
        let mpk = m[(p, k)];
        let mqk = m[(q, k)];
        m[(p, k)] = mpk * cc - mqk * sp;
        m[(q, k)] = mpk * sp.conj() + mqk * cc;
    }
    m[(p, q)] = ZERO;
    m[(q, p)] = ZERO;
    m[(p, p)] = Complex64::new(m[(p, p)].re, 0.0);
    m[(q, q)] = Complex64::new(m[(q, q)].re, 0.0);
    if let Some(v) = v {
        for k in 0..n {
            let vkp = v[(k, p)];
            let vkq = v[(k, q)];
            v[(k, p)] = vkp * cc - vkq * sp.conj();
            v[(k, q)] = vkp * sp + vkq * cc;
        }
    }
}

fn finish(m: CMatrix, v: CMatrix) -> HermEig {
    let n = m.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let mut vectors = CMatrix::zeros(n);
    for (new, &old) in order.iter().enumerate() {
        for i in 0..n {
            vectors[(i, new)] = v[(i, old)];
        }
    }
    HermEig { values, vectors }
}

/// Largest eigenvalue of a Hermitian matrix.
pub fn lambda_max(a: &CMatrix) -> Result<f64> {
    Ok(*herm_eigenvalues(a)?.last().expect("nonempty"))
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn lambda_min(a: &CMatrix) -> Result<f64> {
    Ok(herm_eigenvalues(a)?[0])
}
