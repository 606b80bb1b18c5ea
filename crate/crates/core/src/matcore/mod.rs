//! Dense complex matrices and the eigensolvers everything else is built on.

mod herm;
mod lu;
mod qr;
mod schur;

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tol;

pub use herm::{herm_eig, herm_eigenvalues, lambda_max, lambda_min, HermEig};
pub use lu::{inverse, solve};
pub use qr::{least_squares, LeastSquares};
pub use schur::{gen_eig, min_singular_value, Spectrum};


pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense square complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![ZERO; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::scalar(n, ONE)
    }

    pub fn scalar(n: usize, s: Complex64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = s;
        }
        m
    }

    pub fn diag(values: &[Complex64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let v: Vec<Complex64> = values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::diag(&v)
    }

    /// Builds a matrix from a row-major buffer, validating shape and finiteness.
    pub fn from_vec(n: usize, data: Vec<Complex64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::NotSquare { rows: 0, cols: 0 });
        }
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                left: n * n,
                right: data.len(),
            });
        }
        if let Some(k) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite {
                row: k / n,
                col: k % n,
            });
        }
        Ok(Self { n, data })
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::NotSquare {
                rows: n,
                cols: r.len(),
            });
        }
        Self::from_vec(n, rows.iter().flatten().copied().collect())
    }

    /// Real-entry convenience constructor, mostly for tests and examples.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    /// Hermitian part `(A + A*)/2`, symmetrized so the result is exactly Hermitian.
    pub fn re_part(&self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            out[(i, i)] = Complex64::new(self[(i, i)].re, 0.0);
            for j in (i + 1)..n {
                let v = (self[(i, j)] + self[(j, i)].conj()) * 0.5;
                out[(i, j)] = v;
                out[(j, i)] = v.conj();
            }
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    /// `self + s*I`
    pub fn shift(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            out[(i, i)] += s;
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Spectral norm, the largest singular value.
    pub fn op_norm(&self) -> f64 {
        let gram = self.adjoint().matmul(self).re_part();
        match herm_eig(&gram) {
            Ok(e) => e.values.last().copied().unwrap_or(0.0).max(0.0).sqrt(),
            // Gram matrices are Hermitian by construction; Jacobi always converges.
            Err(_) => self.frobenius(),
        }
    }

    pub fn hermitian_defect(&self) -> f64 {
        (self - &self.adjoint()).frobenius()
    }

    pub fn is_hermitian(&self, rel_tol: f64) -> bool {
        self.hermitian_defect() <= rel_tol * self.frobenius().max(f64::MIN_POSITIVE)
    }

    pub fn matmul(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n, "matmul dimension mismatch");
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let row = &rhs.data[k * n..(k + 1) * n];
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        (0..n)
            .map(|i| (0..n).map(|j| self[(i, j)] * x[j]).sum())
            .collect()
    }

    /// `x* A x`
    pub fn quadratic_form(&self, x: &[Complex64]) -> Complex64 {
        let ax = self.matvec(x);
        x.iter().zip(&ax).map(|(xi, yi)| xi.conj() * yi).sum()
    }

    pub fn pow(&self, k: u32) -> CMatrix {
        let mut acc = CMatrix::identity(self.n);
        for _ in 0..k {
            acc = acc.matmul(self);
        }
        acc
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.n).map(|i| self[(i, j)]).collect()
    }

    /// Direct sum `self ⊕ other`.
    pub fn direct_sum(&self, other: &CMatrix) -> CMatrix {
        let n = self.n + other.n;
        let mut out = Self::zeros(n);
        for i in 0..self.n {
            for j in 0..self.n {
                out[(i, j)] = self[(i, j)];
            }
        }
        for i in 0..other.n {
            for j in 0..other.n {
                out[(self.n + i, self.n + j)] = other[(i, j)];
            }
        }
        out
    }

    pub fn block(&self, row: usize, col: usize, size: usize) -> CMatrix {
        let mut out = Self::zeros(size);
        for i in 0..size {
            for j in 0..size {
                out[(i, j)] = self[(row + i, col + j)];
            }
        }
        out
    }

    pub fn set_block(&mut self, row: usize, col: usize, b: &CMatrix) {
        for i in 0..b.n {
            for j in 0..b.n {
                self[(row + i, col + j)] = b[(i, j)];
            }
        }
    }

    pub(crate) fn ensure_finite(&self) -> Result<()> {
        match self
            .data
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            Some(k) => Err(Error::NonFinite {
                row: k / self.n,
                col: k % self.n,
            }),
            None => Ok(()),
        }
    }
}

/// Hermitian part `(T + T*)/2`.
pub fn re_part(t: &CMatrix) -> CMatrix {
    t.re_part()
}

/// Spectral norm of `a`.
pub fn op_norm(a: &CMatrix) -> f64 {
    a.op_norm()
}

/// Principal square root of a positive semidefinite Hermitian matrix.
///
/// Eigenvalues in `[-PSD_FLOOR, 0)` are treated as round-off and clamped to zero.
pub fn psd_sqrt(a: &CMatrix) -> Result<CMatrix> {
    psd_sqrt_with_floor(a, tol::PSD_FLOOR)
}

pub fn psd_sqrt_with_floor(a: &CMatrix, floor: f64) -> Result<CMatrix> {
    let eig = herm_eig(a)?;
    if let Some(&lo) = eig.values.first() {
        if lo < -floor {
            return Err(Error::NotPsd { eigenvalue: lo });
        }
    }
    let roots: Vec<f64> = eig.values.iter().map(|&l| l.max(0.0).sqrt()).collect();
    Ok(eig.reconstruct_with(&roots))
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

impl<'a> Add<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n, "add dimension mismatch");
        CMatrix {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<'a> Sub<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n, "sub dimension mismatch");
        CMatrix {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl<'a> Mul<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs)
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        self.scale_real(-1.0)
    }
}

impl AddAssign<&CMatrix> for CMatrix {
    fn add_assign(&mut self, rhs: &CMatrix) {
        assert_eq!(self.n, rhs.n, "add dimension mismatch");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix({}x{})", self.n, self.n)?;
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n)
                .map(|j| {
                    let z = self[(i, j)];
                    format!("{:+.6}{:+.6}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}
