use num_complex::Complex64;

use super::{CMatrix, ZERO};
use crate::error::{Error, Result};
use crate::tol;

/// Solves `A X = B` by Gaussian elimination with partial pivoting.
///
/// A pivot smaller than `PIVOT_REL * ||A||_F` is reported as singular.
pub fn solve(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    a.ensure_finite()?;
    b.ensure_finite()?;
    let n = a.dim();
    let threshold = tol::PIVOT_REL * a.frobenius();
    let mut lu = a.clone();
    let mut x = b.clone();

    for col in 0..n {
        let (piv, mag) = (col..n)
            .map(|r| (r, lu[(r, col)].norm()))
            .max_by(|l, r| l.1.total_cmp(&r.1))
            .expect("nonempty range");
        if mag <= threshold || mag == 0.0 {
            return Err(Error::Singular {
                column: col,
                pivot: mag,
            });
        }
        if piv != col {
            for j in 0..n {
                let tmp = lu[(col, j)];
                lu[(col, j)] = lu[(piv, j)];
                lu[(piv, j)] = tmp;
                let tmp = x[(col, j)];
                x[(col, j)] = x[(piv, j)];
                x[(piv, j)] = tmp;
            }
        }
        let pivot = lu[(col, col)];
        for r in (col + 1)..n {
            let factor = lu[(r, col)] / pivot;
            if factor == ZERO {
                continue;
            }
            lu[(r, col)] = ZERO;
            for j in (col + 1)..n {
                let v = lu[(col, j)];
                lu[(r, j)] -= factor * v;
            }
            for j in 0..n {
                let v = x[(col, j)];
                x[(r, j)] -= factor * v;
            }
        }
    }

    for r in (0..n).rev() {
        for j in 0..n {
            let mut acc: Complex64 = x[(r, j)];
            for k in (r + 1)..n {
                acc -= lu[(r, k)] * x[(k, j)];
            }
            x[(r, j)] = acc / lu[(r, r)];
        }
    }
    Ok(x)
}

pub fn inverse(a: &CMatrix) -> Result<CMatrix> {
    solve(a, &CMatrix::identity(a.dim()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_solve() {
        let b = CMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        assert_eq!(solve(&CMatrix::identity(2), &b).unwrap(), b);
    }

    #[test]
    fn diagonal_inverse() {
        let x = inverse(&CMatrix::diag_real(&[2.0, 4.0])).unwrap();
        assert!((&x - &CMatrix::diag_real(&[0.5, 0.25])).max_abs() < 1e-15);
    }

    #[test]
    fn nilpotent_perturbation() {
        // (I - 0.5 [[0,2],[0,0]])^{-1} = [[1,1],[0,1]]
        let n = CMatrix::from_real_rows(&[&[0.0, 2.0], &[0.0, 0.0]]).unwrap();
        let a = &CMatrix::identity(2) - &n.scale_real(0.5);
        let x = inverse(&a).unwrap();
        let expect = CMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap();
        assert!((&x - &expect).max_abs() < 1e-15);
    }

    #[test]
    fn singular_reports_pivot() {
        let a = CMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0]]).unwrap();
        match solve(&a, &CMatrix::identity(2)) {
            Err(Error::Singular { column, pivot }) => {
                assert_eq!(column, 1);
                assert!(pivot < 1e-12);
            }
            other => panic!("expected singular error, got {other:?}"),
        }
    }

    proptest! {
        #[test]
        fn residual_is_small(n in 1usize..8, vals in prop::collection::vec(-3.0f64..3.0, 4 * 64)) {
            let mut a = CMatrix::identity(n).scale_real(4.0);
            let mut b = CMatrix::zeros(n);
            for i in 0..n {
                for j in 0..n {
                    let k = 2 * (i * n + j);
                    a[(i, j)] += Complex64::new(vals[k], vals[k + 1]);
                    b[(i, j)] = Complex64::new(vals[128 + k], vals[129 + k]);
                }
            }
            if let Ok(x) = solve(&a, &b) {
                let r = (&a.matmul(&x) - &b).op_norm();
                prop_assert!(r <= 1e-10 * a.op_norm() * x.op_norm().max(1e-300));
            }
        }
    }
}
