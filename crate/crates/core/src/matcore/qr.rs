use num_complex::Complex64;

use super::ZERO;
use crate::error::{Error, Result};

/// Solution of an overdetermined least-squares problem.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub solution: Vec<Complex64>,
    /// Ratio of the extreme diagonal magnitudes of R after column equilibration.
    pub condition: f64,
    pub residual: f64,
}

/// Minimizes `||A x - b||_2` for a tall `rows x cols` matrix given row-major.
///
/// Columns are equilibrated before a Householder QR, so the condition estimate
/// reflects the basis geometry rather than column scaling.
pub fn least_squares(a: &[Complex64], rows: usize, cols: usize, b: &[Complex64]) -> Result<LeastSquares> {
    if a.len() != rows * cols {
        return Err(Error::DimensionMismatch {
            left: rows * cols,
            right: a.len(),
        });
    }
    if b.len() != rows {
        return Err(Error::DimensionMismatch {
            left: rows,
            right: b.len(),
        });
    }
    if rows < cols {
        return Err(Error::DimensionMismatch {
            left: rows,
            right: cols,
        });
    }
    // column-major working copy
    let mut q: Vec<Vec<Complex64>> = (0..cols)
        .map(|j| (0..rows).map(|i| a[i * cols + j]).collect())
        .collect();
    let scales: Vec<f64> = q
        .iter()
        .map(|col| {
            let s = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if s > 0.0 {
                s
            } else {
                1.0
            }
        })
        .collect();
    for (col, &s) in q.iter_mut().zip(&scales) {
        col.iter_mut().for_each(|z| *z /= s);
    }
    let mut rhs = b.to_vec();

    for k in 0..cols {
        let norm = q[k][k..].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::IllConditioned {
                condition: f64::INFINITY,
            });
        }
        let x0 = q[k][k];
        let phase = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let alpha = -phase * norm;
        let mut v: Vec<Complex64> = q[k][k..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let reflect = |x: &mut [Complex64]| {
            let dot: Complex64 = v.iter().zip(x.iter()).map(|(vi, xi)| vi.conj() * xi).sum();
            let f = dot * (2.0 / vnorm2);
            for (xi, vi) in x.iter_mut().zip(&v) {
                *xi -= f * vi;
            }
        };
        for col in q.iter_mut().skip(k) {
            reflect(&mut col[k..]);
        }
        reflect(&mut rhs[k..]);
    }

    let diag: Vec<f64> = (0..cols).map(|k| q[k][k].norm()).collect();
    let dmax = diag.iter().copied().fold(0.0, f64::max);
    let dmin = diag.iter().copied().fold(f64::INFINITY, f64::min);
    let condition = if dmin > 0.0 { dmax / dmin } else { f64::INFINITY };

    let mut x = vec![ZERO; cols];
    for k in (0..cols).rev() {
        let mut acc = rhs[k];
        for j in (k + 1)..cols {
            acc -= q[j][k] * x[j];
        }
        x[k] = acc / q[k][k];
    }
    let residual = rhs[cols..].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for (xk, &s) in x.iter_mut().zip(&scales) {
        *xk /= s;
    }
    Ok(LeastSquares {
        solution: x,
        condition,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn exact_fit_of_a_line() {
        // fit y = (1+i) + 2x through 5 points
        let xs = [0.0, 1.0, 2.0, 3.0, 4.0];
        let a: Vec<Complex64> = xs.iter().flat_map(|&x| [c(1.0, 0.0), c(x, 0.0)]).collect();
        let b: Vec<Complex64> = xs.iter().map(|&x| c(1.0 + 2.0 * x, 1.0)).collect();
        let ls = least_squares(&a, 5, 2, &b).unwrap();
        assert!((ls.solution[0] - c(1.0, 1.0)).norm() < 1e-13);
        assert!((ls.solution[1] - c(2.0, 0.0)).norm() < 1e-13);
        assert!(ls.residual < 1e-12);
    }

    #[test]
    fn residual_is_orthogonal_projection() {
        // b not in range: mean of values
        let a = vec![c(1.0, 0.0); 4];
        let b = vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(6.0, 0.0)];
        let ls = least_squares(&a, 4, 1, &b).unwrap();
        assert!((ls.solution[0] - c(3.0, 0.0)).norm() < 1e-14);
        let r2: f64 = [4.0, 1.0, 0.0, 9.0].iter().sum();
        assert!((ls.residual - r2.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rank_deficient_is_flagged() {
        let a = vec![c(1.0, 0.0), c(2.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)];
        let b = vec![c(1.0, 0.0); 3];
        match least_squares(&a, 3, 2, &b) {
            Ok(ls) => assert!(ls.condition > 1e12),
            Err(Error::IllConditioned { .. }) => {}
            Err(e) => panic!("unexpected {e}"),
        }
    }
}
