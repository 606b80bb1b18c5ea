//! Independent reference values shared by the integration tests.

use num_complex::Complex64;
use std::f64::consts::PI;

/// `|g(c)|` for the ellipse with foci ±c from the Chebyshev expansion of the
/// boundary data in the angle `ξ` of `ζ = c cos(ξ + i y0)`.
pub fn ellipse_oracle(a: f64, b: f64) -> f64 {
    let c = (a * a - b * b).sqrt();
    let y0 = (a / c).acosh();
    let n_pts = 4096;
    let data: Vec<f64> = (0..n_pts)
        .map(|k| {
            let xi = 2.0 * PI * k as f64 / n_pts as f64;
            -(Complex64::new(a * xi.cos(), -b * xi.sin())).norm().ln()
        })
        .collect();
    let mut u_at_c = 0.0;
    for n in (0..400).step_by(2) {
        let coef: f64 = data
            .iter()
            .enumerate()
            .map(|(k, v)| v * (n as f64 * 2.0 * PI * k as f64 / n_pts as f64).cos())
            .sum::<f64>()
            * if n == 0 { 1.0 } else { 2.0 }
            / n_pts as f64;
        // Re T_n(z/c) = cosh(n y0) cos(n ξ) on the boundary and T_n(1) = 1
        let term = coef / (n as f64 * y0).cosh();
        u_at_c += term;
        if term.abs() < 1e-18 && n > 20 {
            break;
        }
    }
    c * u_at_c.exp()
}
