use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ginibre, stream_rng};
use crate::confmap::{boundary_sup_of, Domain};
use crate::error::Result;
use crate::funcalc::{Poly, RationalFn, TestFn};
use crate::matcore::CMatrix;
use crate::numrange::numerical_radius;
use crate::wspec::{random_normalized_poly, teardrop_excess};

const MAX_DIM: usize = 6;
const MAX_POLY_DEGREE: usize = 12;
const TEARDROP_SAMPLES: usize = 360;
pub const BSK_TOL: f64 = 1e-7;
pub const TEARDROP_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FuzzReport {
    pub trials: usize,
    pub seed: u64,
    pub passed: bool,
    /// Largest `w(f(T))` over `w(T) = 1`, `f(0) = 0`, `sup|f| <= 1`.
    pub max_w: f64,
    pub worst_w_trial: usize,
    /// Largest distance from a sampled point of `W(f(T))` to `t(f(0))`.
    pub max_teardrop_excess: f64,
    pub worst_teardrop_trial: usize,
}

/// `e^{iθ} z^k Π (z - b_i)/(1 - b̄_i z)` followed by the automorphism
/// exchanging 0 and `apex`, so the result maps the disk to itself and
/// sends 0 to `apex` (when `k >= 1`).
pub fn random_disk_rational(rng: &mut impl Rng, apex: Complex64) -> Result<RationalFn> {
    let one = Complex64::new(1.0, 0.0);
    let k = rng.random_range(1..=3usize);
    let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let mut f = RationalFn::from_poly(Poly::monomial(k)?.scale(Complex64::from_polar(1.0, theta)));
    for _ in 0..rng.random_range(0..=3usize) {
        let b = Complex64::from_polar(rng.random_range(0.0..0.9), rng.random_range(0.0..std::f64::consts::TAU));
        let factor = RationalFn::new(Poly::new(vec![-b, one])?, Poly::new(vec![one, -b.conj()])?)?;
        f = f.mul(&factor)?;
    }
    f.mobius_after(apex)
}

fn random_point_in_disk(rng: &mut impl Rng, radius: f64) -> Complex64 {
    Complex64::from_polar(radius * rng.random::<f64>().sqrt(), rng.random_range(0.0..std::f64::consts::TAU))
}

/// A polynomial with nonzero constant term scaled to sampled sup 1.
fn random_subunit_poly(rng: &mut impl Rng, disk: &Domain) -> Result<Poly> {
    let deg = rng.random_range(1..=MAX_POLY_DEGREE);
    let coeffs: Vec<Complex64> = (0..=deg)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let p = Poly::new(coeffs)?;
    let sup = boundary_sup_of(|z| p.eval(z).norm(), disk, 2048);
    Ok(p.scale(Complex64::new(1.0 / sup, 0.0)))
}

/// Random `T` of size at most 6 scaled to `w(T) = 1`.
fn random_unit_radius(rng: &mut impl Rng) -> Result<CMatrix> {
    let n = rng.random_range(1..=MAX_DIM);
    let t = ginibre(rng, n);
    let w = numerical_radius(&t)?;
    Ok(t.scale_real(1.0 / w))
}

/// Per trial `k` (stream `k` of `seed`): `w(f(T)) <= 1` for `w(T) = 1` and
/// a subunit `f` vanishing at 0 (trial 0 uses `f(z) = z`), and
/// `W(g(rT)) ⊂ t(g(0))` for `r ∈ [0.5, 1]` and a subunit `g` (polynomial,
/// rational, or constant).
pub fn bsk_fuzz(trials: usize, seed: u64) -> Result<FuzzReport> {
    let disk = Domain::unit_disk();
    let rows: Vec<(f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(seed, k as u64);
            let t = random_unit_radius(&mut rng)?;
            let f: TestFn = match k % 2 {
                _ if k == 0 => Poly::monomial(1)?.into(),
                0 => random_normalized_poly(&mut rng, &disk, MAX_POLY_DEGREE)?.into(),
                _ => random_disk_rational(&mut rng, Complex64::new(0.0, 0.0))?.into(),
            };
            let w = numerical_radius(&f.apply(&t)?)?;

            let r = rng.random_range(0.5..=1.0);
            let tr = t.scale_real(r);
            let g: TestFn = match k % 3 {
                0 => random_subunit_poly(&mut rng, &disk)?.into(),
                1 => {
                    let apex = random_point_in_disk(&mut rng, 0.95);
                    random_disk_rational(&mut rng, apex)?.into()
                }
                _ => Poly::constant(random_point_in_disk(&mut rng, 1.0)).into(),
            };
            let drop = teardrop_excess(&tr, &g, Complex64::new(0.0, 0.0), TEARDROP_SAMPLES, TEARDROP_TOL)?;
            Ok((w, drop.max_excess))
        })
        .collect::<Result<_>>()?;
    let argmax = |key: fn(&(f64, f64)) -> f64| {
        let mut best = 0;
        for (k, row) in rows.iter().enumerate() {
            if key(row) > key(&rows[best]) {
                best = k;
            }
        }
        best
    };
    let (iw, ie) = (argmax(|r| r.0), argmax(|r| r.1));
    let max_w = rows.get(iw).map_or(0.0, |r| r.0);
    let max_excess = rows.get(ie).map_or(f64::NEG_INFINITY, |r| r.1);
    Ok(FuzzReport {
        trials,
        seed,
        passed: max_w <= 1.0 + BSK_TOL && max_excess <= TEARDROP_TOL,
        max_w,
        worst_w_trial: iw,
        max_teardrop_excess: max_excess,
        worst_teardrop_trial: ie,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wspec::Teardrop;

    #[test]
    fn disk_rational_is_subunit_with_apex() {
        let mut rng = stream_rng(5, 0);
        for _ in 0..20 {
            let apex = random_point_in_disk(&mut rng, 0.9);
            let f = random_disk_rational(&mut rng, apex).unwrap();
            assert!((f.eval(Complex64::new(0.0, 0.0)) - apex).norm() < 1e-12);
            for k in 0..64 {
                let z = Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / 64.0);
                assert!((f.eval(z).norm() - 1.0).abs() < 1e-10);
            }
            assert!(f.poles().iter().all(|p| p.norm() > 1.0));
        }
    }

    #[test]
    fn trivial_cases() {
        let t = CMatrix::from_real_rows(&[&[0.0, 2.0], &[0.0, 0.0]]).unwrap();
        let sq: TestFn = Poly::monomial(2).unwrap().into();
        assert_eq!(numerical_radius(&sq.apply(&t).unwrap()).unwrap(), 0.0);
        let a = Complex64::new(0.3, -0.6);
        let constant: TestFn = Poly::constant(a).into();
        let r = teardrop_excess(&t, &constant, Complex64::new(0.0, 0.0), 64, 1e-6).unwrap();
        assert!(r.inside);
        assert!(Teardrop::new(a).unwrap().contains(a, 0.0));
    }

    #[test]
    fn small_fuzz_run_is_reproducible() {
        let a = bsk_fuzz(24, 11).unwrap();
        assert!(a.passed, "{a:?}");
        // trial 0 is f(z) = z on w(T) = 1
        assert!(a.max_w >= 1.0 - 1e-9);
        let b = bsk_fuzz(24, 11).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}
