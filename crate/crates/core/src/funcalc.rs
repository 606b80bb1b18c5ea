//! Polynomial and rational functional calculus on matrices.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{gen_eig, solve, CMatrix, ONE, ZERO};
use crate::tol;

/// Polynomial with complex coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolyRepr", into = "PolyRepr")]
pub struct Poly {
    coeffs: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct PolyRepr {
    coeffs: Vec<Complex64>,
}

impl TryFrom<PolyRepr> for Poly {
    type Error = Error;
    fn try_from(r: PolyRepr) -> Result<Self> {
        Poly::new(r.coeffs)
    }
}

impl From<Poly> for PolyRepr {
    fn from(p: Poly) -> Self {
        PolyRepr { coeffs: p.coeffs }
    }
}

impl Poly {
    /// Trailing zero coefficients are dropped so the leading one is nonzero.
    pub fn new(mut coeffs: Vec<Complex64>) -> Result<Self> {
        while coeffs.last() == Some(&ZERO) {
            coeffs.pop();
        }
        if coeffs.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Parse("non-finite polynomial coefficient".into()));
        }
        if coeffs.len() > tol::MAX_DEGREE + 1 {
            return Err(Error::DegreeTooLarge {
                degree: coeffs.len() - 1,
                limit: tol::MAX_DEGREE,
            });
        }
        Ok(Self { coeffs })
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c]).expect("degree 0")
    }

    /// `z^k`
    pub fn monomial(k: usize) -> Result<Self> {
        let mut c = vec![ZERO; k + 1];
        c[k] = ONE;
        Self::new(c)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
    }

    /// Horner evaluation `p(T)`.
    pub fn apply(&self, t: &CMatrix) -> CMatrix {
        let n = t.dim();
        let mut acc = CMatrix::zeros(n);
        for &c in self.coeffs.iter().rev() {
            acc = acc.matmul(t).shift(c);
        }
        acc
    }

    pub fn scale(&self, s: Complex64) -> Poly {
        Poly::new(self.coeffs.iter().map(|&c| c * s).collect()).expect("same degree")
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let len = self.coeffs.len().max(other.coeffs.len());
        let c = (0..len)
            .map(|k| self.coeffs.get(k).copied().unwrap_or(ZERO) + other.coeffs.get(k).copied().unwrap_or(ZERO))
            .collect();
        Poly::new(c).expect("degree bounded by inputs")
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(-ONE))
    }

    pub fn mul(&self, other: &Poly) -> Result<Poly> {
        if self.is_zero() || other.is_zero() {
            return Ok(Poly::zero());
        }
        let mut c = vec![ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Poly::new(c)
    }

    /// Roots via the eigenvalues of the companion matrix.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        let d = self.degree();
        if d == 0 {
            return Ok(Vec::new());
        }
        let lead = self.coeffs[d];
        let mut comp = CMatrix::zeros(d);
        for i in 1..d {
            comp[(i, i - 1)] = ONE;
        }
        for i in 0..d {
            comp[(i, d - 1)] = -self.coeffs[i] / lead;
        }
        Ok(gen_eig(&comp)?.points)
    }

    /// Synthetic division by `(z - r)`, discarding the remainder.
    fn deflate(&self, r: Complex64) -> Poly {
        let d = self.degree();
        let mut q = vec![ZERO; d];
        let mut acc = ZERO;
        for k in (1..=d).rev() {
            acc = acc * r + self.coeffs[k];
            q[k - 1] = acc;
        }
        Poly::new(q).expect("lower degree")
    }

    /// `sum |c_k| |z|^k`, the natural scale for judging `|p(z)| ≈ 0`.
    fn magnitude_at(&self, z: Complex64) -> f64 {
        let r = z.norm();
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
    }
}

/// Rational function `num/den` with common roots cancelled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RationalRepr", into = "RationalRepr")]
pub struct RationalFn {
    num: Poly,
    den: Poly,
    poles: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct RationalRepr {
    num: Poly,
    den: Poly,
}

impl TryFrom<RationalRepr> for RationalFn {
    type Error = Error;
    fn try_from(r: RationalRepr) -> Result<Self> {
        RationalFn::new(r.num, r.den)
    }
}

impl From<RationalFn> for RationalRepr {
    fn from(f: RationalFn) -> Self {
        RationalRepr { num: f.num, den: f.den }
    }
}

const COMMON_ROOT_REL: f64 = 1e-10;

impl RationalFn {
    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        let mut num = num;
        let mut den = den;
        let mut poles = Vec::new();
        if !num.is_zero() {
            for r in den.roots()? {
                if num.degree() > 0 && num.eval(r).norm() <= COMMON_ROOT_REL * num.magnitude_at(r) {
                    num = num.deflate(r);
                    den = den.deflate(r);
                } else {
                    poles.push(r);
                }
            }
        } else {
            den = Poly::constant(ONE);
        }
        Ok(Self { num, den, poles })
    }

    pub fn from_poly(p: Poly) -> Self {
        Self {
            num: p,
            den: Poly::constant(ONE),
            poles: Vec::new(),
        }
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn poles(&self) -> &[Complex64] {
        &self.poles
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.num.eval(z) / self.den.eval(z)
    }

    /// The post-composition `φ_a ∘ f` with `φ_a(z) = (a - z)/(1 - ā z)`.
    pub fn mobius_after(&self, a: Complex64) -> Result<RationalFn> {
        // (a - p/q) / (1 - ā p/q) = (a q - p) / (q - ā p)
        let num = self.den.scale(a).sub(&self.num);
        let den = self.den.sub(&self.num.scale(a.conj()));
        RationalFn::new(num, den)
    }

    pub fn mul(&self, other: &RationalFn) -> Result<RationalFn> {
        RationalFn::new(self.num.mul(&other.num)?, self.den.mul(&other.den)?)
    }

    pub fn scale(&self, s: Complex64) -> RationalFn {
        RationalFn {
            num: self.num.scale(s),
            den: self.den.clone(),
            poles: self.poles.clone(),
        }
    }
}

/// Either kind of test function accepted by the checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TestFn {
    Poly(Poly),
    Rational(RationalFn),
}

impl TestFn {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        match self {
            TestFn::Poly(p) => p.eval(z),
            TestFn::Rational(r) => r.eval(z),
        }
    }

    pub fn apply(&self, t: &CMatrix) -> Result<CMatrix> {
        match self {
            TestFn::Poly(p) => Ok(poly_apply(p, t)),
            TestFn::Rational(r) => rational_apply(r, t),
        }
    }

    pub fn poles(&self) -> &[Complex64] {
        match self {
            TestFn::Poly(_) => &[],
            TestFn::Rational(r) => r.poles(),
        }
    }
}

impl From<Poly> for TestFn {
    fn from(p: Poly) -> Self {
        TestFn::Poly(p)
    }
}

impl From<RationalFn> for TestFn {
    fn from(r: RationalFn) -> Self {
        TestFn::Rational(r)
    }
}

pub fn poly_apply(p: &Poly, t: &CMatrix) -> CMatrix {
    p.apply(t)
}

/// `p(T) q(T)^{-1}`, refusing when a pole is within `POLE_MARGIN` of `σ(T)`.
pub fn rational_apply(f: &RationalFn, t: &CMatrix) -> Result<CMatrix> {
    if !f.poles.is_empty() {
        let spec = gen_eig(t)?;
        check_poles(&f.poles, &spec.points, tol::POLE_MARGIN)?;
    }
    let p = f.num.apply(t);
    let q = f.den.apply(t);
    solve(&q, &p)
}

pub(crate) fn check_poles(poles: &[Complex64], spectrum: &[Complex64], margin: f64) -> Result<()> {
    for &r in poles {
        for &l in spectrum {
            let d = (r - l).norm();
            if d <= margin {
                return Err(Error::PoleTooClose {
                    root: r,
                    eigenvalue: l,
                    distance: d,
                });
            }
        }
    }
    Ok(())
}

/// `(I + e^{-iθ}T)(I - e^{-iθ}T)^{-1}`
pub fn mobius_halfplane(t: &CMatrix, theta: f64) -> Result<CMatrix> {
    let z = Complex64::from_polar(1.0, theta);
    let spec = gen_eig(t)?;
    check_poles(&[z], &spec.points, tol::POLE_MARGIN)?;
    let rot = t.scale(z.conj());
    let n = t.dim();
    let plus = rot.shift(ONE);
    let minus = (&CMatrix::identity(n) - &rot).clone();
    solve(&minus, &plus)
}

/// The disk automorphism `φ(z) = (a - z)/(1 - ā z)` exchanging 0 and `a`.
pub fn mobius_exchange(a: Complex64) -> Result<RationalFn> {
    if a.norm() >= 1.0 {
        return Err(Error::OutsideUnitDisk { modulus: a.norm() });
    }
    RationalFn::new(Poly::new(vec![a, -ONE])?, Poly::new(vec![ONE, -a.conj()])?)
}
