//! Finite realizations of normal and unitary dilations: the positive
//! operator measure built from `Re h_ζ(T)`, its Naimark dilation, the
//! identity `f(T) = 2 V* f(N) V`, and the Egerváry unitary power dilation.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::confmap::{boundary_sup_of, g_of_matrix, h_matrix, quadrature, ConformalAtlas, Domain};
use crate::error::{Error, Result};
use crate::funcalc::TestFn;
use crate::io::DenseRect;
use crate::matcore::{inverse, lambda_min, psd_sqrt, psd_sqrt_with_floor, CMatrix};

/// `F_j = (Re h_{ζ_j}(T) + I)/(2m)`, renormalized to sum to `I`.
#[derive(Debug, Clone)]
pub struct PovmDiscretization {
    pub domain: Domain,
    pub elements: Vec<CMatrix>,
    pub nodes: Vec<Complex64>,
    pub m: usize,
    /// `||Σ F_j - I||` before renormalization.
    pub quadrature_defect: f64,
}

/// Clamp used when taking square roots of the `F_j`.
const POVM_FLOOR: f64 = 1e-9;

pub fn povm_discretize(t: &CMatrix, atlas: &ConformalAtlas, m: usize, d: usize) -> Result<PovmDiscretization> {
    let n = t.dim();
    let g = g_of_matrix(atlas, t, d)?;
    let quad = quadrature(atlas, m)?;
    let raw: Vec<CMatrix> = quad
        .images
        .par_iter()
        .enumerate()
        .map(|(j, &w)| {
            let h = h_matrix(w, &g.matrix, &g.spectrum.points, j)?;
            let f = h.re_part().shift(Complex64::new(1.0, 0.0)).scale_real(0.5 / m as f64);
            let lmin = lambda_min(&f)?;
            // the margin of condition (ii) at this node is 2m λ_min(F_j)
            if 2.0 * m as f64 * lmin < -1e-8 {
                return Err(Error::PovmNotPsd { node: j, lambda_min: lmin });
            }
            Ok(f)
        })
        .collect::<Result<_>>()?;
    let mut sum = CMatrix::zeros(n);
    for f in &raw {
        sum += f;
    }
    let sum = sum.re_part();
    let quadrature_defect = (&sum - &CMatrix::identity(n)).op_norm();
    let r_half = psd_sqrt(&inverse(&sum)?.re_part())?;
    let elements = raw.iter().map(|f| r_half.matmul(f).matmul(&r_half).re_part()).collect();
    Ok(PovmDiscretization {
        domain: *atlas.domain(),
        elements,
        nodes: quad.nodes,
        m,
        quadrature_defect,
    })
}

/// `V = [F_1^{1/2}; ...; F_m^{1/2}]`, `Q_j` the j-th coordinate block and
/// `N = Σ ζ_j Q_j`. `N` is block diagonal and kept implicit.
#[derive(Debug, Clone)]
pub struct NaimarkModel {
    pub domain: Domain,
    pub n: usize,
    pub nodes: Vec<Complex64>,
    /// The blocks `V_j = F_j^{1/2}` of `V`.
    pub blocks: Vec<CMatrix>,
    /// The `F_j` the model was built from.
    pub elements: Vec<CMatrix>,
}

pub fn naimark_dilate(povm: &PovmDiscretization) -> Result<NaimarkModel> {
    let blocks = povm
        .elements
        .par_iter()
        .map(|f| psd_sqrt_with_floor(f, POVM_FLOOR))
        .collect::<Result<Vec<_>>>()?;
    Ok(NaimarkModel {
        domain: povm.domain,
        n: povm.elements.first().map(CMatrix::dim).unwrap_or(0),
        nodes: povm.nodes.clone(),
        blocks,
        elements: povm.elements.clone(),
    })
}

impl NaimarkModel {
    pub fn m(&self) -> usize {
        self.blocks.len()
    }

    /// `V* Q_j V = V_j* V_j`
    pub fn compression(&self, j: usize) -> CMatrix {
        self.blocks[j].adjoint().matmul(&self.blocks[j])
    }

    pub fn v_star_v(&self) -> CMatrix {
        let mut acc = CMatrix::zeros(self.n);
        for j in 0..self.m() {
            acc += &self.compression(j);
        }
        acc
    }

    /// `||V*V - I||`
    pub fn isometry_defect(&self) -> f64 {
        (&self.v_star_v() - &CMatrix::identity(self.n)).op_norm()
    }

    /// `max_j ||V* Q_j V - F_j||`
    pub fn naimark_defect(&self) -> f64 {
        (0..self.m())
            .into_par_iter()
            .map(|j| (&self.compression(j) - &self.elements[j]).op_norm())
            .reduce(|| 0.0, f64::max)
    }

    /// Largest distance from a point of `σ(N)` to the domain boundary.
    pub fn spectrum_boundary_defect(&self) -> f64 {
        self.nodes.iter().map(|&z| self.domain.signed_distance(z).abs()).fold(0.0, f64::max)
    }

    /// `V* f(N) V = Σ_j f(ζ_j) V_j* V_j`
    pub fn compress(&self, f: impl Fn(Complex64) -> Complex64 + Sync) -> CMatrix {
        let terms: Vec<CMatrix> = (0..self.m()).into_par_iter().map(|j| self.compression(j).scale(f(self.nodes[j]))).collect();
        let mut acc = CMatrix::zeros(self.n);
        for t in &terms {
            acc += t;
        }
        acc
    }

    /// `V` as an `(m n) x n` array.
    pub fn dense_v(&self) -> DenseRect {
        let (n, m) = (self.n, self.m());
        let mut data = Vec::with_capacity(m * n * n);
        for b in &self.blocks {
            for i in 0..n {
                for k in 0..n {
                    let z = b[(i, k)];
                    data.push([z.re, z.im]);
                }
            }
        }
        DenseRect { rows: m * n, cols: n, data }
    }

    /// `N` as a dense `(m n) x (m n)` matrix.
    pub fn dense_n(&self) -> CMatrix {
        let diag: Vec<Complex64> = self.nodes.iter().flat_map(|&z| std::iter::repeat_n(z, self.n)).collect();
        CMatrix::diag(&diag)
    }
}

/// Export form of a model: dimensions, nodes, `V` and `N`.
#[derive(Debug, Clone, Serialize)]
pub struct ModelExport {
    pub n: usize,
    pub m: usize,
    pub nodes: Vec<Complex64>,
    pub v: DenseRect,
    pub normal: CMatrix,
}

impl From<&NaimarkModel> for ModelExport {
    fn from(model: &NaimarkModel) -> Self {
        Self {
            n: model.n,
            m: model.m(),
            nodes: model.nodes.clone(),
            v: model.dense_v(),
            normal: model.dense_n(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DilationReport {
    /// `||f(T) - 2 V* f(N) V||`
    pub delta: f64,
    pub f_at_base: Complex64,
    pub m: usize,
}

/// `||f(T) - 2 V* f(N) V||` without checking `f(z0) = 0`.
pub fn dilation_defect(t: &CMatrix, model: &NaimarkModel, f: &TestFn) -> Result<DilationReport> {
    let ft = f.apply(t)?;
    let compressed = model.compress(|z| f.eval(z));
    Ok(DilationReport {
        delta: (&ft - &compressed.scale_real(2.0)).op_norm(),
        f_at_base: f.eval(model.domain.base),
        m: model.m(),
    })
}

/// The 2-dilation identity; refuses test functions with `f(z0) != 0`.
pub fn dilation_calculus_check(t: &CMatrix, model: &NaimarkModel, f: &TestFn) -> Result<DilationReport> {
    let value = f.eval(model.domain.base);
    if value.norm() > 1e-10 {
        return Err(Error::BasePointNonzero { value });
    }
    dilation_defect(t, model, f)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResolventReport {
    pub passed: bool,
    /// `λ_min(Re (I - αf(T))^{-1})`
    pub lambda_min: f64,
    /// The same quantity from `I + 2 V* φ(N) V` with `φ = αf/(1 - αf)`.
    pub lambda_min_model: f64,
}

/// Checks `Re (I - αf(T))^{-1} >= 0` for `f(z0) = 0`, `sup|f| <= 1`, `|α| < 1`.
pub fn resolvent_positivity_check(t: &CMatrix, model: &NaimarkModel, f: &TestFn, alpha: Complex64) -> Result<ResolventReport> {
    if alpha.norm() >= 1.0 {
        return Err(Error::OutsideUnitDisk { modulus: alpha.norm() });
    }
    let value = f.eval(model.domain.base);
    if value.norm() > 1e-10 {
        return Err(Error::BasePointNonzero { value });
    }
    for &p in f.poles() {
        if model.domain.signed_distance(p) <= crate::tol::POLE_MARGIN {
            return Err(Error::PoleInDomain { pole: p });
        }
    }
    let sup = boundary_sup_of(|z| f.eval(z).norm(), &model.domain, 1024);
    if sup > 1.0 + 1e-9 {
        return Err(Error::NotSubunit { sup });
    }
    let n = t.dim();
    let ft = f.apply(t)?;
    let resolvent = inverse(&(&CMatrix::identity(n) - &ft.scale(alpha)))?;
    let lmin = lambda_min(&resolvent.re_part())?;
    let phi = model.compress(|z| {
        let af = alpha * f.eval(z);
        af / (1.0 - af)
    });
    let via_model = phi.scale_real(2.0).shift(Complex64::new(1.0, 0.0));
    Ok(ResolventReport {
        passed: lmin >= -1e-8,
        lambda_min: lmin,
        lambda_min_model: lambda_min(&via_model.re_part())?,
    })
}

/// Unitary `U` on `(N+1)` copies of `C^n` whose top-left block of `U^k` is
/// `T^k` for `1 <= k <= N`.
///
/// Block row 0 holds `T` and `D_{T*}` (last column), block row 1 holds `D_T`
/// and `-T*`, and rows `2..=N` shift the copies down by one.
pub fn egervary_dilation(t: &CMatrix, n_steps: usize) -> Result<CMatrix> {
    let norm = t.op_norm();
    if norm > 1.0 + 1e-10 {
        return Err(Error::NotContraction { norm });
    }
    if n_steps == 0 {
        return Err(Error::Unsupported("the dilation needs at least one power".into()));
    }
    let n = t.dim();
    let id = CMatrix::identity(n);
    let ts = t.adjoint();
    let d_t = psd_sqrt_with_floor(&(&id - &ts.matmul(t)).re_part(), 1e-9)?;
    let d_ts = psd_sqrt_with_floor(&(&id - &t.matmul(&ts)).re_part(), 1e-9)?;
    let big = n * (n_steps + 1);
    let mut u = CMatrix::zeros(big);
    u.set_block(0, 0, t);
    u.set_block(0, n * n_steps, &d_ts);
    u.set_block(n, 0, &d_t);
    u.set_block(n, n * n_steps, &(-&ts));
    for i in 2..=n_steps {
        u.set_block(n * i, n * (i - 1), &id);
    }
    Ok(u)
}
