use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{crouzeix_matrix, ginibre, stream_rng, EllipseParams};
use crate::confmap::{build_atlas, poly_approx, Domain};
use crate::error::{Error, Result};
use crate::funcalc::Poly;
use crate::matcore::CMatrix;
use crate::numrange::{numerical_radius, numerical_radius_with, support_excess, support_ratio};

const DIM: usize = 3;
/// Angles used for the support tests of non-polygonal domains during the search.
const SEARCH_SWEEP: usize = 360;
/// Sweep for the final projection of the reported candidate.
const FINAL_SWEEP: usize = 8192;
const SEARCH_RADIUS_SWEEP: usize = 64;
const FEASIBLE_PENALTY: f64 = 1e-8;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Total objective evaluations over all restarts.
    pub budget: usize,
    pub seed: u64,
    pub degrees: Vec<usize>,
    pub restarts: usize,
    /// Weight of the containment penalty.
    pub rho: f64,
}

impl SearchConfig {
    pub fn new(budget: usize, seed: u64, degrees: &[usize]) -> Self {
        Self {
            budget,
            seed,
            degrees: degrees.to_vec(),
            restarts: 8,
            rho: 10.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DegreeValue {
    pub degree: usize,
    pub w: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchCandidate {
    pub t: CMatrix,
    /// `max(0, largest support excess of W(T) over the domain)`.
    pub penalty: f64,
    /// `max_d w(f_d(T))`
    pub objective: f64,
    pub per_degree: Vec<DegreeValue>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchReport {
    pub domain: String,
    pub config: SearchConfig,
    pub evaluations: usize,
    /// Best penalized score reached by each restart.
    pub restart_scores: Vec<f64>,
    pub best_restart: usize,
    pub best: SearchCandidate,
    pub feasible: bool,
    /// `objective > 1` at a feasible candidate.
    pub violation_found: bool,
}

fn to_matrix(x: &[f64]) -> CMatrix {
    let data = x.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect();
    CMatrix::from_vec(DIM, data).expect("3x3")
}

fn to_params(t: &CMatrix) -> Vec<f64> {
    t.as_slice().iter().flat_map(|z| [z.re, z.im]).collect()
}

struct Objective<'a> {
    domain: &'a Domain,
    polys: &'a [(usize, Poly)],
    rho: f64,
}

impl Objective<'_> {
    /// Scales `T` into the domain and evaluates the approximants there;
    /// the penalty of the unscaled `T` keeps the walk near feasibility.
    fn score(&self, x: &[f64]) -> f64 {
        let t = to_matrix(x);
        let run = || -> Result<f64> {
            let penalty = support_excess(&t, self.domain, SEARCH_SWEEP)?.max(0.0);
            let s = support_ratio(&t, self.domain, SEARCH_SWEEP)?.max(1.0);
            let tp = t.scale_real(1.0 / s);
            let mut best = 0.0f64;
            for (_, p) in self.polys {
                best = best.max(numerical_radius_with(&p.apply(&tp), SEARCH_RADIUS_SWEEP)?);
            }
            Ok(best - self.rho * penalty)
        };
        run().unwrap_or(f64::NEG_INFINITY)
    }

    fn candidate(&self, t: &CMatrix) -> Result<SearchCandidate> {
        let s = support_ratio(t, self.domain, FINAL_SWEEP)?.max(1.0);
        let tp = t.scale_real(1.0 / s);
        let penalty = support_excess(&tp, self.domain, FINAL_SWEEP)?.max(0.0);
        let per_degree: Vec<DegreeValue> = self
            .polys
            .iter()
            .map(|(d, p)| Ok(DegreeValue { degree: *d, w: numerical_radius(&p.apply(&tp))? }))
            .collect::<Result<_>>()?;
        let objective = per_degree.iter().map(|v| v.w).fold(0.0, f64::max);
        Ok(SearchCandidate { t: tp, penalty, objective, per_degree })
    }
}

/// Nelder–Mead maximization of `f` from `x0` within `budget` evaluations.
/// A collapsed simplex is rebuilt around the best vertex.
fn nelder_mead(f: impl Fn(&[f64]) -> f64, x0: &[f64], step: f64, budget: usize) -> (Vec<f64>, f64, usize) {
    let n = x0.len();
    let mut evals = 0;
    let eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        -f(x)
    };
    let mut best_x = x0.to_vec();
    let mut best_f = f64::INFINITY;
    while evals < budget {
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        let base = best_x.clone();
        let fb = eval(&base, &mut evals);
        simplex.push((base.clone(), fb));
        for i in 0..n {
            if evals >= budget {
                break;
            }
            let mut v = base.clone();
            v[i] += step;
            let fv = eval(&v, &mut evals);
            simplex.push((v, fv));
        }
        if simplex.len() < n + 1 {
            for (x, fx) in &simplex {
                if *fx < best_f {
                    best_f = *fx;
                    best_x = x.clone();
                }
            }
            break;
        }
        loop {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            if evals >= budget {
                break;
            }
            let spread = simplex[n].1 - simplex[0].1;
            let size = simplex[1..].iter().map(|(x, _)| dist(x, &simplex[0].0)).fold(0.0, f64::max);
            if spread.abs() < 1e-13 || size < 1e-10 {
                break;
            }
            let centroid: Vec<f64> = (0..n).map(|k| simplex[..n].iter().map(|(x, _)| x[k]).sum::<f64>() / n as f64).collect();
            let along = |t: f64| -> Vec<f64> { (0..n).map(|k| centroid[k] + t * (simplex[n].0[k] - centroid[k])).collect() };
            let xr = along(-1.0);
            let fr = eval(&xr, &mut evals);
            if fr < simplex[0].1 {
                let xe = along(-2.0);
                let fe = if evals < budget { eval(&xe, &mut evals) } else { f64::INFINITY };
                simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            } else if fr < simplex[n - 1].1 {
                simplex[n] = (xr, fr);
            } else {
                let (xc, fc) = if fr < simplex[n].1 {
                    let xc = along(-0.5);
                    let fc = if evals < budget { eval(&xc, &mut evals) } else { f64::INFINITY };
                    (xc, fc)
                } else {
                    let xc = along(0.5);
                    let fc = if evals < budget { eval(&xc, &mut evals) } else { f64::INFINITY };
                    (xc, fc)
                };
                if fc < simplex[n].1.min(fr) {
                    simplex[n] = (xc, fc);
                } else {
                    // shrink toward the best vertex
                    let x0 = simplex[0].0.clone();
                    for v in simplex.iter_mut().skip(1) {
                        if evals >= budget {
                            break;
                        }
                        let x: Vec<f64> = (0..n).map(|k| x0[k] + 0.5 * (v.0[k] - x0[k])).collect();
                        let fx = eval(&x, &mut evals);
                        *v = (x, fx);
                    }
                }
            }
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[0].1 < best_f {
            best_f = simplex[0].1;
            best_x = simplex[0].0.clone();
        }
    }
    (best_x, -best_f, evals)
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Restarted Nelder–Mead over 3x3 complex matrices maximizing
/// `max_d w(f_d(T))` for the normalized map approximants `f_d` of `domain`.
///
/// Restart `r` draws its start from stream `r` of the seed: a Ginibre
/// matrix scaled into the domain, or `start` plus a small perturbation.
pub fn search_domain(domain: &Domain, config: &SearchConfig, start: Option<&CMatrix>) -> Result<SearchReport> {
    if config.budget == 0 || config.restarts == 0 {
        return Err(Error::Experiment("the search needs a positive budget and restart count".into()));
    }
    if let Some(s) = start {
        if s.dim() != DIM {
            return Err(Error::DimensionMismatch { left: s.dim(), right: DIM });
        }
    }
    let atlas = build_atlas(domain)?;
    let polys: Vec<(usize, Poly)> = config
        .degrees
        .par_iter()
        .map(|&d| Ok((d, poly_approx(&atlas, d)?)))
        .collect::<Result<_>>()?;
    let objective = Objective { domain, polys: &polys, rho: config.rho };
    let restarts = config.restarts.min(config.budget);
    let runs: Vec<(Vec<f64>, f64, usize)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let share = config.budget / restarts + usize::from(r < config.budget % restarts);
            let mut rng = stream_rng(config.seed, r as u64);
            let x0 = match start {
                Some(s) => to_params(s).iter().map(|v| v + 0.02 * rng.sample::<f64, _>(StandardNormal)).collect(),
                None => {
                    let g = ginibre(&mut rng, DIM);
                    let ratio = support_ratio(&g, domain, SEARCH_SWEEP)?;
                    let target: f64 = rng.random_range(0.5..1.0);
                    to_params(&g.scale_real(target / ratio.max(1e-12)))
                }
            };
            Ok(nelder_mead(|x| objective.score(x), &x0, 0.1, share))
        })
        .collect::<Result<_>>()?;
    // lowest restart index wins ties
    let mut best_restart = 0;
    for (r, run) in runs.iter().enumerate() {
        if run.1 > runs[best_restart].1 {
            best_restart = r;
        }
    }
    let best = objective.candidate(&to_matrix(&runs[best_restart].0))?;
    let feasible = best.penalty <= FEASIBLE_PENALTY;
    Ok(SearchReport {
        domain: domain.label(),
        config: config.clone(),
        evaluations: runs.iter().map(|r| r.2).sum(),
        restart_scores: runs.iter().map(|r| r.1).collect(),
        best_restart,
        violation_found: feasible && best.objective > 1.0,
        best,
        feasible,
    })
}

/// The search on the square `(-1, 1)²` with base point 0.
pub fn square_search(budget: usize, seed: u64, degrees: &[usize]) -> Result<SearchReport> {
    search_domain(&Domain::square(1.0)?, &SearchConfig::new(budget, seed, degrees), None)
}

/// The search on the ellipse with semi-axes 2 and 1, started near the
/// Crouzeix matrix padded with a zero row and column.
pub fn ellipse_sanity_search(budget: usize, seed: u64, degrees: &[usize]) -> Result<SearchReport> {
    let p = EllipseParams::new(2.0, 1.0)?;
    let start = crouzeix_matrix(p).direct_sum(&CMatrix::zeros(1));
    search_domain(&p.domain(), &SearchConfig::new(budget, seed, degrees), Some(&start))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nelder_mead_finds_quadratic_max() {
        let f = |x: &[f64]| -(x[0] - 1.0).powi(2) - 3.0 * (x[1] + 0.5).powi(2);
        let (x, fx, evals) = nelder_mead(f, &[0.0, 0.0], 0.5, 400);
        assert!(evals <= 400);
        assert!((x[0] - 1.0).abs() < 1e-4 && (x[1] + 0.5).abs() < 1e-4, "{x:?}");
        assert!(fx > -1e-8);
    }

    #[test]
    fn zero_matrix_candidate() {
        let domain = Domain::square(1.0).unwrap();
        let atlas = build_atlas(&domain).unwrap();
        let polys = vec![(8, poly_approx(&atlas, 8).unwrap())];
        let obj = Objective { domain: &domain, polys: &polys, rho: 10.0 };
        let c = obj.candidate(&CMatrix::zeros(3)).unwrap();
        assert_eq!(c.objective, 0.0);
        assert_eq!(c.penalty, 0.0);
    }

    #[test]
    fn ellipse_sanity_finds_violation() {
        let r = ellipse_sanity_search(200, 1, &[8, 16, 32]).unwrap();
        assert!(r.feasible && r.violation_found, "{r:?}");
        assert!(r.evaluations <= 200);
        let check = {
            let atlas = build_atlas(&Domain::ellipse(2.0, 1.0).unwrap()).unwrap();
            let p = poly_approx(&atlas, 32).unwrap();
            numerical_radius(&p.apply(&r.best.t)).unwrap()
        };
        let w32 = r.best.per_degree.iter().find(|v| v.degree == 32).unwrap().w;
        assert!((check - w32).abs() < 1e-8);
    }

    #[test]
    fn square_search_is_reproducible() {
        let a = square_search(80, 7, &[8, 16]).unwrap();
        let b = square_search(80, 7, &[8, 16]).unwrap();
        assert!(a.feasible);
        assert_eq!(a.evaluations, 80);
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}
