//! Reproductions of the ellipse counterexample, the involution remark, the
//! Berger–Stampfli–Kato and teardrop fuzz suites, and the square search.

mod ellipse;
mod fuzz;
mod involution;
mod search;

pub use ellipse::{crouzeix_matrix, ellipse_violation, pair_refutation, pair_refutation_on, DegreeRow, EllipseParams, EllipseViolation};
pub use fuzz::{bsk_fuzz, random_disk_rational, FuzzReport};
pub use involution::{fit_centered_conic, involution_demo, ConicFit, InvolutionReport};
pub use search::{ellipse_sanity_search, search_domain, square_search, SearchCandidate, SearchConfig, SearchReport};

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::matcore::CMatrix;

/// Default number of random polynomials in a sampled pair check.
pub const REFUTATION_TRIALS: usize = 64;

/// Complex Ginibre matrix: iid standard complex Gaussian entries.
pub fn ginibre(rng: &mut impl Rng, n: usize) -> CMatrix {
    let data = (0..n * n)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)) * std::f64::consts::FRAC_1_SQRT_2)
        .collect();
    CMatrix::from_vec(n, data).expect("square by construction")
}

/// The generator for item `k` of a seeded run.
pub fn stream_rng(seed: u64, k: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k);
    rng
}
