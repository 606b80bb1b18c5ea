use num_complex::Complex64;
use thiserror::Error;

/// Errors raised anywhere in the library. Messages are prefixed with the
/// module that produced them so CLI output stays traceable.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matcore: expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matcore: dimension mismatch ({left} vs {right})")]
    DimensionMismatch { left: usize, right: usize },
    #[error("matcore: non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("matcore: matrix is not Hermitian (||A - A*|| = {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("matcore: matrix is singular to tolerance (pivot magnitude {pivot:e} at column {column})")]
    Singular { column: usize, pivot: f64 },
    #[error("matcore: matrix is not positive semidefinite (eigenvalue {eigenvalue:e})")]
    NotPsd { eigenvalue: f64 },
    #[error("matcore: {method} failed to converge after {iterations} iterations")]
    NoConvergence {
        method: &'static str,
        iterations: usize,
    },
    #[error("funcalc: pole {root} lies within {distance:e} of spectrum point {eigenvalue}")]
    PoleTooClose {
        root: Complex64,
        eigenvalue: Complex64,
        distance: f64,
    },
    #[error("funcalc: polynomial degree {degree} exceeds the limit {limit}")]
    DegreeTooLarge { degree: usize, limit: usize },
    #[error("funcalc: zero denominator")]
    ZeroDenominator,
    #[error("funcalc: Moebius parameter must lie in the open unit disk (|a| = {modulus})")]
    OutsideUnitDisk { modulus: f64 },
    #[error("confmap: invalid domain: {0}")]
    InvalidDomain(String),
    #[error("confmap: unsupported configuration: {0}")]
    Unsupported(String),
    #[error("confmap: spectrum point {point} is not inside the domain (signed distance {distance:e})")]
    SpectrumOutside { point: Complex64, distance: f64 },
    #[error("confmap: least-squares fit is ill-conditioned (estimate {condition:e}); reduce the degree")]
    IllConditioned { condition: f64 },
    #[error("confmap: elliptic modulus {0} outside (0, 1)")]
    ModulusOutOfRange(f64),
    #[error("wspec: f(z0) must be real for the Herglotz formula (Im f(z0) = {imag:e})")]
    NotRealAtBase { imag: f64 },
    #[error("wspec: pole proximity at node {node} (zeta = {zeta}), distance {distance:e}")]
    NodePole {
        node: usize,
        zeta: Complex64,
        distance: f64,
    },
    #[error("wspec: pole {pole} of the test function lies in the closed domain")]
    PoleInDomain { pole: Complex64 },
    #[error("wspec: test function exceeds 1 on the boundary (sup = {sup})")]
    NotSubunit { sup: f64 },
    #[error("wspec: condition (ii) does not hold (margin {margin:e})")]
    ConditionIiFailed { margin: f64 },
    #[error("dilation: F_{node} is not positive semidefinite (lambda_min = {lambda_min:e})")]
    PovmNotPsd { node: usize, lambda_min: f64 },
    #[error("dilation: f(z0) = {value} is not zero; the 2-dilation identity needs f(z0) = 0")]
    BasePointNonzero { value: Complex64 },
    #[error("dilation: operator is not a contraction (norm {norm})")]
    NotContraction { norm: f64 },
    #[error("experiments: {0}")]
    Experiment(String),
    #[error("io: {0}")]
    Io(String),
    #[error("io: malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl Error {
    /// True for errors that report a failed mathematical condition on valid
    /// input rather than bad input.
    pub fn is_negative_result(&self) -> bool {
        matches!(self, Error::ConditionIiFailed { .. } | Error::PovmNotPsd { .. })
    }
}
