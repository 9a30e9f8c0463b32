use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension parameter must be at least 1")]
    ZeroDimension,

    #[error("J-map list is empty")]
    NoMatrices,

    #[error("J_{index} is not a square matrix of size {expected}")]
    NotSquare { index: usize, expected: usize },

    #[error("J_{index} is not skew-symmetric (max deviation {deviation:e})")]
    Skewness { index: usize, deviation: f64 },

    #[error("J_{index}^2 != -Id (max deviation {deviation:e})")]
    NotComplexStructure { index: usize, deviation: f64 },

    #[error("J_{i} J_{j} + J_{j} J_{i} != 0 (anticommutation violated for ({i},{j}), max deviation {deviation:e})")]
    Anticommutation { i: usize, j: usize, deviation: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unknown group id '{0}' (expected heisenberg:<n>, quaternionic:<n> or custom:<file>)")]
    UnknownGroup(String),

    #[error("matrix file: {0}")]
    Parse(String),

    #[error("k = {0} violates k >= 1")]
    KBelowOne(f64),

    #[error("p = {0} violates p > 1")]
    PNotAboveOne(f64),

    #[error("alpha = {alpha} violates alpha > -m - 2kq = {bound}")]
    AlphaRange { alpha: f64, bound: f64 },

    #[error("beta = {beta} violates beta > max{{(1-Q)/(4k-1), -m/(2k-1) - 1}} = {bound}")]
    BetaRange { beta: f64, bound: f64 },

    #[error("Hardy inequality requires 1 < p < Q + alpha (p = {p}, Q + alpha = {bound})")]
    HardyRange { p: f64, bound: f64 },

    #[error("uncertainty principle requires 1 < s < Q (s = {s}, Q = {hom_dim})")]
    UncertaintyRange { s: f64, hom_dim: f64 },

    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("psi is undefined for p = Q (use the logarithmic branch)")]
    CriticalExponent,

    #[error("index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },

    /// The value was computed, but inside the exclusion radius around {z = 0}
    /// where the field coefficients are not smooth.
    #[error("near-singular evaluation (|z| below exclusion radius), value {value}")]
    NearSingular { value: f64 },

    /// |grad_X f| vanished with p < 2; the flux was continued by zero.
    #[error("degenerate flux (|grad_X f| < 1e-10 with p < 2), value {value}")]
    DegenerateFlux { value: f64 },

    #[error("Monte Carlo acceptance rate {rate:e} below 1e-4")]
    LowAcceptance { rate: f64 },

    #[error("non-decaying tail: last shell carries {fraction:.3e} of the total")]
    NonDecayingTail { fraction: f64 },

    #[error("test function support [{inner}, {outer}] is not an annulus with inner radius > 0")]
    BadSupport { inner: f64, outer: f64 },

    #[error("io: {0}")]
    Io(String),
}

impl Error {
    /// The numeric value carried by a flagged (but completed) evaluation.
    pub fn flagged_value(&self) -> Option<f64> {
        match self {
            Error::NearSingular { value } | Error::DegenerateFlux { value } => Some(*value),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
