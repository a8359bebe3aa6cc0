use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("proportion must lie in [0, 1], got {0}")]
    InvalidProportion(f64),

    #[error("invalid experiment counts: r={r}, k1={k1}, k2={k2} (need r >= 1 and k <= r)")]
    InvalidCounts { r: u64, k1: u64, k2: u64 },

    #[error("invalid prior: {0}")]
    InvalidPrior(String),

    #[error("{prior} prior assigns zero likelihood to the observed data")]
    ZeroLikelihood { prior: String },

    #[error("rate {0} is on the boundary; quadratic bound needs 0 < theta < 1")]
    BoundaryRate(f64),

    #[error("combined variance is zero; the Welch statistic is undefined for this data")]
    DegenerateVariance,

    #[error("rates are equal ({0}); the sample requirement is unbounded")]
    EqualRates(f64),

    #[error("multiplier must be positive and finite, got {0}")]
    InvalidMultiplier(f64),

    #[error("trial count must be positive")]
    ZeroTrials,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid [{lower}, {upper}] does not contain the midpoint rate {midpoint}")]
    GridMissesMidpoint {
        lower: f64,
        upper: f64,
        midpoint: f64,
    },

    #[error(
        "refinement did not converge after {iterations} iterations (objective spread {spread:e})"
    )]
    NotConverged { iterations: usize, spread: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
