use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("autoregressive order must be at least 1")]
    ZeroOrder,

    #[error("series of length {n} is too short for order {p}")]
    SeriesTooShort { n: usize, p: usize },

    #[error("design matrix is rank deficient (smallest/largest singular value = {condition:e})")]
    RankDeficient { condition: f64 },

    #[error("non-positive value {value} at observation {index}{date}")]
    NonPositiveLevel { index: usize, value: f64, date: String },

    #[error("dates not strictly increasing at observation {row}")]
    NonMonotoneDates { row: usize },

    #[error("need at least {needed} present values, found {found}")]
    NotEnoughValues { needed: usize, found: usize },

    #[error("non-finite value at position {0}")]
    NonFinite(usize),

    #[error("coefficients are not stationary (spectral radius not below 1)")]
    NotStationary,

    #[error("eigenvalue iteration did not converge")]
    EigenNoConvergence,

    #[error("{lag}-step state covariance is singular for a surrogate of order {order}; use a lag of at least {order}")]
    SingularTransition { lag: usize, order: usize },

    #[error("no feasible block plan: best adjusted confidence level was {best_eta_prime:e} at m = {m}")]
    InfeasiblePlan { best_eta_prime: f64, m: usize },

    #[error("block index set is empty after clamping to {rows} design rows")]
    EmptyIndexSet { rows: usize },
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
