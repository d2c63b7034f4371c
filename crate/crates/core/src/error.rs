use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge: estimate {estimate:e}, error bound {error_bound:e} after {intervals} intervals")]
    Quadrature {
        estimate: f64,
        error_bound: f64,
        intervals: usize,
    },

    #[error("no sign change on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    /// Condition a_j > phi_j * sum_{i>j} a_i fails for user `user` (1-based).
    #[error("user {user} is infeasible: a_j <= phi_j * sum of weaker-user power")]
    Infeasible { user: usize },

    #[error(
        "{count} compositions exceed the enumeration cap of {cap}; reduce the quadrature order"
    )]
    TooManyCompositions { count: u128, cap: u128 },

    #[error("unknown scheme `{0}` (expected noma, oma_random or opportunistic)")]
    UnknownScheme(String),

    #[error("line fit: {0}")]
    Fit(String),

    #[error("config error: {0}")]
    Config(String),
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
