use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("evaluation produced a non-finite value: {0}")]
    NonFinite(String),
    #[error("no bracketing scale found below {limit:.1e} (norm unbounded?)")]
    UnboundedNorm { limit: f64 },
    #[error("domain is not star-shaped with respect to its inner ball")]
    UnsupportedDomain,
    #[error("nonlinear solve did not converge: residual {residual:.3e} after {iterations} iterations")]
    NonConvergence { residual: f64, iterations: usize },
    #[error("flux constructor invariant failed: {0}")]
    FluxInvariant(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("expression error: {0}")]
    Expr(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
