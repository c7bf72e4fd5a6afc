use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    /// The q-domain of the nonlinearity is unbounded for this profile.
    #[error("unbounded domain: {0}")]
    UnboundedDomain(String),
    #[error("fit error: {0}")]
    Fit(String),
    #[error("numerical instability at t = {t}: {reason}")]
    Instability { t: f64, reason: String },
    #[error("no convergence after {iterations} iterations (last change {last_change:e})")]
    NoConvergence { iterations: usize, last_change: f64 },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
