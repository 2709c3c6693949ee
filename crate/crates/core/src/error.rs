use thiserror::Error;

/// Failures raised by the numerical pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid {name}: {reason}")]
    Domain { name: &'static str, reason: String },

    #[error("convergence failure: {0}")]
    Convergence(String),

    #[error("numerical error budget exceeded at d = {distance} nm: estimated {relative:.3e} relative, limit {limit:.3e}")]
    BudgetExceeded {
        distance: f64,
        relative: f64,
        limit: f64,
    },

    #[error("ill-conditioned boundary matching (condition ~{condition:.2e}) at xi = {xi} eV, kx = {kx}, ky = {ky}")]
    IllConditioned {
        condition: f64,
        xi: f64,
        kx: f64,
        ky: f64,
    },

    #[error("eigen-solver failed at xi = {xi} eV, kx = {kx} nm^-1, ky = {ky} nm^-1: {reason}")]
    Eigen {
        xi: f64,
        kx: f64,
        ky: f64,
        reason: String,
    },

    #[error("physical consistency violated: {0}")]
    Physics(String),
}

impl Error {
    pub(crate) fn domain(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
