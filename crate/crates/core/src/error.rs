use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A computation would lose too much precision to be trusted.
    #[error("ill-conditioned: {0}")]
    Conditioning(String),

    /// Adaptive quadrature exhausted its subdivision budget.
    #[error(
        "quadrature did not converge: estimated error {error:e} exceeds tolerance {tolerance:e} \
         after {subdivisions} subdivisions"
    )]
    Quadrature {
        error: f64,
        tolerance: f64,
        subdivisions: usize,
    },

    /// Invalid physical or protocol configuration.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Numeric failure at a specific point of a ratio sweep.
    #[error("at ratio {ratio}: {source}")]
    AtRatio {
        ratio: f64,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
