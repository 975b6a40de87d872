use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("singular parameter: {0}")]
    SingularParameter(&'static str),

    #[error("pole of the reflection ratio at n = -1")]
    Pole,

    #[error("too close to a spectral singularity: |G+| = {g_plus_abs:e}")]
    SingularityProximity { g_plus_abs: f64 },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e}, last iterate ({last_0}, {last_1}))")]
    Convergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
        last_0: f64,
        last_1: f64,
    },

    #[error("field blew up at x = {x}")]
    BlowUp { x: f64 },

    #[error("quadrature did not converge (estimate {estimate}, error estimate {error_estimate:e})")]
    Quadrature { estimate: String, error_estimate: f64 },

    #[error("not at a linear spectral singularity on the emitting branch: |L| = {l_residual:e}")]
    InvalidRegime { l_residual: f64 },

    #[error("degenerate system: {0}")]
    Degenerate(String),

    #[error("target gain {g_target} does not exceed the threshold {g0}")]
    BelowThreshold { g_target: f64, g0: f64 },

    #[error("config key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("io: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
