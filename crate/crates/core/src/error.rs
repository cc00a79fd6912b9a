use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter failed validation. `field` names the offending input.
    #[error("invalid `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("transmit and receive position lists differ in length ({tx} vs {rx})")]
    LengthMismatch { tx: usize, rx: usize },

    #[error("{side} position {index} at ({x}, {y}) lies outside the disc of radius {radius}")]
    PointOutsideDisc {
        side: &'static str,
        index: usize,
        x: f64,
        y: f64,
        radius: f64,
    },

    #[error("eigen-decomposition of {dim}x{dim} Gram matrix failed to converge")]
    EigenFailure { dim: usize },

    #[error("singular value decomposition of {dim}x{dim} kernel block failed to converge")]
    SvdFailure { dim: usize },

    #[error("root finder did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("trial {trial}: {source}")]
    Trial {
        trial: u64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }

    /// True for failures of a numerical routine, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::EigenFailure { .. } | Error::SvdFailure { .. } | Error::NoConvergence { .. } => {
                true
            }
            Error::Trial { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
