use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("barrier count {0} is below the minimum of 2")]
    TooFewBarriers(u32),

    #[error("operation requires a finite barrier count")]
    RequiresFiniteBarriers,

    #[error("operation requires an infinite barrier count")]
    RequiresInfiniteBarriers,

    #[error("transfer matrix is singular at e = {energy}: |Q22| = {magnitude:e}")]
    SingularTransfer { energy: f64, magnitude: f64 },

    #[error(
        "analytic tail needs {needed} terms at beta = {beta:e} (cap {cap}); \
         use a larger beta or an analytic approximation"
    )]
    TailTooLong { beta: f64, needed: u64, cap: u64 },

    #[error("not enough samples: need {needed}, have {available}")]
    InsufficientSamples { needed: usize, available: usize },

    #[error("degenerate fit window: {0}")]
    DegenerateWindow(String),

    #[error("singular linear system in boundary matching (pivot {0:e})")]
    SingularSystem(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Whether the error comes from bad input rather than a numerical breakdown.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. }
                | Error::TooFewBarriers(_)
                | Error::RequiresFiniteBarriers
                | Error::RequiresInfiniteBarriers
                | Error::InsufficientSamples { .. }
                | Error::DegenerateWindow(_)
        )
    }
}
