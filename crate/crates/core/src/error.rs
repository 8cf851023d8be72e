use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum MtmError {
    /// Invalid trimming proportions, parameters or sample sizes.
    #[error("validation error: {0}")]
    Validation(String),

    /// Both candidate scale (or tail) estimates are non-positive; the trimming
    /// proportions need to be changed.
    #[error("estimation failed: both candidate estimates are non-positive ({minus:e}, {plus:e}); update trimming proportions")]
    BothCandidatesNonPositive { minus: f64, plus: f64 },

    /// Any other failure of an estimator (e.g. a degenerate sample).
    #[error("estimation failed: {0}")]
    Estimation(String),

    /// Adaptive quadrature could not reach its tolerance.
    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl MtmError {
    /// True for errors that mean the estimator produced no usable estimate.
    pub fn is_estimation_failure(&self) -> bool {
        matches!(
            self,
            MtmError::BothCandidatesNonPositive { .. } | MtmError::Estimation(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, MtmError>;
