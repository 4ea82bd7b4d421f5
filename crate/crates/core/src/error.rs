use thiserror::Error;

/// Failures surfaced by the library.
///
/// Every variant maps onto one of the CLI exit codes through [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("d_{k}({n}) does not fit in 32 bits")]
    Overflow { k: u32, n: u64 },

    #[error("accuracy {requested:.3e} not reached, best achieved bound {achieved:.3e}")]
    Accuracy { requested: f64, achieved: f64 },

    #[error("quadrature did not converge: {0}")]
    NoConvergence(String),

    #[error("malformed divisor table: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// 1 for bad input, 2 for numerical accuracy failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Accuracy { .. } | Error::NoConvergence(_) => 2,
            _ => 1,
        }
    }
}

pub(crate) fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Precondition(msg()))
    }
}
