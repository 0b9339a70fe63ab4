use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A file did not match its declared binary format.
    #[error("format error: {0}")]
    Format(String),
    /// An argument violated a precondition.
    #[error("invalid argument: {0}")]
    Argument(String),
    /// Direction requested for a query at (numerically) zero distance.
    #[error("degenerate direction: query is on the hull (distance {dist:.3e} below {threshold:.3e})")]
    DegenerateDirection { dist: f64, threshold: f64 },
    /// All input points are collinear; no 2-D hull polygon exists.
    #[error("degenerate hull: all points collinear")]
    DegenerateHull,
    /// Training loss became non-finite.
    #[error("training diverged at step {step} (loss {loss})")]
    TrainingDiverged { step: usize, loss: f64 },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }
    pub fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}
