use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Shapes or orders that do not fit together.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// Invalid input values (non-finite data, empty grids, bad parameters).
    #[error("validation error: {0}")]
    Validation(String),

    /// Division by a zero singular value.
    #[error("singular value error: {0}")]
    SingularValue(String),

    /// Iterative solver stopped before meeting its tolerance.
    #[error("no convergence after {iterations} iterations (kkt violation {kkt_violation:e}){}", context.as_ref().map(|c| format!(": {c}")).unwrap_or_default())]
    NotConverged {
        iterations: usize,
        kkt_violation: f64,
        context: Option<String>,
    },

    /// Numerical degeneracy (non-positive pivots, non-positive spectral diagonals).
    #[error("numerical error: {0}")]
    Numerical(String),

    /// Sample too short for the requested lags or horizon.
    #[error("sample size error: {0}")]
    SampleSize(String),
}

impl Error {
    pub fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    /// Attach the VAR row index to a solver failure.
    pub fn in_row(self, row: usize) -> Self {
        match self {
            Error::NotConverged {
                iterations,
                kkt_violation,
                context,
            } => Error::NotConverged {
                iterations,
                kkt_violation,
                context: Some(match context {
                    Some(c) => format!("row {row}: {c}"),
                    None => format!("row {row}"),
                }),
            },
            Error::Numerical(m) => Error::Numerical(format!("row {row}: {m}")),
            other => other,
        }
    }
}
