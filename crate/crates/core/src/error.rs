use std::path::PathBuf;

use thiserror::Error;

use crate::fem::NewtonHistory;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("reaction pole: |1 - alpha*v| = {distance:e} at v = {v}")]
    Pole { v: f64, distance: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("division by a jet with zero value")]
    ZeroDivision,

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("singular pivot at row {row} (pivot = {pivot:e})")]
    SingularPivot { row: usize, pivot: f64 },

    #[error("Newton iteration did not converge after {} iterations (residual {:e})", .history.iterations(), .history.final_residual())]
    NonConvergence { history: NewtonHistory },

    #[error("line search exhausted at Newton iteration {iteration} after {halvings} halvings")]
    LineSearchExhausted {
        iteration: usize,
        halvings: usize,
        history: NewtonHistory,
    },

    #[error("training diverged at epoch {epoch}: {reason}")]
    Diverged { epoch: usize, reason: String },

    #[error("shooting oracle failed: {0}")]
    Shooting(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    /// `true` for failures of the numerics (divergence, non-convergence,
    /// poles) as opposed to bad input or I/O.
    pub fn is_numerical(&self) -> bool {
        !matches!(
            self,
            Error::InvalidParameter(_)
                | Error::Domain(_)
                | Error::Io { .. }
                | Error::Csv { .. }
                | Error::Json { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
