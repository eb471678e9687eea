use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular matrix: pivot {index} vanished")]
    Singular { index: usize },

    #[error("infeasible soliton velocity: |v| = {0} must be < 1")]
    InfeasibleVelocity(f64),

    #[error("infeasible soliton amplitude: K(q) = {required} is below pi/2, no q >= 0 exists")]
    InfeasibleAmplitude { required: f64 },

    #[error("Newton iteration failed at step {step} after {iterations} iterations (last |F| = {last:e})")]
    Divergence {
        step: usize,
        iterations: usize,
        last: f64,
        history: Vec<f64>,
    },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error at {path}: {message}")]
    Serialize { path: PathBuf, message: String },
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Shape { expected, got })
    }
}
