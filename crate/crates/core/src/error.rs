use thiserror::Error;

/// Errors raised by mesh, assembly, solver and scheme operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("mesh mismatch: {0}")]
    MeshMismatch(String),

    #[error("meshes are not nested: fine h = {fine_h}, coarse h = {coarse_h}")]
    NonNested { fine_h: f64, coarse_h: f64 },

    #[error("singular tridiagonal system: pivot {pivot:e} at row {row}")]
    Singular { row: usize, pivot: f64 },

    #[error("step {step} (t = {time:e}): {source}")]
    AtStep {
        step: usize,
        time: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("picard iteration did not converge at step {step} after {iterations} iterations (relative increment {residual:e})")]
    NonConvergence {
        step: usize,
        iterations: usize,
        residual: f64,
    },

    #[error("non-finite value in {field} at node {node} (step {step})")]
    Diverged {
        field: &'static str,
        node: usize,
        step: usize,
    },

    #[error("{run} failed at step {step}: {reason}")]
    RunFailed {
        run: String,
        step: usize,
        reason: String,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Wraps an error with the step index and time at which it occurred.
    pub fn at_step(self, step: usize, time: f64) -> Self {
        match self {
            // already carries the step
            Error::NonConvergence { .. } | Error::Diverged { .. } | Error::AtStep { .. } => self,
            other => Error::AtStep {
                step,
                time,
                source: Box::new(other),
            },
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
