use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("assembly failed: {0}")]
    Assembly(String),

    #[error("matrix is singular (pivot {pivot:?})")]
    Singular { pivot: Option<usize> },

    #[error("matrix is not symmetric positive definite (pivot {pivot})")]
    NotSpd { pivot: usize },

    #[error("eigensolver did not converge after {restarts} restarts (best residuals {best_residuals:?})")]
    Convergence { restarts: usize, best_residuals: Vec<f64> },

    #[error("requested {requested} eigenvalues but the pencil only has {available} finite ones")]
    InsufficientSpectrum { requested: usize, available: usize },

    #[error("degenerate primal/dual pairing: |<u, u*>| = {value:e}")]
    DegeneratePairing { value: f64 },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Wraps the error with a description of what was being attempted.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// The innermost error, skipping any context layers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
