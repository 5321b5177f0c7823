use thiserror::Error;

/// Errors raised by the cell-complex toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// The combinatorial data does not describe a valid 2-dimensional cell complex.
    #[error("invalid complex: {0}")]
    InvalidComplex(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("shape mismatch in {context}: expected {expected}, found {found}")]
    Shape {
        context: &'static str,
        expected: String,
        found: String,
    },

    #[error("matrix is not symmetric (relative asymmetry {0:.3e})")]
    NotSymmetric(f64),

    /// B1 * B2 is not the zero matrix.
    #[error("chain property violated: B1*B2 has a nonzero entry at ({row}, {col})")]
    ChainViolation { row: usize, col: usize },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// The sampled rows of a bandlimited basis do not determine the signal.
    #[error("ill-posed sampling: {0}")]
    IllPosedSampling(String),

    #[error("candidate enumeration aborted: more than {limit} chordless cycles")]
    TooManyCandidates { limit: usize },

    #[error("generation failed: {0}")]
    Generation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn shape_err(context: &'static str, expected: impl ToString, found: impl ToString) -> Error {
    Error::Shape {
        context,
        expected: expected.to_string(),
        found: found.to_string(),
    }
}
