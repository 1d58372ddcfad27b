use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("index ({i},{j},{k}) out of range for dimension {dim}")]
    IndexOutOfRange { i: usize, j: usize, k: usize, dim: usize },

    #[error("bracket key ({i},{j},{k}) has i = j")]
    DiagonalKey { i: usize, j: usize, k: usize },

    #[error("duplicate bracket key ({i},{j},{k})")]
    DuplicateKey { i: usize, j: usize, k: usize },

    #[error("non-finite coefficient at ({i},{j},{k})")]
    NonFinite { i: usize, j: usize, k: usize },

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("dimension must be positive")]
    ZeroDimension,

    #[error("operation undefined on the zero bracket")]
    ZeroBracket,

    #[error("matrix is singular")]
    Singular,

    #[error("diagonal scaling has a zero entry at position {0}")]
    ZeroScale(usize),

    #[error("bracket is not a nilpotent Lie bracket: {0}")]
    InvalidBracket(String),

    #[error("bracket is not 2-step nilpotent")]
    NotTwoStep,

    #[error("Ricci operator is not diagonal (off-diagonal mass {0:e})")]
    RicciNotDiagonal(f64),

    #[error("bracket is not a nilsoliton")]
    NotEinstein,

    #[error("eigenvalues are not rationalizable under denominator cap {cap}: {ratios:?}")]
    NotRationalizable { cap: u64, ratios: Vec<f64> },

    #[error("linear system is inconsistent")]
    Inconsistent,

    #[error("degeneration diverges: coefficient ({i},{j},{k}) has exponent {exponent} > 0")]
    Diverges { i: usize, j: usize, k: usize, exponent: i64 },

    #[error("malformed evidence: {0}")]
    MalformedEvidence(String),

    #[error("flow integration failed at t = {t:e}: {reason}")]
    FlowFailure { t: f64, reason: String },

    #[error("graph error: {0}")]
    Graph(String),

    #[error("invalid parameters G({r},{s},{t}): need r >= s and (s, t) != (0, 0)")]
    GrstParameters { r: usize, s: usize, t: usize },

    #[error("expected {expected} coefficients, got {got}")]
    CoefficientCount { expected: usize, got: usize },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("{0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
