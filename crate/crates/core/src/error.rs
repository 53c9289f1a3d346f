use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum RfpError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("node id {id} out of range for graph with {n} nodes")]
    NodeOutOfBounds { id: usize, n: usize },

    #[error("self-loop on node {0} is not allowed")]
    SelfLoop(usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("column {column} has (numerically) zero norm")]
    DegenerateColumn { column: usize },

    #[error("rank collapse: column {column} is numerically dependent on the preceding columns")]
    RankCollapse { column: usize },

    #[error("non-finite value after propagation step {step}")]
    NumericOverflow { step: usize },

    #[error("matrix is not symmetric (max deviation {0:e})")]
    Asymmetric(f64),

    #[error("matrix dimension {n} exceeds oracle cap {cap}")]
    OracleCapExceeded { n: usize, cap: usize },

    #[error("input is not orthonormal (deviation {0:e})")]
    NotOrthonormal(f64),

    #[error("diagnostics unsupported: {0}")]
    UnsupportedDiagnostic(String),

    #[error("insufficient usable steps for rate fit: {found} found, 5 required")]
    InsufficientSteps { found: usize },

    #[error("rho undefined: trace {0:e} is numerically zero")]
    UndefinedRho(f64),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("internal consistency fault: {0}")]
    InternalConsistency(String),

    #[error("integer overflow: {0}")]
    Overflow(String),

    #[error("I/O error: {0}")]
    Io(String),

    #[error("format error: {0}")]
    Format(String),
}

impl From<std::io::Error> for RfpError {
    fn from(e: std::io::Error) -> Self {
        RfpError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, RfpError>;
