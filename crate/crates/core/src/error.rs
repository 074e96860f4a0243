use thiserror::Error;

pub type Result<T> = std::result::Result<T, PfaxError>;

#[derive(Debug, Error)]
pub enum PfaxError {
    #[error("time index {index} out of range: {reason}")]
    Range { index: usize, reason: String },

    #[error("insufficient data: need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("series misaligned: {0}")]
    Alignment(String),

    #[error("dimension mismatch: expected {expected}, got {got} ({context})")]
    DimensionMismatch {
        expected: usize,
        got: usize,
        context: &'static str,
    },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("degenerate matrix: {0}")]
    Degenerate(String),

    /// Covariance of the expanded signal is rank deficient.
    #[error(
        "degenerate signal: {} covariance eigenvalue(s) below threshold ({:?}); \
         reduce the expansion degree or input redundancy, or use the reduced sphering policy",
        eigenvalues.len(),
        eigenvalues
    )]
    DegenerateSignal { eigenvalues: Vec<f64> },

    #[error("degenerate supplementary signal: {0}")]
    DegenerateSupplementary(String),

    #[error("control has no influence on the features (U1 is numerically zero)")]
    NoControlInfluence,

    #[error("inhomogeneous eigenvalue problem has no feasible real solution")]
    Infeasible,

    #[error("invalid position ({x}, {y}): {reason}")]
    InvalidPosition { x: f64, y: f64, reason: &'static str },

    #[error("incompatible model: {0}")]
    Incompatible(String),

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl PfaxError {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            PfaxError::Config(_) | PfaxError::Incompatible(_) => 2,
            PfaxError::Io(_) | PfaxError::ModelFormat(_) => 4,
            _ => 3,
        }
    }
}
