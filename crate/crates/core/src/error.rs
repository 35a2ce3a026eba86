use thiserror::Error;

/// Which of the two admissible data classes a run relies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    /// Zero mass data with a derivative-form nonlinearity.
    ZeroMass,
    /// Odd data with an odd-preserving power-series nonlinearity.
    Odd,
}

impl std::fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Hypothesis::ZeroMass => write!(f, "zero mass"),
            Hypothesis::Odd => write!(f, "odd data"),
        }
    }
}

#[derive(Debug, Error)]
pub enum RgError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("hypothesis {hypothesis} violated: {detail}")]
    Hypothesis {
        hypothesis: Hypothesis,
        detail: String,
    },

    #[error("domain truncation unsound: {0}")]
    Truncation(String),

    #[error("smallness condition violated: {0}")]
    Smallness(String),

    #[error("analyticity region left: {0}")]
    Analyticity(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl RgError {
    /// Process exit code for this error category.
    pub fn exit_code(&self) -> i32 {
        match self {
            RgError::InvalidInput(_) | RgError::Config(_) => 2,
            RgError::Hypothesis { .. } | RgError::Smallness(_) => 3,
            RgError::Truncation(_)
            | RgError::Analyticity(_)
            | RgError::Solver(_)
            | RgError::Io(_)
            | RgError::Csv(_) => 4,
        }
    }

    /// Short machine-readable category name.
    pub fn category(&self) -> &'static str {
        match self {
            RgError::InvalidInput(_) => "invalid_input",
            RgError::Config(_) => "config",
            RgError::Hypothesis { .. } => "hypothesis",
            RgError::Truncation(_) => "truncation",
            RgError::Smallness(_) => "smallness",
            RgError::Analyticity(_) => "analyticity",
            RgError::Solver(_) => "solver",
            RgError::Io(_) => "io",
            RgError::Csv(_) => "csv",
        }
    }
}

pub type Result<T> = std::result::Result<T, RgError>;
