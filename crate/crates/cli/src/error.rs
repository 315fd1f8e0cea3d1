use thiserror::Error;

use symscheme::{CircleError, OdeError, ParseError, SchemeError, SymbolError, WaveError};

/// Failure of a run, classified by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Numerical acceptance check failed (outputs are still written).
    #[error("acceptance failure: {0}")]
    Acceptance(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("hypothesis violation: {0}")]
    Hypothesis(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Acceptance(_) | CliError::Numerical(_) => 1,
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Hypothesis(_) => 3,
        }
    }
}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<SymbolError> for CliError {
    fn from(e: SymbolError) -> Self {
        match e {
            SymbolError::Parse(p) => p.into(),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<SchemeError> for CliError {
    fn from(e: SchemeError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<OdeError> for CliError {
    fn from(e: OdeError) -> Self {
        match e {
            OdeError::InvalidOperator(_) => CliError::Config(e.to_string()),
            OdeError::MultipleRoot { .. } | OdeError::ComplexRoot(_) | OdeError::NotRoot(_) => CliError::Hypothesis(e.to_string()),
            OdeError::Symbol(s) => s.into(),
            OdeError::Scheme(s) => s.into(),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<CircleError> for CliError {
    fn from(e: CircleError) -> Self {
        match e {
            CircleError::NotElliptic { .. } => CliError::Hypothesis(e.to_string()),
            CircleError::Scheme(s) => s.into(),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<WaveError> for CliError {
    fn from(e: WaveError) -> Self {
        match e {
            WaveError::Hyperbolicity { .. }
            | WaveError::Caustic { .. }
            | WaveError::RootCollision
            | WaveError::VanishingFrequency(_)
            | WaveError::Unsupported(_)
            | WaveError::NonIntegerAnchor(_)
            | WaveError::EvenDimension(_) => CliError::Hypothesis(e.to_string()),
            WaveError::InvalidInput(_) => CliError::Config(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}
