use casimir_core::force::ForceError;
use casimir_core::grid::GridError;
use casimir_core::observables::ObservableError;
use casimir_core::validation::ValidationError;
use casimir_core::{ConfigError, QuadratureError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("cannot write output: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Numeric(_) => 3,
            Self::Output(_) => 1,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        Self::Config(e.to_string())
    }
}

impl From<GridError> for CliError {
    fn from(e: GridError) -> Self {
        Self::Config(e.to_string())
    }
}

impl From<QuadratureError> for CliError {
    fn from(e: QuadratureError) -> Self {
        match e {
            QuadratureError::InvalidSpec(_) => Self::Config(e.to_string()),
            _ => Self::Numeric(e.to_string()),
        }
    }
}

impl From<ObservableError> for CliError {
    fn from(e: ObservableError) -> Self {
        use ObservableError::*;
        match e {
            Quadrature(q) => q.into(),
            Config(c) => c.into(),
            ZeroRadiation => Self::Numeric(e.to_string()),
            _ => Self::Config(e.to_string()),
        }
    }
}

impl From<ForceError> for CliError {
    fn from(e: ForceError) -> Self {
        use ForceError::*;
        match e {
            AboveCutoff { .. } | NotSymmetric | UnsupportedOrder(_) | Config(_) => Self::Config(e.to_string()),
            Quadrature(q) => q.into(),
            _ => Self::Numeric(e.to_string()),
        }
    }
}

impl From<ValidationError> for CliError {
    fn from(e: ValidationError) -> Self {
        match e {
            ValidationError::Observable(o) => o.into(),
            ValidationError::Force(f) => f.into(),
            _ => Self::Numeric(e.to_string()),
        }
    }
}
