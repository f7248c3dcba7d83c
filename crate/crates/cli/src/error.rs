use thiserror::Error;

/// Command errors carrying the process exit code contract:
/// 2 config/schema, 3 simulation fault, 4 fit failure.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("simulation fault: {0}")]
    Simulation(String),
    #[error("fit failure: {0}")]
    Fit(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Simulation(_) => 3,
            CliError::Fit(_) => 4,
            CliError::Io(_) => 2,
        }
    }
}

impl From<ssmred_core::Error> for CliError {
    fn from(e: ssmred_core::Error) -> Self {
        use ssmred_core::Error::*;
        match e {
            SimulationFault(_) | StiffnessGuard(_) => CliError::Simulation(e.to_string()),
            RankDeficient(_) | NonMonotone(_) | NotSettled(_) | NoConvergence(_) | Model(_)
            | GenerationFailure(_) => CliError::Fit(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
