use std::path::PathBuf;

use thiserror::Error;
use trailblazer::baselines::BaselineError;
use trailblazer::difficulty::DifficultyError;
use trailblazer::mdp::{MdpError, ModelError};
use trailblazer::PlanError;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid experiment: {0}")]
    Invalid(String),
    #[error(transparent)]
    Mdp(#[from] MdpError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("trial with seed {seed}: {source}")]
    Plan { seed: u64, source: PlanError },
    #[error("trial with seed {seed}: {source}")]
    Baseline { seed: u64, source: BaselineError },
    #[error("trial with seed {seed} reached the call cap {cap} after {calls} calls")]
    Budget { seed: u64, calls: u64, cap: u64 },
    #[error("insufficient epsilon grid: {0}")]
    InsufficientGrid(String),
    #[error(transparent)]
    Difficulty(#[from] DifficultyError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("csv report: {0}")]
    Csv(#[from] csv::Error),
    #[error("json report: {0}")]
    Json(#[from] serde_json::Error),
}

impl BenchError {
    /// Process exit code: 2 for invalid input, 3 for an exhausted call budget.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Budget { .. } => 3,
            BenchError::Invalid(_)
            | BenchError::Mdp(_)
            | BenchError::InsufficientGrid(_)
            | BenchError::Difficulty(_) => 2,
            BenchError::Plan { source, .. } => match source {
                PlanError::InvalidConfig(_) | PlanError::DiscountMismatch { .. } => 2,
                PlanError::BudgetExceeded { .. } => 3,
                _ => 1,
            },
            BenchError::Baseline { source, .. } => match source {
                BaselineError::InvalidConfig(_) | BaselineError::MultipleActions { .. } => 2,
                BaselineError::Model(_) => 1,
            },
            BenchError::Model(_) | BenchError::Io { .. } | BenchError::Csv(_) | BenchError::Json(_) => 1,
        }
    }
}
