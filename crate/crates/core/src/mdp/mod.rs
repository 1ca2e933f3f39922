//! MDP access: the generative-model trait, concrete environments, the exact
//! value oracle for tabular instances, and the JSON file format.

mod exact;
mod generator;
mod io;
mod model;
mod tabular;
mod toy;

use std::path::PathBuf;

use thiserror::Error;

pub use exact::{exact_value, horizon_for_width, ValueBounds, ValueTable};
pub use generator::{make_random_mdp, RandomMdpSpec};
pub use io::{load_mdp, parse_mdp, to_json, write_mdp};
pub use model::{
    rng_stream, sample_transition, GenerativeModel, RngStream, Root, RootKind, Transition,
};
pub use tabular::{ActionSpec, Outcome, RewardDist, StateSpec, TabularMdp, ROW_SUM_TOLERANCE};
pub use toy::{make_continuous_toy, ContinuousToy, GapProfile, ToyState};

/// Errors raised while building or loading a tabular MDP.
#[derive(Debug, Error)]
pub enum MdpError {
    #[error("failed to read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed MDP file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("discount {0} is outside (0, 1)")]
    Discount(f64),
    #[error("MDP has no states")]
    Empty,
    #[error("state {0} has no actions")]
    NoActions(usize),
    #[error("state {state}, action {action}: transition row sums to {sum} (must be 1 within 1e-12)")]
    RowSum {
        state: usize,
        action: usize,
        sum: f64,
    },
    #[error("state {state}, action {action}: {what} {value} is outside [0, 1]")]
    Parameter {
        state: usize,
        action: usize,
        what: &'static str,
        value: f64,
    },
    #[error("state {state}, action {action}: next state {target} does not exist ({n_states} states)")]
    UnknownState {
        state: usize,
        action: usize,
        target: usize,
        n_states: usize,
    },
    #[error("invalid root: {0}")]
    Root(String),
    #[error("infeasible generator dimensions: {0}")]
    Dimensions(String),
}

/// Errors raised by generative models at sampling time or construction.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("action {action} is out of range ({count} actions available)")]
    InvalidAction { action: usize, count: usize },
    #[error("invalid gap profile: {0}")]
    InvalidProfile(String),
    #[error("discount {0} is outside (0, 1)")]
    Discount(f64),
}
