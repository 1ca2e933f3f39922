//! Sample-based planning for discounted MDPs accessed through a generative
//! model.
//!
//! - [`mdp`]: the generative-model trait, tabular and continuous environments,
//!   exact values and the JSON MDP format.
//! - [`planner`]: the TrailBlazer planner.
//! - [`baselines`]: sparse sampling and Monte-Carlo evaluation.
//! - [`difficulty`]: gaps, near-optimal sets and the κ / d difficulty measures.

pub mod baselines;
pub mod difficulty;
pub mod mdp;
pub mod planner;

pub use mdp::{rng_stream, GenerativeModel, RngStream, Root, TabularMdp};
pub use planner::{plan, PlanError, PlanResult, PlannerConfig};
