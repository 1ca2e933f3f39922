//! The TrailBlazer planner.
//!
//! Every node of the planning tree is a persistent object called with a
//! sample budget `m` (controls the variance of the returned estimate) and a
//! bias bound `ε`. AVG (state-action) nodes average over their first `m`
//! sampled successors; MAX (state) nodes run a successive-elimination loop
//! over their actions and either hand the call to the sole survivor or return
//! the best surviving estimate.

mod params;
mod tree;

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mdp::{GenerativeModel, ModelError, RngStream, Root};

pub use params::{confidence_radius, eta, max_depth, root_samples, PlannerConfig};
pub use tree::{NodeHandle, SearchTree};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("invalid planner configuration: {0}")]
    InvalidConfig(String),
    #[error("config discount {config} differs from model discount {model}")]
    DiscountMismatch { config: f64, model: f64 },
    #[error("node at depth {depth} exceeds the depth bound {guard}")]
    DepthGuard { depth: usize, guard: usize },
    #[error("oracle call cap {cap} reached after {calls} calls")]
    BudgetExceeded { calls: u64, cap: u64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Oracle calls made during one run. A transition draw and its paired reward
/// draw count as two calls.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunCounter {
    pub transition_calls: u64,
    pub reward_calls: u64,
}

impl RunCounter {
    pub fn oracle_calls(&self) -> u64 {
        self.transition_calls + self.reward_calls
    }

    /// `max(2, t)`, the time index used in confidence radii.
    pub fn effective_t(&self) -> u64 {
        self.oracle_calls().max(2)
    }

    pub(crate) fn record_sample(&mut self) {
        self.transition_calls += 1;
        self.reward_calls += 1;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanResult {
    pub estimate: f64,
    pub oracle_calls: u64,
    pub transition_calls: u64,
    pub reward_calls: u64,
    pub max_depth_reached: usize,
    pub depth_guard: usize,
    pub root_samples: u64,
    /// Action picked at a MAX root; `None` for AVG roots.
    pub root_action: Option<usize>,
    pub wall_time: Duration,
}

impl PlanResult {
    pub fn record(&self, seed: u64) -> PlanRecord {
        PlanRecord {
            estimate: self.estimate,
            oracle_calls: self.oracle_calls,
            transition_calls: self.transition_calls,
            reward_calls: self.reward_calls,
            max_depth_reached: self.max_depth_reached,
            wall_time_ms: self.wall_time.as_secs_f64() * 1e3,
            seed,
        }
    }
}

/// Serialized form of a single run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanRecord {
    pub estimate: f64,
    pub oracle_calls: u64,
    pub transition_calls: u64,
    pub reward_calls: u64,
    pub max_depth_reached: usize,
    pub wall_time_ms: f64,
    pub seed: u64,
}

/// Runs TrailBlazer from the model's root: the root is called with
/// `m = ⌈ln(1/δ)/((1 − γ)² ε²)⌉` and bias `ε/2`.
///
/// An AVG root with `ε ≥ 1/(2(1 − γ))` returns that midpoint without
/// sampling, the same guard an AVG node applies to its own bias.
pub fn plan<M: GenerativeModel>(
    model: &M,
    config: &PlannerConfig,
    rng: &mut RngStream,
) -> Result<PlanResult, PlanError> {
    config.validate()?;
    if model.discount() != config.gamma {
        return Err(PlanError::DiscountMismatch {
            config: config.gamma,
            model: model.discount(),
        });
    }
    let started = Instant::now();
    let m = config.root_samples();
    let root_node = model.root();
    let half_range = 1.0 / (2.0 * (1.0 - config.gamma));
    if matches!(root_node, Root::Avg(..)) && config.epsilon >= half_range {
        // the midpoint of the value range is already ε-accurate
        return Ok(PlanResult {
            estimate: half_range,
            oracle_calls: 0,
            transition_calls: 0,
            reward_calls: 0,
            max_depth_reached: 0,
            depth_guard: config.max_depth_guard(),
            root_samples: m,
            root_action: None,
            wall_time: started.elapsed(),
        });
    }
    let mut tree = SearchTree::new(model, config, rng);
    let root = tree.add_root(root_node);
    let estimate = tree.call(root, m, config.epsilon / 2.0, 0)?;
    let counter = *tree.counter();
    Ok(PlanResult {
        estimate,
        oracle_calls: counter.oracle_calls(),
        transition_calls: counter.transition_calls,
        reward_calls: counter.reward_calls,
        max_depth_reached: tree.max_depth_reached(),
        depth_guard: tree.depth_guard(),
        root_samples: m,
        root_action: tree.last_choice(root),
        wall_time: started.elapsed(),
    })
}
