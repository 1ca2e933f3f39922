//! Reference planners: uniform sparse look-ahead and plain Monte-Carlo
//! evaluation for single-action models.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mdp::{sample_transition, GenerativeModel, ModelError, RngStream, Root};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BaselineError {
    #[error("invalid sparse sampling config: {0}")]
    InvalidConfig(String),
    #[error("monte-carlo evaluation needs one action per state, found {actions} at {state}")]
    MultipleActions { state: String, actions: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparseSamplingConfig {
    /// Samples drawn per AVG expansion (C).
    pub width: usize,
    /// Number of MAX/AVG level pairs (H).
    pub horizon: usize,
    /// Expand a successor drawn several times by one AVG node only once and
    /// weight it by its multiplicity.
    #[serde(default)]
    pub merge_duplicates: bool,
}

impl SparseSamplingConfig {
    pub fn new(width: usize, horizon: usize) -> Self {
        Self {
            width,
            horizon,
            merge_duplicates: false,
        }
    }

    pub fn merged(mut self) -> Self {
        self.merge_duplicates = true;
        self
    }
}

/// Estimate plus oracle accounting, with the same counting convention as the
/// planner (one reward and one transition call per draw).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineResult {
    pub estimate: f64,
    pub transition_calls: u64,
    pub reward_calls: u64,
    /// Deepest node visited, numbered like the planner's tree (root at 0).
    pub max_depth_reached: usize,
}

impl BaselineResult {
    pub fn oracle_calls(&self) -> u64 {
        self.transition_calls + self.reward_calls
    }
}

struct Calls {
    draws: u64,
    depth: usize,
}

impl Calls {
    fn new() -> Self {
        Self { draws: 0, depth: 0 }
    }

    fn visit(&mut self, depth: usize) {
        self.depth = self.depth.max(depth);
    }

    fn result(&self, estimate: f64) -> BaselineResult {
        BaselineResult {
            estimate,
            transition_calls: self.draws,
            reward_calls: self.draws,
            max_depth_reached: self.depth,
        }
    }
}

/// Uniform look-ahead to a fixed depth: every action of every MAX node is
/// expanded and every AVG node draws `width` successors.
pub fn sparse_sampling<M: GenerativeModel>(
    model: &M,
    root: &Root<M::State>,
    config: &SparseSamplingConfig,
    rng: &mut RngStream,
) -> Result<BaselineResult, BaselineError> {
    if config.width == 0 {
        return Err(BaselineError::InvalidConfig("width must be at least 1".into()));
    }
    let mut calls = Calls::new();
    let estimate = match root {
        Root::Max(s) => sparse_max(model, s, config.horizon, 0, config, rng, &mut calls)?,
        Root::Avg(s, a) => sparse_avg(model, s, *a, config.horizon, 0, config, rng, &mut calls)?,
    };
    Ok(calls.result(estimate))
}

fn sparse_max<M: GenerativeModel>(
    model: &M,
    state: &M::State,
    horizon: usize,
    depth: usize,
    config: &SparseSamplingConfig,
    rng: &mut RngStream,
    calls: &mut Calls,
) -> Result<f64, BaselineError> {
    calls.visit(depth);
    if horizon == 0 {
        return Ok(0.0);
    }
    let mut best = f64::NEG_INFINITY;
    for a in 0..model.action_count(state) {
        best = best.max(sparse_avg(model, state, a, horizon, depth + 1, config, rng, calls)?);
    }
    Ok(best)
}

#[allow(clippy::too_many_arguments)]
fn sparse_avg<M: GenerativeModel>(
    model: &M,
    state: &M::State,
    action: usize,
    horizon: usize,
    depth: usize,
    config: &SparseSamplingConfig,
    rng: &mut RngStream,
    calls: &mut Calls,
) -> Result<f64, BaselineError> {
    calls.visit(depth);
    if horizon == 0 {
        return Ok(0.0);
    }
    let gamma = model.discount();
    let width = config.width;
    let mut total = 0.0;
    if !config.merge_duplicates {
        for _ in 0..width {
            let t = sample_transition(model, state, action, rng)?;
            calls.draws += 1;
            total += t.reward + gamma * sparse_max(model, &t.next, horizon - 1, depth + 1, config, rng, calls)?;
        }
        return Ok(total / width as f64);
    }
    let mut children: Vec<(M::State, u64)> = Vec::new();
    let mut index: HashMap<M::State, usize> = HashMap::new();
    for _ in 0..width {
        let t = sample_transition(model, state, action, rng)?;
        calls.draws += 1;
        total += t.reward;
        group(&mut children, &mut index, t.next);
    }
    for (child, k) in &children {
        total += gamma * *k as f64 * sparse_max(model, child, horizon - 1, depth + 1, config, rng, calls)?;
    }
    Ok(total / width as f64)
}

/// Counts `next` among successors kept in order of first appearance.
fn group<S: Clone + Eq + std::hash::Hash>(
    children: &mut Vec<(S, u64)>,
    index: &mut HashMap<S, usize>,
    next: S,
) {
    match index.get(&next) {
        Some(&i) => children[i].1 += 1,
        None => {
            index.insert(next.clone(), children.len());
            children.push((next, 1));
        }
    }
}

/// Monte-Carlo evaluation of a single-action model with the planner's exact
/// recursion: same early-exit guard, same first-appearance grouping of
/// successors, same `(k, ε/γ)` schedule and the same draw order. On such a
/// model it reproduces the planner bit for bit.
pub fn monte_carlo_eval<M: GenerativeModel>(
    model: &M,
    root: &Root<M::State>,
    m: u64,
    eps: f64,
    rng: &mut RngStream,
) -> Result<BaselineResult, BaselineError> {
    let mut calls = Calls::new();
    let estimate = match root {
        Root::Max(s) => {
            single_action(model, s)?;
            mc_avg(model, s, 0, m, eps, 1, rng, &mut calls)?
        }
        Root::Avg(s, a) => mc_avg(model, s, *a, m, eps, 0, rng, &mut calls)?,
    };
    Ok(calls.result(estimate))
}

fn single_action<M: GenerativeModel>(model: &M, state: &M::State) -> Result<(), BaselineError> {
    let actions = model.action_count(state);
    if actions != 1 {
        return Err(BaselineError::MultipleActions {
            state: format!("{state:?}"),
            actions,
        });
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn mc_avg<M: GenerativeModel>(
    model: &M,
    state: &M::State,
    action: usize,
    m: u64,
    eps: f64,
    depth: usize,
    rng: &mut RngStream,
    calls: &mut Calls,
) -> Result<f64, BaselineError> {
    calls.visit(depth);
    let gamma = model.discount();
    let half_range = 1.0 / (2.0 * (1.0 - gamma));
    if eps >= half_range {
        return Ok(half_range);
    }
    let mut reward_sum = 0.0;
    // distinct successors in order of first appearance, with multiplicities
    let mut children: Vec<(M::State, u64)> = Vec::new();
    let mut index: HashMap<M::State, usize> = HashMap::new();
    for _ in 0..m {
        let t = sample_transition(model, state, action, rng)?;
        calls.draws += 1;
        reward_sum += t.reward;
        group(&mut children, &mut index, t.next);
    }
    let mut mu = 0.0;
    for (child, k) in &children {
        single_action(model, child)?;
        // the elided MAX node sits at depth + 1
        let nu = mc_avg(model, child, 0, *k, eps / gamma, depth + 2, rng, calls)?;
        mu += nu * *k as f64 / m as f64;
    }
    Ok(reward_sum / m as f64 + gamma * mu)
}
