use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::model::{rng_stream, Root};
use super::tabular::{ActionSpec, Outcome, RewardDist, StateSpec, TabularMdp};
use super::MdpError;

/// Parameters of a random benchmark instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomMdpSpec {
    pub seed: u64,
    pub n_states: usize,
    /// Actions per state (K).
    pub actions: usize,
    /// Nonzero entries per transition row (N).
    pub branching: usize,
    /// Probability that a state-action reward is forced to zero.
    pub reward_sparsity: f64,
    pub gamma: f64,
}

/// Generates a random tabular MDP rooted at state 0 (MAX root).
///
/// Every row has exactly `branching` distinct successors with normalized
/// uniform weights; rewards are Bernoulli with uniform parameters, replaced by
/// a constant zero with probability `reward_sparsity`. Output depends only on
/// the spec.
pub fn make_random_mdp(spec: &RandomMdpSpec) -> Result<TabularMdp, MdpError> {
    if spec.n_states == 0 || spec.actions == 0 || spec.branching == 0 {
        return Err(MdpError::Dimensions(
            "states, actions and branching must be positive".into(),
        ));
    }
    if spec.branching > spec.n_states {
        return Err(MdpError::Dimensions(format!(
            "branching {} exceeds state count {}",
            spec.branching, spec.n_states
        )));
    }
    if !(0.0..=1.0).contains(&spec.reward_sparsity) {
        return Err(MdpError::Dimensions(format!(
            "reward sparsity {} outside [0, 1]",
            spec.reward_sparsity
        )));
    }
    let mut rng = rng_stream(spec.seed);
    let mut states = Vec::with_capacity(spec.n_states);
    for _ in 0..spec.n_states {
        let mut actions = Vec::with_capacity(spec.actions);
        for _ in 0..spec.actions {
            let mut targets = sample(&mut rng, spec.n_states, spec.branching).into_vec();
            targets.sort_unstable();
            let weights: Vec<f64> = targets
                .iter()
                .map(|_| 1.0 - rng.random::<f64>())
                .collect();
            let total: f64 = weights.iter().sum();
            let next = targets
                .into_iter()
                .zip(weights)
                .map(|(state, w)| Outcome {
                    state,
                    p: w / total,
                })
                .collect();
            let p = rng.random::<f64>();
            let reward = if rng.random::<f64>() < spec.reward_sparsity {
                RewardDist::Constant { c: 0.0 }
            } else {
                RewardDist::Bernoulli { p }
            };
            actions.push(ActionSpec { reward, next });
        }
        states.push(StateSpec { actions });
    }
    TabularMdp::new(spec.gamma, Root::Max(0), states)
}
