use rand::Rng;
use serde::{Deserialize, Serialize};

use super::model::{GenerativeModel, RngStream, Root, Transition};
use super::{MdpError, ModelError};

/// Allowed deviation of a transition row sum from 1.
pub const ROW_SUM_TOLERANCE: f64 = 1e-12;

/// Reward distribution of a state-action pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum RewardDist {
    Bernoulli { p: f64 },
    Constant { c: f64 },
}

impl RewardDist {
    pub fn mean(&self) -> f64 {
        match *self {
            RewardDist::Bernoulli { p } => p,
            RewardDist::Constant { c } => c,
        }
    }

    fn parameter(&self) -> (&'static str, f64) {
        match *self {
            RewardDist::Bernoulli { p } => ("bernoulli parameter", p),
            RewardDist::Constant { c } => ("constant reward", c),
        }
    }

    fn sample(&self, rng: &mut RngStream) -> f64 {
        match *self {
            RewardDist::Bernoulli { p } => {
                if rng.random::<f64>() < p {
                    1.0
                } else {
                    0.0
                }
            }
            RewardDist::Constant { c } => c,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub state: usize,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionSpec {
    pub reward: RewardDist,
    pub next: Vec<Outcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSpec {
    pub actions: Vec<ActionSpec>,
}

/// A validated finite MDP with explicit transition and reward tables.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularMdp {
    gamma: f64,
    root: Root<usize>,
    states: Vec<StateSpec>,
}

impl TabularMdp {
    pub fn new(gamma: f64, root: Root<usize>, states: Vec<StateSpec>) -> Result<Self, MdpError> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(MdpError::Discount(gamma));
        }
        if states.is_empty() {
            return Err(MdpError::Empty);
        }
        let n_states = states.len();
        for (s, spec) in states.iter().enumerate() {
            if spec.actions.is_empty() {
                return Err(MdpError::NoActions(s));
            }
            for (a, act) in spec.actions.iter().enumerate() {
                let (what, value) = act.reward.parameter();
                if !(0.0..=1.0).contains(&value) {
                    return Err(MdpError::Parameter {
                        state: s,
                        action: a,
                        what,
                        value,
                    });
                }
                let mut sum = 0.0;
                for o in &act.next {
                    if o.state >= n_states {
                        return Err(MdpError::UnknownState {
                            state: s,
                            action: a,
                            target: o.state,
                            n_states,
                        });
                    }
                    if !(0.0..=1.0).contains(&o.p) {
                        return Err(MdpError::Parameter {
                            state: s,
                            action: a,
                            what: "transition probability",
                            value: o.p,
                        });
                    }
                    sum += o.p;
                }
                if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                    return Err(MdpError::RowSum {
                        state: s,
                        action: a,
                        sum,
                    });
                }
            }
        }
        match root {
            Root::Max(s) if s < n_states => {}
            Root::Avg(s, a) if s < n_states && a < states[s].actions.len() => {}
            Root::Max(s) => return Err(MdpError::Root(format!("state {s} does not exist"))),
            Root::Avg(s, a) => {
                return Err(MdpError::Root(format!(
                    "state-action ({s}, {a}) does not exist"
                )))
            }
        }
        Ok(Self {
            gamma,
            root,
            states,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn root_node(&self) -> &Root<usize> {
        &self.root
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[StateSpec] {
        &self.states
    }

    pub fn actions(&self, state: usize) -> &[ActionSpec] {
        &self.states[state].actions
    }

    pub fn actions_per_state(&self) -> Vec<usize> {
        self.states.iter().map(|s| s.actions.len()).collect()
    }

    /// Largest action count over all states.
    pub fn max_actions(&self) -> usize {
        self.states.iter().map(|s| s.actions.len()).max().unwrap_or(0)
    }

    /// Largest number of nonzero entries in any transition row.
    pub fn max_branching(&self) -> usize {
        self.states
            .iter()
            .flat_map(|s| s.actions.iter())
            .map(|a| a.next.iter().filter(|o| o.p > 0.0).count())
            .max()
            .unwrap_or(0)
    }

    /// Same MDP with a different root.
    pub fn with_root(&self, root: Root<usize>) -> Result<Self, MdpError> {
        Self::new(self.gamma, root, self.states.clone())
    }
}

impl GenerativeModel for TabularMdp {
    type State = usize;

    fn discount(&self) -> f64 {
        self.gamma
    }

    fn root(&self) -> Root<usize> {
        self.root.clone()
    }

    fn action_count(&self, state: &usize) -> usize {
        self.states[*state].actions.len()
    }

    fn sample(
        &self,
        state: &usize,
        action: usize,
        rng: &mut RngStream,
    ) -> Result<Transition<usize>, ModelError> {
        let actions = &self.states[*state].actions;
        let spec = actions.get(action).ok_or(ModelError::InvalidAction {
            action,
            count: actions.len(),
        })?;
        let u = rng.random::<f64>();
        let mut acc = 0.0;
        let mut next = None;
        for o in &spec.next {
            if o.p <= 0.0 {
                continue;
            }
            acc += o.p;
            next = Some(o.state);
            if u < acc {
                break;
            }
        }
        // rows are validated to sum to 1, so `next` is set; rounding can leave
        // u just above the final cumulative sum, in which case the last
        // nonzero outcome is used.
        let next = next.expect("validated row has a nonzero entry");
        let reward = spec.reward.sample(rng);
        Ok(Transition { reward, next })
    }
}
