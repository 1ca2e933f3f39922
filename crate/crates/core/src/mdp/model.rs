use std::fmt::Debug;
use std::hash::Hash;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ModelError;

/// Random stream owned by exactly one planning run.
pub type RngStream = ChaCha8Rng;

/// Builds the random stream for a given seed.
pub fn rng_stream(seed: u64) -> RngStream {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Whether the planning root is a state (MAX node) or a state-action (AVG node).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RootKind {
    Max,
    Avg,
}

/// A node of the planning tree identified by the MDP objects it stands for.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Root<S> {
    /// A state: the value is the maximum over its actions.
    Max(S),
    /// A state-action pair: the value is the expected reward plus the discounted next value.
    Avg(S, usize),
}

impl<S> Root<S> {
    pub fn kind(&self) -> RootKind {
        match self {
            Root::Max(_) => RootKind::Max,
            Root::Avg(..) => RootKind::Avg,
        }
    }

    pub fn state(&self) -> &S {
        match self {
            Root::Max(s) | Root::Avg(s, _) => s,
        }
    }
}

/// One draw from the generative model.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition<S> {
    pub reward: f64,
    pub next: S,
}

/// Sampling access to an MDP. Planners see the MDP only through this trait.
///
/// Implementations hold no mutable state: every draw comes from the caller's
/// [`RngStream`], so one model can serve many independent runs at once.
pub trait GenerativeModel {
    /// State identity. Equal values denote the same MDP state; AVG nodes merge
    /// sampled children by this equality.
    type State: Clone + Eq + Hash + Debug;

    fn discount(&self) -> f64;

    fn root(&self) -> Root<Self::State>;

    /// Number of actions available in `state`, at least 1.
    fn action_count(&self, state: &Self::State) -> usize;

    /// Draws a reward and a next state for `(state, action)`.
    ///
    /// Does no counting; the caller accounts for oracle calls.
    fn sample(
        &self,
        state: &Self::State,
        action: usize,
        rng: &mut RngStream,
    ) -> Result<Transition<Self::State>, ModelError>;
}

/// Free-function form of [`GenerativeModel::sample`] that also checks the
/// reward range in debug builds.
pub fn sample_transition<M: GenerativeModel>(
    model: &M,
    state: &M::State,
    action: usize,
    rng: &mut RngStream,
) -> Result<Transition<M::State>, ModelError> {
    let count = model.action_count(state);
    if action >= count {
        return Err(ModelError::InvalidAction { action, count });
    }
    let t = model.sample(state, action, rng)?;
    debug_assert!(
        (0.0..=1.0).contains(&t.reward),
        "reward {} outside [0, 1]",
        t.reward
    );
    Ok(t)
}
