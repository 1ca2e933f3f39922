use std::hash::{Hash, Hasher};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::model::{rng_stream, GenerativeModel, RngStream, Root, Transition};
use super::ModelError;

/// Distribution of MAX-node gaps in the continuous toy model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GapProfile {
    /// Gap `Δmin + (1 − Δmin)·x`, never below `Δmin`.
    BoundedGap { min_gap: f64 },
    /// Gap `min(1, (x / c)^(1/b))`, so `P(Δ ≤ y) = min(1, c·y^b)`.
    PowerLaw { b: f64, c: f64 },
}

impl GapProfile {
    fn validate(&self) -> Result<(), ModelError> {
        match *self {
            GapProfile::BoundedGap { min_gap } if min_gap > 0.0 && min_gap <= 1.0 => Ok(()),
            GapProfile::BoundedGap { min_gap } => Err(ModelError::InvalidProfile(format!(
                "bounded gap {min_gap} must lie in (0, 1]"
            ))),
            GapProfile::PowerLaw { b, c } if b > 0.0 && c > 0.0 && b.is_finite() && c.is_finite() => {
                Ok(())
            }
            GapProfile::PowerLaw { b, c } => Err(ModelError::InvalidProfile(format!(
                "power law needs b > 0 and c > 0 (got b = {b}, c = {c})"
            ))),
        }
    }

    /// Gap at coordinate `x ∈ [0, 1]`.
    pub fn gap_at(&self, x: f64) -> f64 {
        match *self {
            GapProfile::BoundedGap { min_gap } => min_gap + (1.0 - min_gap) * x,
            GapProfile::PowerLaw { b, c } => (x / c).powf(1.0 / b).min(1.0),
        }
    }

    /// Mean gap under a uniform coordinate.
    pub fn mean_gap(&self) -> f64 {
        match *self {
            GapProfile::BoundedGap { min_gap } => 0.5 * (1.0 + min_gap),
            GapProfile::PowerLaw { b, c } => {
                let shape = b / (b + 1.0);
                if c >= 1.0 {
                    c.powf(-1.0 / b) * shape
                } else {
                    c * shape + (1.0 - c)
                }
            }
        }
    }
}

/// State of the continuous toy: a coordinate in `[0, 1]` plus a random tag so
/// that two draws never compare equal, even on a coordinate collision.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ToyState {
    pub x: f64,
    pub tag: u64,
}

impl PartialEq for ToyState {
    fn eq(&self, other: &Self) -> bool {
        self.x.to_bits() == other.x.to_bits() && self.tag == other.tag
    }
}

impl Eq for ToyState {}

impl Hash for ToyState {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.x.to_bits().hash(state);
        self.tag.hash(state);
    }
}

/// Two-action model over the continuum `[0, 1]`.
///
/// Next coordinates are uniform regardless of state and action, so every
/// state has the same continuation value `C = (1 + E[g]) / (2(1 − γ))`.
/// Action 0 pays Bernoulli `(1 + g(x))/2`, action 1 pays `(1 − g(x))/2`, so the
/// gap at `x` is exactly `g(x)` and `V(x) = (1 + g(x))/2 + γC`.
#[derive(Debug, Clone)]
pub struct ContinuousToy {
    gamma: f64,
    profile: GapProfile,
    root: ToyState,
}

/// Builds the continuous toy with a seeded root coordinate.
pub fn make_continuous_toy(
    seed: u64,
    profile: GapProfile,
    gamma: f64,
) -> Result<ContinuousToy, ModelError> {
    profile.validate()?;
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(ModelError::Discount(gamma));
    }
    let mut rng = rng_stream(seed);
    let root = ToyState {
        x: rng.random::<f64>(),
        tag: 0,
    };
    Ok(ContinuousToy {
        gamma,
        profile,
        root,
    })
}

impl ContinuousToy {
    pub fn profile(&self) -> GapProfile {
        self.profile
    }

    pub fn root_state(&self) -> ToyState {
        self.root
    }

    fn mean_reward(&self, x: f64, action: usize) -> f64 {
        let g = self.profile.gap_at(x);
        if action == 0 {
            0.5 * (1.0 + g)
        } else {
            0.5 * (1.0 - g)
        }
    }

    /// Expected value of a freshly drawn state.
    pub fn continuation_value(&self) -> f64 {
        (1.0 + self.profile.mean_gap()) / (2.0 * (1.0 - self.gamma))
    }

    pub fn q_value(&self, state: &ToyState, action: usize) -> f64 {
        self.mean_reward(state.x, action) + self.gamma * self.continuation_value()
    }

    pub fn state_value(&self, state: &ToyState) -> f64 {
        self.q_value(state, 0)
    }

    pub fn gap(&self, state: &ToyState) -> f64 {
        self.q_value(state, 0) - self.q_value(state, 1)
    }

    pub fn root_value(&self) -> f64 {
        self.state_value(&self.root)
    }
}

impl GenerativeModel for ContinuousToy {
    type State = ToyState;

    fn discount(&self) -> f64 {
        self.gamma
    }

    fn root(&self) -> Root<ToyState> {
        Root::Max(self.root)
    }

    fn action_count(&self, _state: &ToyState) -> usize {
        2
    }

    fn sample(
        &self,
        state: &ToyState,
        action: usize,
        rng: &mut RngStream,
    ) -> Result<Transition<ToyState>, ModelError> {
        if action >= 2 {
            return Err(ModelError::InvalidAction { action, count: 2 });
        }
        let next = ToyState {
            x: rng.random::<f64>(),
            tag: rng.random::<u64>(),
        };
        let reward = if rng.random::<f64>() < self.mean_reward(state.x, action) {
            1.0
        } else {
            0.0
        };
        Ok(Transition { reward, next })
    }
}
