use serde::{Deserialize, Serialize};

use super::model::Root;
use super::tabular::TabularMdp;

/// Bracket `[lower, upper]` around the optimal value of a node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValueBounds {
    pub lower: f64,
    pub upper: f64,
    pub horizon: usize,
}

impl ValueBounds {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }
}

/// Smallest horizon whose tail `γ^h / (1 − γ)` is at most `width`.
pub fn horizon_for_width(gamma: f64, width: f64) -> usize {
    assert!(width > 0.0, "width must be positive");
    let mut h = 0usize;
    let mut tail = 1.0 / (1.0 - gamma);
    while tail > width {
        tail *= gamma;
        h += 1;
    }
    h
}

/// Finite-horizon optimal action values `Q_h` for every state-action, plus
/// the matching state values `V_h`.
fn truncated_values(mdp: &TabularMdp, horizon: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let gamma = mdp.gamma();
    let mut v = vec![0.0; mdp.n_states()];
    let mut q: Vec<Vec<f64>> = mdp
        .states()
        .iter()
        .map(|s| vec![0.0; s.actions.len()])
        .collect();
    for _ in 0..horizon {
        for (s, spec) in mdp.states().iter().enumerate() {
            for (a, act) in spec.actions.iter().enumerate() {
                let future: f64 = act.next.iter().map(|o| o.p * v[o.state]).sum();
                q[s][a] = act.reward.mean() + gamma * future;
            }
        }
        for (vs, qs) in v.iter_mut().zip(&q) {
            *vs = qs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        }
    }
    (v, q)
}

/// Optimal value of `node` truncated after `horizon` reward steps, with the
/// discounted tail bound added to the upper end. MAX nodes take the best
/// action; AVG nodes evaluate their designated action.
pub fn exact_value(mdp: &TabularMdp, node: &Root<usize>, horizon: usize) -> ValueBounds {
    let gamma = mdp.gamma();
    let tail = gamma.powi(horizon as i32) / (1.0 - gamma);
    if horizon == 0 {
        return ValueBounds {
            lower: 0.0,
            upper: tail,
            horizon,
        };
    }
    let (v, q) = truncated_values(mdp, horizon);
    let lower = match *node {
        Root::Max(s) => v[s],
        Root::Avg(s, a) => q[s][a],
    };
    ValueBounds {
        lower,
        upper: lower + tail,
        horizon,
    }
}

/// Optimal state and action values of a tabular MDP, each within a certified
/// tolerance of the infinite-horizon value.
#[derive(Debug, Clone)]
pub struct ValueTable {
    state: Vec<f64>,
    action: Vec<Vec<f64>>,
    tolerance: f64,
}

impl ValueTable {
    /// Solves to absolute error at most `tolerance`.
    pub fn solve(mdp: &TabularMdp, tolerance: f64) -> Self {
        // midpoint of a bracket of width 2·tolerance is within tolerance
        let horizon = horizon_for_width(mdp.gamma(), 2.0 * tolerance);
        let (v, q) = truncated_values(mdp, horizon);
        let half_tail = 0.5 * mdp.gamma().powi(horizon as i32) / (1.0 - mdp.gamma());
        Self {
            state: v.into_iter().map(|x| x + half_tail).collect(),
            action: q
                .into_iter()
                .map(|qs| qs.into_iter().map(|x| x + half_tail).collect())
                .collect(),
            tolerance,
        }
    }

    pub fn state_value(&self, s: usize) -> f64 {
        self.state[s]
    }

    pub fn action_value(&self, s: usize, a: usize) -> f64 {
        self.action[s][a]
    }

    pub fn action_values(&self, s: usize) -> &[f64] {
        &self.action[s]
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn node_value(&self, node: &Root<usize>) -> f64 {
        match *node {
            Root::Max(s) => self.state[s],
            Root::Avg(s, a) => self.action[s][a],
        }
    }

    /// Best minus second-best action value at `s`; `+∞` for single-action states.
    pub fn gap(&self, s: usize) -> f64 {
        let qs = &self.action[s];
        if qs.len() < 2 {
            return f64::INFINITY;
        }
        let mut best = f64::NEG_INFINITY;
        let mut second = f64::NEG_INFINITY;
        for &q in qs {
            if q > best {
                second = best;
                best = q;
            } else if q > second {
                second = q;
            }
        }
        best - second
    }
}
