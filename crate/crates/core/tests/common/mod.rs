#![allow(dead_code)]

pub mod brute;

use trailblazer::mdp::{ActionSpec, Outcome, RewardDist, Root, StateSpec, TabularMdp};

pub fn action(reward: RewardDist, next: &[(usize, f64)]) -> ActionSpec {
    ActionSpec {
        reward,
        next: next.iter().map(|&(state, p)| Outcome { state, p }).collect(),
    }
}

pub fn constant(c: f64) -> RewardDist {
    RewardDist::Constant { c }
}

pub fn bernoulli(p: f64) -> RewardDist {
    RewardDist::Bernoulli { p }
}

pub fn state(actions: Vec<ActionSpec>) -> StateSpec {
    StateSpec { actions }
}

/// One state, one action, reward `c`, looping on itself.
pub fn self_loop(gamma: f64, c: f64) -> TabularMdp {
    TabularMdp::new(gamma, Root::Max(0), vec![state(vec![action(constant(c), &[(0, 1.0)])])]).unwrap()
}

/// Root with two actions paying 0.8 and 0.2 once, then an absorbing
/// zero-reward state. Value 0.8, gap 0.6.
pub fn gap_mdp(gamma: f64) -> TabularMdp {
    TabularMdp::new(
        gamma,
        Root::Max(0),
        vec![
            state(vec![
                action(constant(0.8), &[(1, 1.0)]),
                action(constant(0.2), &[(2, 1.0)]),
            ]),
            state(vec![action(constant(0.0), &[(1, 1.0)])]),
            state(vec![action(constant(0.0), &[(2, 1.0)])]),
        ],
    )
    .unwrap()
}

/// Stochastic K=1 chain over four states.
pub fn stochastic_chain(gamma: f64) -> TabularMdp {
    TabularMdp::new(
        gamma,
        Root::Max(0),
        vec![
            state(vec![action(bernoulli(0.7), &[(1, 0.5), (2, 0.3), (3, 0.2)])]),
            state(vec![action(bernoulli(0.2), &[(0, 0.4), (2, 0.6)])]),
            state(vec![action(constant(0.5), &[(3, 1.0)])]),
            state(vec![action(bernoulli(0.9), &[(0, 0.3), (1, 0.3), (3, 0.4)])]),
        ],
    )
    .unwrap()
}

/// One state with two self-loops paying 0.8 and 0.2: every MAX node has gap 0.6.
pub fn gapped_loop(gamma: f64) -> TabularMdp {
    TabularMdp::new(
        gamma,
        Root::Max(0),
        vec![state(vec![
            action(constant(0.8), &[(0, 1.0)]),
            action(constant(0.2), &[(0, 1.0)]),
        ])],
    )
    .unwrap()
}
