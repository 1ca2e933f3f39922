//! Where an experiment's model comes from: a JSON file, the random
//! generator, or the continuous toy.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use trailblazer::mdp::{
    exact_value, horizon_for_width, load_mdp, make_continuous_toy, make_random_mdp, ContinuousToy, GapProfile,
    RandomMdpSpec, TabularMdp,
};

use crate::BenchError;

/// `SEED,K,N,S`: generator seed, actions per state, successors per row,
/// number of states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomSource {
    pub seed: u64,
    pub actions: usize,
    pub branching: usize,
    pub n_states: usize,
}

impl FromStr for RandomSource {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let bad = || BenchError::Invalid(format!("expected SEED,K,N,S, got {s:?}"));
        if parts.len() != 4 {
            return Err(bad());
        }
        Ok(Self {
            seed: parts[0].parse().map_err(|_| bad())?,
            actions: parts[1].parse().map_err(|_| bad())?,
            branching: parts[2].parse().map_err(|_| bad())?,
            n_states: parts[3].parse().map_err(|_| bad())?,
        })
    }
}

/// Parses `bounded_gap(0.3)` or `power_law(3,1)`; a colon may replace the
/// parentheses (`bounded_gap:0.3`).
pub fn parse_profile(s: &str) -> Result<GapProfile, BenchError> {
    let bad = || BenchError::Invalid(format!("unknown gap profile {s:?}; use bounded_gap(MIN) or power_law(B,C)"));
    let s = s.trim();
    let (name, args) = match s.split_once('(') {
        Some((name, rest)) => (name, rest.strip_suffix(')').ok_or_else(bad)?),
        None => s.split_once(':').ok_or_else(bad)?,
    };
    let nums: Vec<f64> = args
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad())?;
    let profile = match (name.trim(), nums.as_slice()) {
        ("bounded_gap", &[min_gap]) => GapProfile::BoundedGap { min_gap },
        ("power_law", &[b, c]) => GapProfile::PowerLaw { b, c },
        _ => return Err(bad()),
    };
    Ok(profile)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MdpSource {
    File(PathBuf),
    Random(RandomSource),
    Toy(GapProfile),
}

impl fmt::Display for MdpSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MdpSource::File(p) => write!(f, "file {}", p.display()),
            MdpSource::Random(r) => write!(f, "random {},{},{},{}", r.seed, r.actions, r.branching, r.n_states),
            MdpSource::Toy(GapProfile::BoundedGap { min_gap }) => write!(f, "toy bounded_gap({min_gap})"),
            MdpSource::Toy(GapProfile::PowerLaw { b, c }) => write!(f, "toy power_law({b},{c})"),
        }
    }
}

/// Model description shared by every CLI subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub source: MdpSource,
    /// Discount for generated models; a file carries its own.
    pub gamma: Option<f64>,
    /// Probability that a generated reward is zeroed.
    pub reward_sparsity: f64,
    /// Seed of the toy's root coordinate.
    pub toy_seed: u64,
}

pub const DEFAULT_GAMMA: f64 = 0.5;
pub const DEFAULT_SPARSITY: f64 = 0.2;

impl ModelSpec {
    pub fn new(source: MdpSource) -> Self {
        Self {
            source,
            gamma: None,
            reward_sparsity: DEFAULT_SPARSITY,
            toy_seed: 0,
        }
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = Some(gamma);
        self
    }

    pub fn build(&self) -> Result<Model, BenchError> {
        let gamma = self.gamma.unwrap_or(DEFAULT_GAMMA);
        match &self.source {
            MdpSource::File(path) => {
                let mdp = load_mdp(path)?;
                if let Some(g) = self.gamma {
                    if g != mdp.gamma() {
                        return Err(BenchError::Invalid(format!(
                            "--gamma {g} differs from the file's discount {}",
                            mdp.gamma()
                        )));
                    }
                }
                Ok(Model::Tabular(mdp))
            }
            MdpSource::Random(r) => Ok(Model::Tabular(make_random_mdp(&RandomMdpSpec {
                seed: r.seed,
                n_states: r.n_states,
                actions: r.actions,
                branching: r.branching,
                reward_sparsity: self.reward_sparsity,
                gamma,
            })?)),
            MdpSource::Toy(profile) => make_continuous_toy(self.toy_seed, *profile, gamma)
                .map(Model::Toy)
                .map_err(|e| BenchError::Invalid(e.to_string())),
        }
    }
}

pub enum Model {
    Tabular(TabularMdp),
    Toy(ContinuousToy),
}

/// Longest value-iteration horizon spent on a truth bracket.
pub const TRUTH_HORIZON_CAP: usize = 100_000;

impl Model {
    pub fn gamma(&self) -> f64 {
        match self {
            Model::Tabular(m) => m.gamma(),
            Model::Toy(t) => trailblazer::mdp::GenerativeModel::discount(t),
        }
    }

    /// Root value, if it can be bracketed within `epsilon / 10`.
    pub fn truth(&self, epsilon: f64) -> Option<f64> {
        match self {
            Model::Tabular(mdp) => {
                let target = epsilon / 20.0;
                let horizon = horizon_for_width(mdp.gamma(), target).min(TRUTH_HORIZON_CAP);
                let bounds = exact_value(mdp, mdp.root_node(), horizon);
                (bounds.width() < epsilon / 10.0).then(|| bounds.midpoint())
            }
            Model::Toy(toy) => Some(toy.root_value()),
        }
    }
}
