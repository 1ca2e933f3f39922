//! Seeded PAC experiments over an (ε, δ) grid.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, DiscreteCDF};
use trailblazer::baselines::{monte_carlo_eval, sparse_sampling, SparseSamplingConfig};
use trailblazer::mdp::{rng_stream, GenerativeModel};
use trailblazer::planner::root_samples;
use trailblazer::{plan, PlanError, PlannerConfig};

use crate::source::{Model, ModelSpec};
use crate::BenchError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "name")]
pub enum PlannerKind {
    Trailblazer,
    Sparse(SparseSamplingConfig),
    /// Plain Monte-Carlo evaluation with the planner's root budget and bias;
    /// single-action models only.
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub model: ModelSpec,
    pub planner: PlannerKind,
    pub epsilons: Vec<f64>,
    pub deltas: Vec<f64>,
    pub trials: usize,
    /// Trial `i` of every cell uses seed `base_seed + i`.
    pub base_seed: u64,
    pub call_cap: Option<u64>,
    /// Measure wall time. Off by default so that reports are reproducible
    /// byte for byte.
    pub record_wall_time: bool,
}

impl ExperimentSpec {
    pub fn new(model: ModelSpec, epsilons: Vec<f64>, deltas: Vec<f64>, trials: usize) -> Self {
        Self {
            model,
            planner: PlannerKind::Trailblazer,
            epsilons,
            deltas,
            trials,
            base_seed: 0,
            call_cap: None,
            record_wall_time: false,
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.trials == 0 {
            return Err(BenchError::Invalid("trials must be at least 1".into()));
        }
        if self.epsilons.is_empty() || self.deltas.is_empty() {
            return Err(BenchError::Invalid("epsilon and delta grids must be non-empty".into()));
        }
        if let Some(e) = self.epsilons.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
            return Err(BenchError::Invalid(format!("epsilon {e} must be positive and finite")));
        }
        if let Some(d) = self.deltas.iter().find(|d| !(**d > 0.0 && **d < 1.0)) {
            return Err(BenchError::Invalid(format!("delta {d} outside (0, 1)")));
        }
        if let PlannerKind::Sparse(cfg) = &self.planner {
            if cfg.width == 0 {
                return Err(BenchError::Invalid("sparse sampling width must be at least 1".into()));
            }
        }
        if self.trials as u64 > u64::MAX - self.base_seed {
            return Err(BenchError::Invalid("seed range overflows".into()));
        }
        Ok(())
    }

    /// Grid cells in report order: ascending ε, then ascending δ.
    pub fn cells(&self) -> Vec<(f64, f64)> {
        let mut eps = self.epsilons.clone();
        let mut deltas = self.deltas.clone();
        eps.sort_by(f64::total_cmp);
        eps.dedup();
        deltas.sort_by(f64::total_cmp);
        deltas.dedup();
        eps.iter()
            .flat_map(|&e| deltas.iter().map(move |&d| (e, d)))
            .collect()
    }
}

/// One seeded run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    pub estimate: f64,
    /// Root value; absent when it cannot be bracketed within `ε/10`.
    pub truth: Option<f64>,
    /// `|estimate − truth| ≤ ε`; absent without a truth.
    pub success: Option<bool>,
    pub oracle_calls: u64,
    pub transition_calls: u64,
    pub reward_calls: u64,
    pub depth: usize,
    pub wall_time_ms: f64,
}

struct RunOutput {
    estimate: f64,
    transition_calls: u64,
    reward_calls: u64,
    depth: usize,
}

/// Runs every trial of every cell. Stops at the first trial that hits the
/// call cap.
pub fn run_pac_experiment(spec: &ExperimentSpec) -> Result<Vec<TrialRecord>, BenchError> {
    spec.validate()?;
    let model = spec.model.build()?;
    let mut records = Vec::with_capacity(spec.cells().len() * spec.trials);
    for (epsilon, delta) in spec.cells() {
        let truth = model.truth(epsilon);
        for i in 0..spec.trials {
            let seed = spec.base_seed + i as u64;
            let started = Instant::now();
            let out = match &model {
                Model::Tabular(mdp) => run_one(mdp, spec, epsilon, delta, seed)?,
                Model::Toy(toy) => run_one(toy, spec, epsilon, delta, seed)?,
            };
            let wall_time_ms = if spec.record_wall_time {
                started.elapsed().as_secs_f64() * 1e3
            } else {
                0.0
            };
            records.push(TrialRecord {
                epsilon,
                delta,
                seed,
                estimate: out.estimate,
                truth,
                success: truth.map(|v| (out.estimate - v).abs() <= epsilon),
                oracle_calls: out.transition_calls + out.reward_calls,
                transition_calls: out.transition_calls,
                reward_calls: out.reward_calls,
                depth: out.depth,
                wall_time_ms,
            });
        }
    }
    Ok(records)
}

fn run_one<M: GenerativeModel>(
    model: &M,
    spec: &ExperimentSpec,
    epsilon: f64,
    delta: f64,
    seed: u64,
) -> Result<RunOutput, BenchError> {
    let gamma = model.discount();
    let mut rng = rng_stream(seed);
    let out = match &spec.planner {
        PlannerKind::Trailblazer => {
            let mut config = PlannerConfig::new(gamma, delta, epsilon).map_err(|source| BenchError::Plan { seed, source })?;
            config.call_cap = spec.call_cap;
            let r = plan(model, &config, &mut rng).map_err(|source| match source {
                PlanError::BudgetExceeded { calls, cap } => BenchError::Budget { seed, calls, cap },
                source => BenchError::Plan { seed, source },
            })?;
            RunOutput {
                estimate: r.estimate,
                transition_calls: r.transition_calls,
                reward_calls: r.reward_calls,
                depth: r.max_depth_reached,
            }
        }
        PlannerKind::Sparse(cfg) => {
            let r = sparse_sampling(model, &model.root(), cfg, &mut rng)
                .map_err(|source| BenchError::Baseline { seed, source })?;
            RunOutput {
                estimate: r.estimate,
                transition_calls: r.transition_calls,
                reward_calls: r.reward_calls,
                depth: r.max_depth_reached,
            }
        }
        PlannerKind::MonteCarlo => {
            let m = root_samples(delta, epsilon, gamma);
            let r = monte_carlo_eval(model, &model.root(), m, epsilon / 2.0, &mut rng)
                .map_err(|source| BenchError::Baseline { seed, source })?;
            RunOutput {
                estimate: r.estimate,
                transition_calls: r.transition_calls,
                reward_calls: r.reward_calls,
                depth: r.max_depth_reached,
            }
        }
    };
    if let Some(cap) = spec.call_cap {
        let calls = out.transition_calls + out.reward_calls;
        if calls > cap {
            return Err(BenchError::Budget { seed, calls, cap });
        }
    }
    Ok(out)
}

/// Coverage level of the failure-count bound.
pub const COVERAGE_LEVEL: f64 = 0.999;

/// Upper critical count of `X ~ Binomial(n, p)`: the smallest `k` with
/// `P(X ≥ k) ≤ 1 − level`, capped at `n`. For (200, 0.1, 0.999) this is 35.
pub fn binomial_upper_quantile(n: u64, p: f64, level: f64) -> u64 {
    // P(X ≥ k) ≤ 1 − level  ⇔  P(X ≤ k − 1) ≥ level
    let q = Binomial::new(p, n).expect("valid binomial parameters").inverse_cdf(level);
    (q + 1).min(n)
}

/// Per-cell statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub epsilon: f64,
    pub delta: f64,
    pub trials: usize,
    /// Trials with `|estimate − truth| > ε`; absent without a truth.
    pub failures: Option<usize>,
    /// Binomial(trials, δ) upper critical count at [`COVERAGE_LEVEL`].
    pub failure_bound: u64,
    pub covered: Option<bool>,
    pub mean_calls: f64,
    pub std_calls: f64,
    pub min_calls: u64,
    pub max_calls: u64,
    pub max_depth: usize,
}

/// Groups records into cells, keeping the order of first appearance.
pub fn summarize(records: &[TrialRecord]) -> Vec<CellSummary> {
    let mut cells: Vec<((f64, f64), Vec<&TrialRecord>)> = Vec::new();
    for r in records {
        let key = (r.epsilon, r.delta);
        match cells.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(r),
            None => cells.push((key, vec![r])),
        }
    }
    cells
        .into_iter()
        .map(|((epsilon, delta), rs)| {
            let n = rs.len();
            let calls: Vec<f64> = rs.iter().map(|r| r.oracle_calls as f64).collect();
            let mean = calls.iter().sum::<f64>() / n as f64;
            let var = if n > 1 {
                calls.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1) as f64
            } else {
                0.0
            };
            let failures = rs
                .iter()
                .map(|r| r.success.map(|s| !s as usize))
                .sum::<Option<usize>>();
            let failure_bound = binomial_upper_quantile(n as u64, delta, COVERAGE_LEVEL);
            CellSummary {
                epsilon,
                delta,
                trials: n,
                failures,
                failure_bound,
                covered: failures.map(|f| f as u64 <= failure_bound),
                mean_calls: mean,
                std_calls: var.sqrt(),
                min_calls: rs.iter().map(|r| r.oracle_calls).min().unwrap_or(0),
                max_calls: rs.iter().map(|r| r.oracle_calls).max().unwrap_or(0),
                max_depth: rs.iter().map(|r| r.depth).max().unwrap_or(0),
            }
        })
        .collect()
}
