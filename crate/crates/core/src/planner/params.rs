use serde::{Deserialize, Serialize};

use super::PlanError;

/// Parameters of one planning run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannerConfig {
    pub gamma: f64,
    /// Global confidence parameter.
    pub delta: f64,
    /// Target accuracy of the root estimate.
    pub epsilon: f64,
    /// Numerator constant of the confidence radius.
    pub u_constant: f64,
    /// Include the `1/(1 − η)` factor in the confidence radius.
    pub u_eta_factor: bool,
    /// Abort once this many oracle calls have been made.
    pub call_cap: Option<u64>,
}

impl PlannerConfig {
    pub fn new(gamma: f64, delta: f64, epsilon: f64) -> Result<Self, PlanError> {
        let config = Self {
            gamma,
            delta,
            epsilon,
            u_constant: 4.0,
            u_eta_factor: true,
            call_cap: None,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_call_cap(mut self, cap: u64) -> Self {
        self.call_cap = Some(cap);
        self
    }

    pub fn validate(&self) -> Result<(), PlanError> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(PlanError::InvalidConfig(format!(
                "gamma {} outside (0, 1)",
                self.gamma
            )));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(PlanError::InvalidConfig(format!(
                "delta {} outside (0, 1)",
                self.delta
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(PlanError::InvalidConfig(format!(
                "epsilon {} must be positive",
                self.epsilon
            )));
        }
        if !(self.u_constant > 0.0 && self.u_constant.is_finite()) {
            return Err(PlanError::InvalidConfig(format!(
                "u_constant {} must be positive",
                self.u_constant
            )));
        }
        Ok(())
    }

    /// Sample budget `m` handed to the root.
    pub fn root_samples(&self) -> u64 {
        root_samples(self.delta, self.epsilon, self.gamma)
    }

    /// Deepest node a run may touch; the root is called with `ε/2`.
    pub fn max_depth_guard(&self) -> usize {
        max_depth(self.epsilon / 2.0, self.gamma)
    }
}

/// `⌈ln(1/δ) / ((1 − γ)² ε²)⌉`, at least 1.
pub fn root_samples(delta: f64, epsilon: f64, gamma: f64) -> u64 {
    let m = (1.0 / delta).ln() / ((1.0 - gamma).powi(2) * epsilon * epsilon);
    (m.ceil() as u64).max(1)
}

/// Shrink factor `γ^(1/max(2, ln(1/ε)))` splitting a MAX node's bias budget.
pub fn eta(eps: f64, gamma: f64) -> f64 {
    gamma.powf(1.0 / (1.0 / eps).ln().max(2.0))
}

/// Proven maximum recursion depth for a root call with bias `eps`.
///
/// The rounded-up term is floored at 1, so the result is always even and at
/// least 4, also when `eps` already exceeds the value range.
pub fn max_depth(eps: f64, gamma: f64) -> usize {
    let eta = eta(eps, gamma);
    let levels = ((1.0 / eps).ln() + (1.0 / (1.0 - gamma)).ln()) / (eta / gamma).ln();
    let levels = levels.ceil().max(1.0) as usize;
    2 * levels + 2
}

/// Confidence radius of a child sampled `k` times at oracle time `t_eff`.
pub fn confidence_radius(k: u64, t_eff: u64, config: &PlannerConfig, eta_val: f64) -> f64 {
    if k == 0 {
        return f64::INFINITY;
    }
    let mut scale = config.u_constant / (1.0 - config.gamma);
    if config.u_eta_factor {
        scale /= 1.0 - eta_val;
    }
    scale * ((t_eff as f64 / config.delta).ln() / k as f64).sqrt()
}
