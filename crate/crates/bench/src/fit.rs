//! Power-law fits of oracle calls against `1/ε`.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use trailblazer::difficulty::least_squares;

use crate::experiment::TrialRecord;
use crate::BenchError;

pub const MIN_EPSILONS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitPoint {
    pub epsilon: f64,
    pub mean_calls: f64,
    pub trials: usize,
}

/// `ln(mean calls) = intercept + slope · ln(1/ε)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_std_err: f64,
    /// Two-sided Student-t interval for the slope at `confidence`.
    pub ci_low: f64,
    pub ci_high: f64,
    pub confidence: f64,
    pub rms_residual: f64,
    pub r_squared: f64,
    pub points: Vec<FitPoint>,
}

/// Mean oracle calls per distinct ε, in ascending ε order.
pub fn mean_calls_by_epsilon(records: &[TrialRecord]) -> Vec<FitPoint> {
    let mut points: Vec<FitPoint> = Vec::new();
    for r in records {
        match points.iter_mut().find(|p| p.epsilon == r.epsilon) {
            Some(p) => {
                p.mean_calls += r.oracle_calls as f64;
                p.trials += 1;
            }
            None => points.push(FitPoint {
                epsilon: r.epsilon,
                mean_calls: r.oracle_calls as f64,
                trials: 1,
            }),
        }
    }
    for p in &mut points {
        p.mean_calls /= p.trials as f64;
    }
    points.sort_by(|a, b| a.epsilon.total_cmp(&b.epsilon));
    points
}

/// Fits the complexity exponent from trial records (all δ pooled per ε).
pub fn fit_complexity_exponent(records: &[TrialRecord]) -> Result<ExponentFit, BenchError> {
    fit_points(mean_calls_by_epsilon(records))
}

pub fn fit_points(points: Vec<FitPoint>) -> Result<ExponentFit, BenchError> {
    if points.len() < MIN_EPSILONS {
        return Err(BenchError::InsufficientGrid(format!(
            "{} distinct epsilon values, need at least {MIN_EPSILONS}",
            points.len()
        )));
    }
    if let Some(p) = points.iter().find(|p| p.mean_calls <= 0.0) {
        return Err(BenchError::InsufficientGrid(format!(
            "no oracle calls at epsilon {}",
            p.epsilon
        )));
    }
    let data: Vec<(f64, f64)> = points
        .iter()
        .map(|p| ((1.0 / p.epsilon).ln(), p.mean_calls.ln()))
        .collect();
    let line = least_squares(&data);
    let mean_y = data.iter().map(|d| d.1).sum::<f64>() / data.len() as f64;
    let sst: f64 = data.iter().map(|d| (d.1 - mean_y).powi(2)).sum();
    let sse = line.rms_residual.powi(2) * data.len() as f64;
    let confidence = 0.95;
    let dof = (data.len() - 2) as f64;
    let t = StudentsT::new(0.0, 1.0, dof)
        .expect("at least two degrees of freedom")
        .inverse_cdf(0.5 + confidence / 2.0);
    Ok(ExponentFit {
        slope: line.slope,
        intercept: line.intercept,
        slope_std_err: line.slope_std_err,
        ci_low: line.slope - t * line.slope_std_err,
        ci_high: line.slope + t * line.slope_std_err,
        confidence,
        rms_residual: line.rms_residual,
        r_squared: if sst > 0.0 { 1.0 - sse / sst } else { 1.0 },
        points,
    })
}

/// Adjacent pairs `(ε_small, ε_large)` whose mean demand rises with ε by
/// more than `tolerance` (relative).
pub fn demand_inversions(points: &[FitPoint], tolerance: f64) -> Vec<(f64, f64)> {
    points
        .windows(2)
        .filter(|w| w[1].mean_calls > w[0].mean_calls * (1.0 + tolerance))
        .map(|w| (w[0].epsilon, w[1].epsilon))
        .collect()
}
