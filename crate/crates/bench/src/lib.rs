//! Benchmark harness for the trailblazer planner: seeded PAC coverage
//! experiments, CSV/JSON reports and complexity-exponent fits.

mod error;
pub mod experiment;
pub mod fit;
pub mod report;
pub mod source;

pub use error::BenchError;
pub use experiment::{
    binomial_upper_quantile, run_pac_experiment, summarize, CellSummary, ExperimentSpec, PlannerKind, TrialRecord,
};
pub use fit::{fit_complexity_exponent, ExponentFit};
pub use report::{emit_report, parse_report, read_report, render_report, ReportFormat};
pub use source::{parse_profile, MdpSource, Model, ModelSpec, RandomSource};
