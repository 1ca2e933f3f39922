use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use trailblazer::baselines::SparseSamplingConfig;
use trailblazer::difficulty::{analyze, AnalyzeConfig};
use trailblazer_bench::experiment::PlannerKind;
use trailblazer_bench::fit::fit_complexity_exponent;
use trailblazer_bench::source::{parse_profile, MdpSource, Model, ModelSpec, RandomSource, DEFAULT_SPARSITY};
use trailblazer_bench::{emit_report, read_report, run_pac_experiment, summarize, BenchError, ExperimentSpec, ReportFormat};

#[derive(Parser)]
#[command(name = "trailblazer-bench", version, about = "Run and analyze trailblazer planning experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the planner once and print the run record as JSON.
    Plan {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        planner: PlannerArgs,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        cap: Option<u64>,
    },
    /// Run a seeded grid experiment and write a trial report.
    Bench {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        planner: PlannerArgs,
        /// Comma-separated accuracy grid.
        #[arg(long, value_delimiter = ',', required = true)]
        eps: Vec<f64>,
        /// Comma-separated confidence grid.
        #[arg(long, value_delimiter = ',', default_value = "0.1")]
        delta: Vec<f64>,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        /// Base seed; trial i uses seed + i.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        cap: Option<u64>,
        /// Report path; printed to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        /// Record wall time per trial (makes reports non-reproducible).
        #[arg(long)]
        wall_time: bool,
    },
    /// Print the difficulty report of a tabular MDP as JSON.
    Analyze {
        #[command(flatten)]
        source: SourceArgs,
        /// Near-optimal sets are counted at depths 2, 4, …, 2·h_cap.
        #[arg(long, default_value_t = 4)]
        h_cap: usize,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the exponent of mean oracle calls against 1/ε from a report.
    Fit {
        /// Report written by `bench`.
        report: PathBuf,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false, id = "model")]
struct SourceSelect {
    /// Tabular MDP file (JSON).
    #[arg(long, value_name = "FILE")]
    mdp: Option<PathBuf>,
    /// Random tabular MDP: generator seed, actions, successors per row, states.
    #[arg(long, value_name = "SEED,K,N,S")]
    random: Option<String>,
    /// Continuous toy: bounded_gap(MIN) or power_law(B,C).
    #[arg(long, value_name = "PROFILE")]
    toy: Option<String>,
}

#[derive(Args)]
struct SourceArgs {
    #[command(flatten)]
    select: SourceSelect,
    /// Discount of generated models (default 0.5).
    #[arg(long)]
    gamma: Option<f64>,
    /// Probability that a generated reward is zero.
    #[arg(long, default_value_t = DEFAULT_SPARSITY)]
    sparsity: f64,
    /// Seed of the toy's root state.
    #[arg(long, default_value_t = 0)]
    toy_seed: u64,
}

impl SourceArgs {
    fn spec(&self) -> Result<ModelSpec, BenchError> {
        let s = &self.select;
        let source = if let Some(p) = &s.mdp {
            MdpSource::File(p.clone())
        } else if let Some(r) = &s.random {
            MdpSource::Random(r.parse::<RandomSource>()?)
        } else if let Some(t) = &s.toy {
            MdpSource::Toy(parse_profile(t)?)
        } else {
            return Err(BenchError::Invalid("one of --mdp, --random, --toy is required".into()));
        };
        if !(0.0..=1.0).contains(&self.sparsity) {
            return Err(BenchError::Invalid(format!("sparsity {} outside [0, 1]", self.sparsity)));
        }
        Ok(ModelSpec {
            source,
            gamma: self.gamma,
            reward_sparsity: self.sparsity,
            toy_seed: self.toy_seed,
        })
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PlannerName {
    Trailblazer,
    Sparse,
    MonteCarlo,
}

#[derive(Args)]
struct PlannerArgs {
    #[arg(long, value_enum, default_value = "trailblazer")]
    planner: PlannerName,
    /// Sparse sampling: successors drawn per AVG node.
    #[arg(long, default_value_t = 8)]
    width: usize,
    /// Sparse sampling: look-ahead depth in MAX/AVG level pairs.
    #[arg(long, default_value_t = 4)]
    horizon: usize,
    /// Sparse sampling: expand repeated successors once.
    #[arg(long)]
    merge: bool,
}

impl PlannerArgs {
    fn kind(&self) -> PlannerKind {
        match self.planner {
            PlannerName::Trailblazer => PlannerKind::Trailblazer,
            PlannerName::MonteCarlo => PlannerKind::MonteCarlo,
            PlannerName::Sparse => PlannerKind::Sparse(SparseSamplingConfig {
                width: self.width,
                horizon: self.horizon,
                merge_duplicates: self.merge,
            }),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for ReportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => ReportFormat::Csv,
            FormatArg::Json => ReportFormat::Json,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let code = err.downcast_ref::<BenchError>().map_or(1, BenchError::exit_code);
            eprintln!("error: {err}");
            ExitCode::from(code as u8)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Plan {
            source,
            planner,
            eps,
            delta,
            seed,
            cap,
        } => {
            let mut spec = ExperimentSpec::new(source.spec()?, vec![eps], vec![delta], 1);
            spec.planner = planner.kind();
            spec.base_seed = seed;
            spec.call_cap = cap;
            spec.record_wall_time = true;
            let records = run_pac_experiment(&spec)?;
            println!("{}", serde_json::to_string_pretty(&records[0])?);
        }
        Command::Bench {
            source,
            planner,
            eps,
            delta,
            trials,
            seed,
            cap,
            out,
            format,
            wall_time,
        } => {
            let mut spec = ExperimentSpec::new(source.spec()?, eps, delta, trials);
            spec.planner = planner.kind();
            spec.base_seed = seed;
            spec.call_cap = cap;
            spec.record_wall_time = wall_time;
            let records = run_pac_experiment(&spec)?;
            for cell in summarize(&records) {
                eprintln!(
                    "eps {} delta {}: failures {} (bound {}), mean calls {:.1}, max depth {}",
                    cell.epsilon,
                    cell.delta,
                    cell.failures.map_or("n/a".to_string(), |f| f.to_string()),
                    cell.failure_bound,
                    cell.mean_calls,
                    cell.max_depth
                );
            }
            match out {
                Some(path) => {
                    let format = format.map_or_else(|| ReportFormat::from_path(&path), Into::into);
                    emit_report(&records, format, &path)?;
                }
                None => {
                    let format = format.map_or(ReportFormat::Csv, Into::into);
                    print!("{}", trailblazer_bench::render_report(&records, format)?);
                }
            }
        }
        Command::Analyze {
            source,
            h_cap,
            samples,
            seed,
            out,
        } => {
            let mdp = match source.spec()?.build()? {
                Model::Tabular(mdp) => mdp,
                Model::Toy(_) => {
                    return Err(BenchError::Invalid("difficulty analysis needs a tabular model".into()).into())
                }
            };
            let config = AnalyzeConfig {
                h_cap,
                d_samples: samples,
                seed,
                ..AnalyzeConfig::default()
            };
            let report = analyze(&mdp, &config).map_err(BenchError::from)?;
            write_or_print(&serde_json::to_string_pretty(&report)?, out.as_deref())?;
        }
        Command::Fit { report, format } => {
            let records = read_report(&report, format.map(Into::into))?;
            let fit = fit_complexity_exponent(&records)?;
            println!("{}", serde_json::to_string_pretty(&fit)?);
        }
    }
    Ok(())
}

fn write_or_print(text: &str, out: Option<&Path>) -> anyhow::Result<()> {
    match out {
        Some(path) => std::fs::write(path, format!("{text}\n")).map_err(|source| {
            BenchError::Io {
                path: path.to_path_buf(),
                source,
            }
            .into()
        }),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}
