//! Command surface of the `fogforge` binary.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 a self-check failed,
//! 3 runtime error. Logging goes to stderr at the level named by `FOGFORGE_LOG`
//! (`error`, `warn`, `info` or `debug`; default `warn`).

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::harness::{
    aggregate_rows, read_results_csv, run_baseline_trials, run_matrix, trial_seeds,
    write_aggregate_csv, write_boxplot_svg, write_loss_csv, write_results_csv, AggregateRow,
    BaselineKind, PhaseRecord,
};
use crate::transfer::TransferMode;
use crate::validate::{gradient_checks, mm1_check};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "fogforge",
    version,
    about = "Fog load-balancing simulator and lifelong DDQN experiments"
)]
pub struct Cli {
    /// Experiment config (JSON). Missing keys take large-scale defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Base seed; trial k uses seed + k.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Number of trials (config default 11).
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for trials (default: logical cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the configured topology and write it as JSON.
    Topology,
    /// Run the queueing and gradient self-checks.
    Validate,
    /// Run the lifelong train/infer protocol for one or all transfer modes.
    Lifelong {
        /// scratch | first | buffer | weights | full | all
        #[arg(long, default_value = "all")]
        mode: String,
    },
    /// Evaluate a fixed dispatching policy on the same workloads.
    Baseline {
        /// roundrobin | random | greedy
        #[arg(long, default_value = "random")]
        policy: String,
    },
    /// Summarize results CSVs into box statistics.
    Report {
        /// Results CSV files.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Also draw SVG box plots.
        #[arg(long)]
        svg: bool,
    },
}

/// Outcome of one self-check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub name: String,
    pub value: f64,
    pub limit: f64,
}

impl CheckLine {
    pub fn passed(&self) -> bool {
        self.value <= self.limit
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub checks: Vec<CheckLine>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckLine::passed)
    }
}

/// Writes `topology.json` into `out` and returns its path.
pub fn cmd_topology(config: &ExperimentConfig, out: &Path) -> Result<PathBuf> {
    let topo = config.build_topology()?;
    create_dir(out)?;
    let path = out.join("topology.json");
    fs::write(&path, topo.to_json()? + "\n").map_err(|e| Error::io(&path, e))?;
    log::info!(
        "{} nodes, {} Fog, {} clusters, cloud {}",
        topo.nodes().len(),
        topo.fog_nodes().len(),
        topo.clusters().len(),
        topo.cloud()
    );
    Ok(path)
}

/// M/M/1 at ρ = 0.3, 0.5, 0.7 over `horizon` time units (relative error ≤ 5%) and
/// finite-difference gradients of 10 networks (relative error ≤ 1e-4).
pub fn cmd_validate(horizon: f64, seed: u64) -> Result<ValidationReport> {
    let mut checks = Vec::new();
    for rho in [0.3, 0.5, 0.7] {
        let c = mm1_check(rho, horizon, seed)?;
        checks.push(CheckLine {
            name: format!("mm1 rho={rho} number-in-system rel. error"),
            value: c.l_error(),
            limit: 0.05,
        });
        checks.push(CheckLine {
            name: format!("mm1 rho={rho} sojourn rel. error"),
            value: c.w_error(),
            limit: 0.05,
        });
    }
    let worst = gradient_checks(10, seed)?.into_iter().fold(0.0, f64::max);
    checks.push(CheckLine {
        name: "backprop vs finite differences, max rel. error".into(),
        value: worst,
        limit: 1e-4,
    });
    Ok(ValidationReport { checks })
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub fn parse_modes(spec: &str, config: &ExperimentConfig) -> Result<Vec<TransferMode>> {
    if spec == "all" {
        Ok(config.modes.clone())
    } else {
        Ok(vec![spec.parse()?])
    }
}

/// Files written by [`cmd_lifelong`].
#[derive(Debug, Clone)]
pub struct LifelongArtifacts {
    pub results: PathBuf,
    pub aggregate: PathBuf,
    pub losses: PathBuf,
    pub records: Vec<PhaseRecord>,
}

/// Runs every requested mode over `config.trials` seeds and writes, under
/// `config.out_dir`: the effective config, `results.csv`, `aggregate.csv`, `losses.csv`
/// and one inference policy per (mode, seed, phase).
pub fn cmd_lifelong(
    config: &ExperimentConfig,
    modes: &[TransferMode],
) -> Result<LifelongArtifacts> {
    let out = &config.out_dir;
    create_dir(out)?;
    config.save(&out.join("config.json"))?;
    let env = config.environment()?;
    let seeds = trial_seeds(config.seed, config.trials);
    let runs = run_matrix(&env, &config.schedule, modes, &config.agent, &seeds)?;

    let policies = out.join("policies");
    create_dir(&policies)?;
    let checkpoints = out.join("checkpoints");
    if config.save_checkpoints {
        create_dir(&checkpoints)?;
    }
    let mut records = Vec::new();
    for (mode, seed, phases) in &runs {
        for p in phases {
            let stem = format!("{mode}-seed{seed}-phase{}", p.record.phase);
            p.policy.save(&policies.join(format!("{stem}.json")))?;
            if config.save_checkpoints {
                p.checkpoint
                    .save(&checkpoints.join(format!("{stem}.json")))?;
            }
            records.push(p.record.clone());
        }
    }
    let results = out.join("results.csv");
    write_results_csv(&results, &records)?;
    let losses = out.join("losses.csv");
    write_loss_csv(&losses, &records, config.loss_window)?;
    let aggregate = out.join("aggregate.csv");
    let rows: Vec<_> = records.iter().map(PhaseRecord::row).collect();
    write_aggregate_csv(&aggregate, &aggregate_rows(&rows)?)?;
    Ok(LifelongArtifacts {
        results,
        aggregate,
        losses,
        records,
    })
}

/// Evaluates one baseline on each phase's evaluation workload; writes
/// `baseline-<policy>.csv` under `config.out_dir`.
pub fn cmd_baseline(config: &ExperimentConfig, kind: BaselineKind) -> Result<PathBuf> {
    create_dir(&config.out_dir)?;
    let env = config.environment()?;
    let seeds = trial_seeds(config.seed, config.trials);
    let records = run_baseline_trials(&env, &config.schedule, kind, &seeds)?;
    let path = config.out_dir.join(format!("baseline-{kind}.csv"));
    write_results_csv(&path, &records)?;
    Ok(path)
}

/// Aggregates results files into `<out>/aggregate.csv`, plus one SVG per metric when
/// `svg` is set.
pub fn cmd_report(inputs: &[PathBuf], out: &Path, svg: bool) -> Result<Vec<AggregateRow>> {
    let mut rows = Vec::new();
    for path in inputs {
        rows.extend(read_results_csv(path)?);
    }
    let agg = aggregate_rows(&rows)?;
    create_dir(out)?;
    write_aggregate_csv(&out.join("aggregate.csv"), &agg)?;
    if svg {
        for metric in ["episode_return", "mean_exec_delay"] {
            if agg.iter().any(|r| r.metric == metric) {
                write_boxplot_svg(&out.join(format!("{metric}.svg")), &agg, metric)?;
            }
        }
    }
    Ok(agg)
}

enum Failure {
    Usage(Error),
    Runtime(Error),
}

fn effective_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(trials) = cli.trials {
        config.trials = trials;
    }
    if let Some(out) = &cli.out {
        config.out_dir = out.clone();
    }
    config.validate()?;
    Ok(config)
}

fn execute(cli: &Cli) -> std::result::Result<i32, Failure> {
    let config = effective_config(cli).map_err(Failure::Usage)?;
    match &cli.command {
        Command::Topology => {
            let path = cmd_topology(&config, &config.out_dir).map_err(Failure::Runtime)?;
            println!("{}", path.display());
        }
        Command::Validate => {
            let report = cmd_validate(1e6, config.seed).map_err(Failure::Runtime)?;
            for c in &report.checks {
                let verdict = if c.passed() { "PASS" } else { "FAIL" };
                println!(
                    "{verdict}  {}: {:.3e} (limit {:.0e})",
                    c.name, c.value, c.limit
                );
            }
            if !report.passed() {
                return Ok(EXIT_VALIDATION);
            }
        }
        Command::Lifelong { mode } => {
            let modes = parse_modes(mode, &config).map_err(Failure::Usage)?;
            let a = cmd_lifelong(&config, &modes).map_err(Failure::Runtime)?;
            println!("{}", a.results.display());
            println!("{}", a.aggregate.display());
        }
        Command::Baseline { policy } => {
            let kind: BaselineKind = policy.parse().map_err(Failure::Usage)?;
            let path = cmd_baseline(&config, kind).map_err(Failure::Runtime)?;
            println!("{}", path.display());
        }
        Command::Report { inputs, svg } => {
            let rows = cmd_report(inputs, &config.out_dir, *svg).map_err(Failure::Runtime)?;
            println!("mode,phase,metric,median,hinge_lo,hinge_hi");
            for r in rows {
                println!(
                    "{},{},{},{},{},{}",
                    r.mode, r.phase, r.metric, r.median, r.hinge_lo, r.hinge_hi
                );
            }
        }
    }
    Ok(EXIT_OK)
}

fn init_logging() {
    let env = env_logger::Env::default().filter_or("FOGFORGE_LOG", "warn");
    let _ = env_logger::Builder::from_env(env).try_init();
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    init_logging();
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs.unwrap_or(0))
        .build();
    let pool = match pool {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_RUNTIME;
        }
    };
    match pool.install(|| execute(&cli)) {
        Ok(code) => code,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            EXIT_RUNTIME
        }
    }
}
