//! Lifelong protocol over a β schedule for every transfer mode; prints the box
//! statistics of return and delay per (mode, phase).
//!
//! cargo run --release --example lifelong [-- <trials>]

use fogforge::config::ExperimentConfig;
use fogforge::harness::{aggregate_rows, run_matrix, trial_seeds, PhaseRecord};
use fogforge::transfer::TransferMode;

fn main() -> fogforge::Result<()> {
    let trials = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(3);
    let config = ExperimentConfig::desk();
    let env = config.environment()?;
    let seeds = trial_seeds(config.seed, trials);
    let runs = run_matrix(
        &env,
        &config.schedule,
        &TransferMode::ALL,
        &config.agent,
        &seeds,
    )?;
    let rows: Vec<_> = runs
        .iter()
        .flat_map(|(_, _, phases)| phases.iter().map(|p| PhaseRecord::row(&p.record)))
        .collect();
    println!("mode     phase beta  metric           median   hinges");
    for r in aggregate_rows(&rows)? {
        println!(
            "{:<8} {:>5} {:>4}  {:<15} {:>8.2}  [{:.2}, {:.2}]",
            r.mode, r.phase, r.beta, r.metric, r.median, r.hinge_lo, r.hinge_hi
        );
    }
    Ok(())
}
