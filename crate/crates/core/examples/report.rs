//! Runs a short lifelong experiment through the command layer, then summarizes its
//! results file into box statistics and SVG box plots.
//!
//! cargo run --release --example report [-- <out-dir>]

use std::path::PathBuf;

use fogforge::cli::{cmd_lifelong, cmd_report};
use fogforge::config::ExperimentConfig;
use fogforge::harness::PhaseSchedule;
use fogforge::transfer::TransferMode;

fn main() -> fogforge::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("fogforge-report-example"));
    let mut config = ExperimentConfig::desk();
    config.trials = 3;
    config.schedule = PhaseSchedule::uniform(&[200.0, 100.0], 1_000, 5_000.0, 10_000.0)?;
    config.out_dir = out.join("run");
    let run = cmd_lifelong(&config, &[TransferMode::Scratch, TransferMode::Full])?;
    let summary = cmd_report(
        std::slice::from_ref(&run.results),
        &out.join("report"),
        true,
    )?;
    for r in &summary {
        println!(
            "{:<8} phase {} {:<15} median {:.2} outliers [{}]",
            r.mode, r.phase, r.metric, r.median, r.outliers
        );
    }
    println!("written under {}", out.display());
    Ok(())
}
