//! Trains one DDQN dispatcher on the desk topology and compares it with the three
//! fixed policies on the same evaluation workload.
//!
//! cargo run --release --example train_agent [-- <seed> <beta>]

use fogforge::config::ExperimentConfig;
use fogforge::harness::{run_baseline, run_first_phase, BaselineKind, PhaseSchedule};

fn main() -> fogforge::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed = args.next().and_then(|a| a.parse().ok()).unwrap_or(1);
    let config = ExperimentConfig::desk();
    let mut phase = config.schedule.phases[0];
    if let Some(beta) = args.next().and_then(|a| a.parse().ok()) {
        phase.beta = beta;
    }
    let schedule = PhaseSchedule::new(vec![phase])?;
    let env = config.environment()?;

    let trained = run_first_phase(&env, &schedule, &config.agent, seed)?;
    let losses = &trained.record.losses;
    let tenth = (losses.len() / 10).max(1);
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    println!(
        "beta {}: {} training steps, loss {:.4} (first tenth) -> {:.4} (last tenth)",
        phase.beta,
        losses.len(),
        mean(&losses[..tenth]),
        mean(&losses[losses.len() - tenth..])
    );
    println!(
        "{:<11} delay {:>8.2}  return {:>5}  jobs {}",
        "ddqn",
        trained.record.mean_exec_delay,
        trained.record.episode_return,
        trained.record.jobs_completed
    );
    for kind in BaselineKind::ALL {
        let r = &run_baseline(&env, &schedule, kind, seed)?[0];
        println!(
            "{:<11} delay {:>8.2}  return {:>5}  jobs {}",
            kind.name(),
            r.mean_exec_delay,
            r.episode_return,
            r.jobs_completed
        );
    }
    Ok(())
}
