//! Load-distribution state (PARL) against raw queue-length state (PLRL), same training
//! budget and workloads.
//!
//! cargo run --release --example representations [-- <trials>]

use fogforge::config::ExperimentConfig;
use fogforge::harness::{run_first_phase, trial_seeds, PhaseSchedule};
use fogforge::repr::Representation;

fn main() -> fogforge::Result<()> {
    let trials = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(3);
    let config = ExperimentConfig::desk();
    let schedule = PhaseSchedule::new(vec![config.schedule.phases[0]])?;
    let base = config.environment()?;
    for repr in [Representation::Parl, Representation::Plrl] {
        let env = base.with_representation(repr);
        let mut delays = Vec::new();
        for seed in trial_seeds(config.seed, trials) {
            delays.push(
                run_first_phase(&env, &schedule, &config.agent, seed)?
                    .record
                    .mean_exec_delay,
            );
        }
        println!(
            "{repr:?}: state length {}, delays {:?}",
            env.state_len(),
            delays
                .iter()
                .map(|d| (d * 100.0).round() / 100.0)
                .collect::<Vec<_>>()
        );
    }
    Ok(())
}
