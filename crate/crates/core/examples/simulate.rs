//! Drives the simulator directly with a hand-written dispatcher and prints the first
//! events of the trace.
//!
//! cargo run --example simulate

use fogforge::config::ExperimentConfig;
use fogforge::sim::Observation;
use fogforge::workload::Job;

fn main() -> fogforge::Result<()> {
    let env = ExperimentConfig::desk().environment()?;
    let mut sim = env.simulator(150.0, 42)?;
    sim.enable_trace();
    let fog = env.fog_nodes().to_vec();
    // shortest queue, ties to the first Fog node
    let mut shortest = |_: &Job, obs: &Observation<'_>| {
        let (i, _) = obs
            .queue_lengths
            .iter()
            .enumerate()
            .min_by_key(|(_, q)| **q)
            .unwrap();
        fog[i]
    };
    let window = sim.run_until(20_000.0, &mut shortest)?;
    let tail = sim.drain(&mut shortest)?;
    println!("time\tseq\tevent\tjob\tnode");
    for rec in sim.trace().iter().take(12) {
        println!("{rec}");
    }
    println!(
        "created {}, completed {} (+{} while draining), mean delay {:.2}, counters {:?}",
        window.jobs_created,
        window.jobs_completed,
        tail.jobs_completed,
        window.mean_exec_delay().unwrap_or(f64::NAN),
        sim.counters()
    );
    for (i, &node) in env.fog_nodes().iter().enumerate() {
        println!(
            "  fog {node}: time-averaged queue {:.3}",
            window.time_avg_queue(i)
        );
    }
    Ok(())
}
