//! Saves a training checkpoint and an inference export, reloads both and shows that
//! they reproduce the agent.
//!
//! cargo run --release --example checkpoints

use fogforge::agent::{Checkpoint, DdqlAgent, InferencePolicy};
use fogforge::config::ExperimentConfig;
use fogforge::harness::{run_inference, run_training_phase};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = ExperimentConfig::desk();
    let env = config.environment()?;
    let mut phase = config.schedule.phases[0];
    phase.train_steps = 1_000;
    let mut agent = DdqlAgent::new(config.agent.clone(), env.state_len(), env.actions(), 3)?;
    agent.begin_phase(phase.train_steps);
    let mut observer = env.new_observer();
    let report = run_training_phase(&env, &mut agent, &mut observer, &phase, 11)?;
    println!(
        "trained {} steps over {} decisions",
        report.losses.len(),
        report.decisions
    );

    let dir = std::env::temp_dir().join("fogforge-checkpoints-example");
    std::fs::create_dir_all(&dir)?;
    let (ckpt_path, policy_path) = (dir.join("agent.json"), dir.join("policy.json"));
    agent.checkpoint().save(&ckpt_path)?;
    agent.export_inference().save(&policy_path)?;
    let size = |p: &std::path::Path| std::fs::metadata(p).map(|m| m.len()).unwrap_or(0);
    println!(
        "checkpoint {} bytes, inference export {} bytes",
        size(&ckpt_path),
        size(&policy_path)
    );

    let restored = DdqlAgent::from_checkpoint(Checkpoint::load(&ckpt_path)?)?;
    println!(
        "restored: same weights {}, same buffer length {}, training steps {}",
        restored.q_net() == agent.q_net(),
        restored.buffer().len() == agent.buffer().len(),
        restored.training_steps()
    );
    let policy = InferencePolicy::load(&policy_path)?;
    let a = run_inference(
        &env,
        &policy,
        &observer,
        phase.beta,
        phase.inference_len,
        12,
    )?;
    let b = run_inference(
        &env,
        &agent.export_inference(),
        &observer,
        phase.beta,
        phase.inference_len,
        12,
    )?;
    println!(
        "reloaded policy delay {:.3}, in-memory policy delay {:.3}",
        a.mean_exec_delay, b.mean_exec_delay
    );
    Ok(())
}
