//! What an agent keeps when the job generation rate changes.
//!
//! | mode      | weights | buffer | optimizer | trains |
//! |-----------|---------|--------|-----------|--------|
//! | `scratch` | no      | no     | no        | yes    |
//! | `first`   | yes     | no     | no        | no     |
//! | `buffer`  | no      | yes    | no        | yes    |
//! | `weights` | yes     | no     | no        | yes    |
//! | `full`    | yes     | yes    | yes       | yes    |
//!
//! Copied weights always bring the target network along. Random streams are re-derived
//! from the fresh seed in every mode.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::agent::{AgentConfig, Checkpoint, DdqlAgent, EpsilonSchedule};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransferMode {
    #[serde(rename = "scratch")]
    Scratch,
    #[serde(rename = "first")]
    FirstOnly,
    #[serde(rename = "buffer")]
    BufferOnly,
    #[serde(rename = "weights")]
    WeightsOnly,
    #[serde(rename = "full")]
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TransferPlan {
    pub copy_weights: bool,
    pub copy_buffer: bool,
    pub copy_optimizer: bool,
    pub train_enabled: bool,
}

impl TransferMode {
    pub const ALL: [TransferMode; 5] = [
        TransferMode::Scratch,
        TransferMode::FirstOnly,
        TransferMode::BufferOnly,
        TransferMode::WeightsOnly,
        TransferMode::Full,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TransferMode::Scratch => "scratch",
            TransferMode::FirstOnly => "first",
            TransferMode::BufferOnly => "buffer",
            TransferMode::WeightsOnly => "weights",
            TransferMode::Full => "full",
        }
    }

    pub fn plan(self) -> TransferPlan {
        let (copy_weights, copy_buffer, copy_optimizer, train_enabled) = match self {
            TransferMode::Scratch => (false, false, false, true),
            TransferMode::FirstOnly => (true, false, false, false),
            TransferMode::BufferOnly => (false, true, false, true),
            TransferMode::WeightsOnly => (true, false, false, true),
            TransferMode::Full => (true, true, true, true),
        };
        TransferPlan {
            copy_weights,
            copy_buffer,
            copy_optimizer,
            train_enabled,
        }
    }

    /// Whether the load-distribution view carries over with the agent.
    pub fn keeps_distribution(self) -> bool {
        self.plan().copy_weights
    }
}

impl fmt::Display for TransferMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TransferMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TransferMode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown transfer mode '{s}' (expected scratch|first|buffer|weights|full)"
                ))
            })
    }
}

/// Builds the agent for the next phase from the previous phase's final state.
///
/// `prev` is only optional for `Scratch`. It is never modified. The returned flag says
/// whether the phase trains at all.
pub fn initialize_phase_agent(
    mode: TransferMode,
    prev: Option<&Checkpoint>,
    config: &AgentConfig,
    state_len: usize,
    actions: usize,
    fresh_seed: u64,
) -> Result<(DdqlAgent, bool)> {
    let plan = mode.plan();
    if mode == TransferMode::Scratch {
        return Ok((
            DdqlAgent::new(config.clone(), state_len, actions, fresh_seed)?,
            true,
        ));
    }
    let prev = prev.ok_or_else(|| {
        Error::MissingCheckpoint(format!(
            "transfer mode '{mode}' needs the previous phase's agent"
        ))
    })?;
    prev.validate()?;
    if prev.q_net.input_dim() != state_len || prev.q_net.output_dim() != actions {
        return Err(Error::DimensionMismatch {
            expected: state_len * actions,
            actual: prev.q_net.input_dim() * prev.q_net.output_dim(),
        });
    }

    let mut agent = if plan.copy_weights {
        DdqlAgent::with_network(config.clone(), prev.q_net.clone(), fresh_seed)?
    } else {
        DdqlAgent::new(config.clone(), state_len, actions, fresh_seed)?
    };
    if plan.copy_weights {
        agent.set_networks(prev.q_net.clone(), prev.target_net.clone());
    }
    if plan.copy_buffer {
        agent.set_buffer(prev.buffer.clone());
    }
    if plan.copy_optimizer {
        agent.set_optimizer(prev.optimizer.clone());
        agent.set_counters(prev.decision_steps, prev.training_steps, prev.last_sync);
    }
    if plan.copy_weights && plan.train_enabled && config.epsilon.resume_on_transfer {
        let eps = prev.epsilon.value(prev.training_steps);
        agent.set_epsilon_schedule(EpsilonSchedule::Constant(eps));
    }
    if !plan.train_enabled {
        agent.set_epsilon_schedule(EpsilonSchedule::Constant(0.0));
    }
    Ok((agent, plan.train_enabled))
}
