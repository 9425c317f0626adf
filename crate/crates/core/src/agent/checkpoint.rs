//! On-disk agent state.
//!
//! Both artifacts are JSON objects with a top-level `format_version`. Floats are written
//! in shortest round-trip form, so a load reproduces every parameter, moment and RNG
//! state bit for bit. Files with another `format_version` are refused; any layout change
//! bumps the version.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{argmax, AgentConfig, EpsilonSchedule, ReplayBuffer};
use crate::error::{Error, Result};
use crate::nn::{AdamState, Mlp};
use crate::rng::SimRng;

pub const CHECKPOINT_FORMAT_VERSION: u32 = 1;

/// Complete training state of a [`super::DdqlAgent`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub format_version: u32,
    pub config: AgentConfig,
    pub decision_steps: u64,
    pub training_steps: u64,
    pub last_sync: u64,
    pub epsilon: EpsilonSchedule,
    pub q_net: Mlp,
    pub target_net: Mlp,
    pub optimizer: AdamState,
    pub buffer: ReplayBuffer,
    pub explore_rng: SimRng,
    pub sample_rng: SimRng,
}

impl Checkpoint {
    pub fn validate(&self) -> Result<()> {
        if self.format_version != CHECKPOINT_FORMAT_VERSION {
            return Err(Error::VersionMismatch {
                found: self.format_version,
                expected: CHECKPOINT_FORMAT_VERSION,
            });
        }
        if self.q_net.dims() != self.target_net.dims() {
            return Err(Error::invalid("online and target networks differ in shape"));
        }
        self.config.validate()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let c: Self = read_json(path)?;
        c.validate()?;
        Ok(c)
    }
}

/// Greedy policy over a frozen copy of the online network. Carries no replay buffer,
/// optimizer or exploration state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InferencePolicy {
    pub format_version: u32,
    net: Mlp,
}

impl InferencePolicy {
    pub fn new(net: Mlp) -> Self {
        Self {
            format_version: CHECKPOINT_FORMAT_VERSION,
            net,
        }
    }

    pub fn net(&self) -> &Mlp {
        &self.net
    }

    pub fn state_len(&self) -> usize {
        self.net.input_dim()
    }

    pub fn actions(&self) -> usize {
        self.net.output_dim()
    }

    pub fn q_values(&self, state: &[f64]) -> Result<Vec<f64>> {
        self.net.forward(state)
    }

    pub fn act(&self, state: &[f64]) -> Result<usize> {
        Ok(argmax(&self.q_values(state)?))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        read_json(path)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer(&mut w, value)?;
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    #[derive(Deserialize)]
    struct Probe {
        format_version: u32,
    }
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let corrupt = |e: serde_json::Error| Error::CorruptFile {
        path: path.to_path_buf(),
        reason: e.to_string(),
    };
    let probe: Probe = serde_json::from_str(&text).map_err(corrupt)?;
    if probe.format_version != CHECKPOINT_FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            found: probe.format_version,
            expected: CHECKPOINT_FORMAT_VERSION,
        });
    }
    serde_json::from_str(&text).map_err(corrupt)
}

/// Serialized size in bytes, as written by `save`.
pub fn encoded_len<T: Serialize>(value: &T) -> Result<usize> {
    Ok(serde_json::to_vec(value)?.len())
}

impl Checkpoint {
    pub fn encoded_len(&self) -> Result<usize> {
        encoded_len(self)
    }
}

impl InferencePolicy {
    pub fn encoded_len(&self) -> Result<usize> {
        encoded_len(self)
    }
}
