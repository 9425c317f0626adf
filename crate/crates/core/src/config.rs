//! Experiment configuration.
//!
//! A config is a JSON object; every key is optional and falls back to the large-scale
//! default ([`ExperimentConfig::default`]). Unknown keys are rejected, and errors name
//! the offending key path (for example `agent.epsilon.start`).

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agent::AgentConfig;
use crate::error::{Error, Result};
use crate::harness::{Environment, PhaseSchedule};
use crate::repr::Representation;
use crate::topology::{build_topology, FogTopology, ResourceRanges, TopologyParams};
use crate::transfer::TransferMode;
use crate::workload::{default_categories, validate_categories, validate_mix, WorkloadCategory};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub topology: TopologyParams,
    pub categories: Vec<WorkloadCategory>,
    /// Probability of each category, in category order.
    pub category_mix: Vec<f64>,
    pub representation: Representation,
    pub agent: AgentConfig,
    pub schedule: PhaseSchedule,
    /// Modes run by `lifelong --mode all`.
    pub modes: Vec<TransferMode>,
    pub trials: usize,
    /// Trial k uses seed `seed + k`.
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Also write full training checkpoints (replay buffer included) per phase.
    pub save_checkpoints: bool,
    /// Training steps averaged per row of the loss file.
    pub loss_window: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::large()
    }
}

impl ExperimentConfig {
    /// Large-scale protocol on a 30-node tree-like topology.
    pub fn large() -> Self {
        Self {
            topology: TopologyParams {
                nodes: 30,
                attachment: 1,
                ..TopologyParams::default()
            },
            categories: default_categories(),
            category_mix: vec![1.0 / 3.0; 3],
            representation: Representation::Parl,
            agent: AgentConfig::default(),
            schedule: PhaseSchedule::large(),
            modes: TransferMode::ALL.to_vec(),
            trials: 11,
            seed: 1,
            out_dir: PathBuf::from("out"),
            save_checkpoints: false,
            loss_window: 100,
        }
    }

    /// Small profile: six nodes (two clusters, three Fog nodes), 5 000 training steps.
    pub fn desk() -> Self {
        Self {
            topology: TopologyParams {
                seed: 7,
                nodes: 6,
                attachment: 1,
                clusters: Some(2),
                fog: Some(3),
                max_attempts: 1000,
                resources: ResourceRanges::default(),
            },
            schedule: PhaseSchedule::desk(),
            out_dir: PathBuf::from("out/desk"),
            ..Self::large()
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::parse(text, Path::new("<inline>"))
    }

    fn parse(text: &str, path: &Path) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: Self = serde_path_to_error::deserialize(de).map_err(|e| Error::Config {
            path: path.display().to_string(),
            reason: format!("at '{}': {}", e.path(), e.inner()),
        })?;
        config.validate().map_err(|e| Error::Config {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn validate(&self) -> Result<()> {
        validate_categories(&self.categories)?;
        validate_mix(&self.category_mix)?;
        if self.category_mix.len() != self.categories.len() {
            return Err(Error::invalid("category_mix needs one entry per category"));
        }
        self.topology.resources.validate()?;
        self.agent.validate()?;
        self.schedule.validate()?;
        if self.modes.is_empty() {
            return Err(Error::invalid("modes must not be empty"));
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        Ok(())
    }

    pub fn build_topology(&self) -> Result<FogTopology> {
        build_topology(&self.topology)
    }

    pub fn environment(&self) -> Result<Environment> {
        Environment::new(
            self.build_topology()?,
            self.categories.clone(),
            self.category_mix.clone(),
            self.representation,
        )
    }
}
