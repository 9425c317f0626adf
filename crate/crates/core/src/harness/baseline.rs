use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SimRng;
use crate::sim::{Dispatcher, Observation};
use crate::topology::NodeId;
use crate::workload::Job;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineKind {
    RoundRobin,
    Random,
    /// Reads true queue lengths; a privileged reference, not a privacy-aware policy.
    #[serde(rename = "greedy")]
    GreedyMinQueue,
}

impl BaselineKind {
    pub const ALL: [BaselineKind; 3] = [
        BaselineKind::RoundRobin,
        BaselineKind::Random,
        BaselineKind::GreedyMinQueue,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BaselineKind::RoundRobin => "roundrobin",
            BaselineKind::Random => "random",
            BaselineKind::GreedyMinQueue => "greedy",
        }
    }
}

impl fmt::Display for BaselineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BaselineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BaselineKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown baseline '{s}' (expected roundrobin|random|greedy)"
                ))
            })
    }
}

/// Cycles through Fog nodes in ascending id order.
#[derive(Debug, Clone)]
pub struct RoundRobin {
    fog: Vec<NodeId>,
    next: usize,
}

impl RoundRobin {
    pub fn new(fog: &[NodeId]) -> Self {
        let mut fog = fog.to_vec();
        fog.sort_unstable();
        Self { fog, next: 0 }
    }

    pub fn next_node(&mut self) -> NodeId {
        let n = self.fog[self.next];
        self.next = (self.next + 1) % self.fog.len();
        n
    }
}

impl Dispatcher for RoundRobin {
    fn dispatch(&mut self, _job: &Job, _obs: &Observation<'_>) -> NodeId {
        self.next_node()
    }
}

/// Uniform over Fog nodes.
#[derive(Debug, Clone)]
pub struct RandomPolicy {
    fog: Vec<NodeId>,
    rng: SimRng,
}

impl RandomPolicy {
    pub fn new(fog: &[NodeId], rng: SimRng) -> Self {
        Self {
            fog: fog.to_vec(),
            rng,
        }
    }

    pub fn next_node(&mut self) -> NodeId {
        self.fog[self.rng.random_range(0..self.fog.len())]
    }
}

impl Dispatcher for RandomPolicy {
    fn dispatch(&mut self, _job: &Job, _obs: &Observation<'_>) -> NodeId {
        self.next_node()
    }
}

/// Position of the shortest queue, lowest position on ties.
pub fn min_queue_index(queues: &[usize]) -> usize {
    let mut best = 0;
    for (i, q) in queues.iter().enumerate().skip(1) {
        if *q < queues[best] {
            best = i;
        }
    }
    best
}

/// Sends every job to the Fog node with the fewest jobs.
#[derive(Debug, Clone)]
pub struct GreedyMinQueue {
    /// In `fog_nodes()` order, matching `Observation::queue_lengths`.
    fog: Vec<NodeId>,
}

impl GreedyMinQueue {
    pub fn new(fog: &[NodeId]) -> Self {
        Self { fog: fog.to_vec() }
    }
}

impl Dispatcher for GreedyMinQueue {
    fn dispatch(&mut self, _job: &Job, obs: &Observation<'_>) -> NodeId {
        self.fog[min_queue_index(obs.queue_lengths)]
    }
}
