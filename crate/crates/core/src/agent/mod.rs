//! Double deep Q-learning agent.
//!
//! The online network picks actions; a periodically synced copy supplies bootstrap
//! values. By default the online network selects the next action and the target network
//! evaluates it ([`TargetDirection::OnlineSelects`]); the opposite assignment is available
//! for comparison.

mod checkpoint;
mod replay;

pub use checkpoint::{Checkpoint, InferencePolicy, CHECKPOINT_FORMAT_VERSION};
pub use replay::{ReplayBuffer, Transition};

use ndarray::{Array2, ArrayView2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{AdamConfig, AdamState, Mlp};
use crate::rng::{self, SimRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetDirection {
    /// `y = r + γ Q'(s', argmax Q(s', ·))`.
    #[default]
    OnlineSelects,
    /// `y = r + γ Q(s', argmax Q'(s', ·))`.
    TargetSelects,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    #[default]
    Mse,
    /// Quadratic within `huber_delta` of the target, linear beyond.
    Huber,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EpsilonConfig {
    pub start: f64,
    pub end: f64,
    /// Fraction of a phase's training budget spent decaying from `start` to `end`.
    pub decay_fraction: f64,
    /// Transferred agents keep their final exploration rate instead of restarting.
    pub resume_on_transfer: bool,
}

impl Default for EpsilonConfig {
    fn default() -> Self {
        Self {
            start: 1.0,
            end: 0.05,
            decay_fraction: 0.6,
            resume_on_transfer: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AgentConfig {
    pub hidden: Vec<usize>,
    pub gamma: f64,
    pub adam: AdamConfig,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    /// Training steps between target-network syncs.
    pub target_sync_period: u64,
    /// Decision steps per training step.
    pub train_every: u64,
    pub epsilon: EpsilonConfig,
    pub target_direction: TargetDirection,
    pub loss: LossKind,
    pub huber_delta: f64,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            hidden: vec![64, 64],
            gamma: 0.99,
            adam: AdamConfig::default(),
            batch_size: 64,
            buffer_capacity: 10_000,
            target_sync_period: 200,
            train_every: 4,
            epsilon: EpsilonConfig::default(),
            target_direction: TargetDirection::OnlineSelects,
            loss: LossKind::Mse,
            huber_delta: 1.0,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::invalid(format!("agent: {m}")));
        if self.hidden.contains(&0) {
            return bad("hidden layer sizes must be positive");
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad("gamma must lie in [0, 1]");
        }
        if !(self.adam.learning_rate > 0.0) {
            return bad("learning rate must be positive");
        }
        if self.batch_size == 0 || self.buffer_capacity < self.batch_size {
            return bad("need 0 < batch_size <= buffer_capacity");
        }
        if self.target_sync_period == 0 || self.train_every == 0 {
            return bad("target_sync_period and train_every must be positive");
        }
        let e = &self.epsilon;
        if !(0.0..=1.0).contains(&e.start)
            || !(0.0..=1.0).contains(&e.end)
            || !(0.0..=1.0).contains(&e.decay_fraction)
        {
            return bad("epsilon values must lie in [0, 1]");
        }
        if !(self.huber_delta > 0.0) {
            return bad("huber_delta must be positive");
        }
        Ok(())
    }

    fn layer_dims(&self, state_len: usize, actions: usize) -> Vec<usize> {
        std::iter::once(state_len)
            .chain(self.hidden.iter().copied())
            .chain(std::iter::once(actions))
            .collect()
    }
}

/// Exploration rate as a function of the training-step counter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EpsilonSchedule {
    Linear {
        start: f64,
        end: f64,
        /// Training counter at which the decay begins.
        origin: u64,
        /// Training steps from `start` to `end`.
        span: u64,
    },
    Constant(f64),
}

impl EpsilonSchedule {
    pub fn value(&self, training_steps: u64) -> f64 {
        match *self {
            EpsilonSchedule::Constant(v) => v,
            EpsilonSchedule::Linear {
                start,
                end,
                origin,
                span,
            } => {
                let done = training_steps.saturating_sub(origin);
                if span == 0 || done >= span {
                    if span == 0 && done == 0 {
                        start
                    } else {
                        end
                    }
                } else {
                    start + (end - start) * done as f64 / span as f64
                }
            }
        }
    }
}

/// Index of the largest value, lowest index on ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

fn row_argmax(row: ndarray::ArrayView1<'_, f64>) -> usize {
    argmax(row.as_slice().expect("standard layout"))
}

/// Double-Q bootstrap targets `y_i = r_i + γ · Q_eval(s'_i, argmax Q_select(s'_i, ·))`.
pub fn td_targets(
    rewards: &[f64],
    next_states: ArrayView2<'_, f64>,
    q_net: &Mlp,
    target_net: &Mlp,
    gamma: f64,
    direction: TargetDirection,
) -> Result<Vec<f64>> {
    if rewards.is_empty() {
        return Err(Error::invalid("empty batch"));
    }
    if rewards.len() != next_states.nrows() {
        return Err(Error::DimensionMismatch {
            expected: rewards.len(),
            actual: next_states.nrows(),
        });
    }
    if gamma == 0.0 {
        return Ok(rewards.to_vec());
    }
    let online = q_net.forward_batch(next_states)?;
    let target = target_net.forward_batch(next_states)?;
    let (select, eval) = match direction {
        TargetDirection::OnlineSelects => (&online, &target),
        TargetDirection::TargetSelects => (&target, &online),
    };
    Ok(rewards
        .iter()
        .enumerate()
        .map(|(i, r)| r + gamma * eval[[i, row_argmax(select.row(i))]])
        .collect())
}

fn stack(rows: &[&[f64]]) -> Array2<f64> {
    let cols = rows.first().map_or(0, |r| r.len());
    let mut out = Array2::zeros((rows.len(), cols));
    for (mut dst, src) in out.rows_mut().into_iter().zip(rows) {
        dst.assign(&ndarray::ArrayView1::from(*src));
    }
    out
}

#[derive(Debug, Clone)]
pub struct DdqlAgent {
    config: AgentConfig,
    q_net: Mlp,
    target_net: Mlp,
    buffer: ReplayBuffer,
    opt: AdamState,
    epsilon: EpsilonSchedule,
    decision_steps: u64,
    training_steps: u64,
    last_sync: u64,
    explore_rng: SimRng,
    sample_rng: SimRng,
}

impl DdqlAgent {
    /// Fresh agent: Glorot weights from the `agent-init` stream of `seed`, empty buffer,
    /// zero optimizer moments.
    pub fn new(config: AgentConfig, state_len: usize, actions: usize, seed: u64) -> Result<Self> {
        config.validate()?;
        let dims = config.layer_dims(state_len, actions);
        let q_net = Mlp::new(&dims, &mut rng::stream(seed, "agent-init", 0))?;
        Self::assemble(config, q_net, seed)
    }

    fn assemble(config: AgentConfig, q_net: Mlp, seed: u64) -> Result<Self> {
        let buffer = ReplayBuffer::new(config.buffer_capacity)?;
        let opt = AdamState::new(&q_net, config.adam);
        let epsilon = EpsilonSchedule::Linear {
            start: config.epsilon.start,
            end: config.epsilon.end,
            origin: 0,
            span: 0,
        };
        Ok(Self {
            target_net: q_net.clone(),
            q_net,
            buffer,
            opt,
            epsilon,
            decision_steps: 0,
            training_steps: 0,
            last_sync: 0,
            explore_rng: rng::stream(seed, "exploration", 0),
            sample_rng: rng::stream(seed, "replay-sampling", 0),
            config,
        })
    }

    /// Agent around a given online network (target synced to it), with fresh buffer,
    /// optimizer and streams.
    pub fn with_network(config: AgentConfig, q_net: Mlp, seed: u64) -> Result<Self> {
        config.validate()?;
        let expected = config.layer_dims(q_net.input_dim(), q_net.output_dim());
        if q_net.dims() != expected {
            return Err(Error::invalid(format!(
                "network dims {:?} do not match config {expected:?}",
                q_net.dims()
            )));
        }
        Self::assemble(config, q_net, seed)
    }

    pub fn config(&self) -> &AgentConfig {
        &self.config
    }

    pub fn q_net(&self) -> &Mlp {
        &self.q_net
    }

    pub fn target_net(&self) -> &Mlp {
        &self.target_net
    }

    pub fn buffer(&self) -> &ReplayBuffer {
        &self.buffer
    }

    pub fn optimizer(&self) -> &AdamState {
        &self.opt
    }

    pub fn state_len(&self) -> usize {
        self.q_net.input_dim()
    }

    pub fn actions(&self) -> usize {
        self.q_net.output_dim()
    }

    pub fn decision_steps(&self) -> u64 {
        self.decision_steps
    }

    pub fn training_steps(&self) -> u64 {
        self.training_steps
    }

    /// Training step of the most recent target sync.
    pub fn last_sync(&self) -> u64 {
        self.last_sync
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon.value(self.training_steps)
    }

    pub fn epsilon_schedule(&self) -> EpsilonSchedule {
        self.epsilon
    }

    pub fn set_epsilon_schedule(&mut self, schedule: EpsilonSchedule) {
        self.epsilon = schedule;
    }

    /// Restarts a linear decay over the coming phase unless exploration is pinned.
    pub fn begin_phase(&mut self, train_steps: u64) {
        if let EpsilonSchedule::Linear { .. } = self.epsilon {
            let span = (self.config.epsilon.decay_fraction * train_steps as f64).ceil() as u64;
            self.epsilon = EpsilonSchedule::Linear {
                start: self.config.epsilon.start,
                end: self.config.epsilon.end,
                origin: self.training_steps,
                span,
            };
        }
    }

    pub fn q_values(&self, state: &[f64]) -> Result<Vec<f64>> {
        self.q_net.forward(state)
    }

    pub fn greedy_action(&self, state: &[f64]) -> Result<usize> {
        Ok(argmax(&self.q_values(state)?))
    }

    /// ε-greedy choice; counts as a decision step.
    pub fn select_action(&mut self, state: &[f64]) -> Result<usize> {
        let eps = self.epsilon();
        self.decision_steps += 1;
        if eps > 0.0 && self.explore_rng.random::<f64>() < eps {
            let a = self.explore_rng.random_range(0..self.actions());
            if state.len() != self.state_len() {
                return Err(Error::DimensionMismatch {
                    expected: self.state_len(),
                    actual: state.len(),
                });
            }
            return Ok(a);
        }
        self.greedy_action(state)
    }

    pub fn remember(&mut self, t: Transition) -> Result<()> {
        if t.state.len() != self.state_len() || t.next_state.len() != self.state_len() {
            return Err(Error::DimensionMismatch {
                expected: self.state_len(),
                actual: t.state.len().max(t.next_state.len()),
            });
        }
        if t.action >= self.actions() {
            return Err(Error::IndexOutOfRange(format!("action {}", t.action)));
        }
        self.buffer.push(t);
        Ok(())
    }

    /// Whether the cadence calls for a training step after the latest decision.
    pub fn train_due(&self) -> bool {
        self.decision_steps > 0 && self.decision_steps.is_multiple_of(self.config.train_every)
    }

    /// One minibatch update. `None` (and no state change) while the buffer holds fewer
    /// than `batch_size` transitions.
    pub fn train_step(&mut self) -> Result<Option<f64>> {
        let n = self.config.batch_size;
        let Some(idx) = self.buffer.sample_indices(&mut self.sample_rng, n) else {
            return Ok(None);
        };
        let batch: Vec<&Transition> = idx
            .iter()
            .map(|&i| self.buffer.get(i).expect("in range"))
            .collect();
        let states = stack(&batch.iter().map(|t| t.state.as_slice()).collect::<Vec<_>>());
        let next = stack(
            &batch
                .iter()
                .map(|t| t.next_state.as_slice())
                .collect::<Vec<_>>(),
        );
        let rewards: Vec<f64> = batch.iter().map(|t| t.reward).collect();
        let targets = td_targets(
            &rewards,
            next.view(),
            &self.q_net,
            &self.target_net,
            self.config.gamma,
            self.config.target_direction,
        )?;

        let cache = self.q_net.forward_cached(states.view())?;
        let out = cache.output();
        let mut upstream = Array2::zeros(out.dim());
        let mut loss = 0.0;
        let delta = self.config.huber_delta;
        for (i, (t, y)) in batch.iter().zip(&targets).enumerate() {
            let err = out[[i, t.action]] - y;
            let (l, g) = match self.config.loss {
                LossKind::Mse => (err * err, 2.0 * err),
                LossKind::Huber if err.abs() <= delta => (0.5 * err * err, err),
                LossKind::Huber => (delta * (err.abs() - 0.5 * delta), delta * err.signum()),
            };
            loss += l;
            upstream[[i, t.action]] = g / n as f64;
        }
        let grads = self.q_net.backward(&cache, upstream.view())?;
        self.opt.apply(&mut self.q_net, &grads)?;
        self.training_steps += 1;
        if self
            .training_steps
            .is_multiple_of(self.config.target_sync_period)
        {
            self.sync_target();
        }
        Ok(Some(loss / n as f64))
    }

    pub fn sync_target(&mut self) {
        self.target_net = self.q_net.clone();
        self.last_sync = self.training_steps;
    }

    /// Greedy, parameter-frozen copy of the online network.
    pub fn export_inference(&self) -> InferencePolicy {
        InferencePolicy::new(self.q_net.clone())
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            format_version: CHECKPOINT_FORMAT_VERSION,
            config: self.config.clone(),
            decision_steps: self.decision_steps,
            training_steps: self.training_steps,
            last_sync: self.last_sync,
            epsilon: self.epsilon,
            q_net: self.q_net.clone(),
            target_net: self.target_net.clone(),
            optimizer: self.opt.clone(),
            buffer: self.buffer.clone(),
            explore_rng: self.explore_rng.clone(),
            sample_rng: self.sample_rng.clone(),
        }
    }

    pub fn from_checkpoint(c: Checkpoint) -> Result<Self> {
        c.validate()?;
        Ok(Self {
            config: c.config,
            q_net: c.q_net,
            target_net: c.target_net,
            buffer: c.buffer,
            opt: c.optimizer,
            epsilon: c.epsilon,
            decision_steps: c.decision_steps,
            training_steps: c.training_steps,
            last_sync: c.last_sync,
            explore_rng: c.explore_rng,
            sample_rng: c.sample_rng,
        })
    }

    /// Replaces pieces wholesale; used by phase transfer.
    pub(crate) fn set_networks(&mut self, q_net: Mlp, target_net: Mlp) {
        self.q_net = q_net;
        self.target_net = target_net;
    }

    pub(crate) fn set_buffer(&mut self, buffer: ReplayBuffer) {
        self.buffer = buffer;
    }

    pub(crate) fn set_optimizer(&mut self, opt: AdamState) {
        self.opt = opt;
    }

    pub(crate) fn set_counters(
        &mut self,
        decision_steps: u64,
        training_steps: u64,
        last_sync: u64,
    ) {
        self.decision_steps = decision_steps;
        self.training_steps = training_steps;
        self.last_sync = last_sync;
    }

    /// Mutable online network, for tests that rescale outputs.
    pub fn q_net_mut(&mut self) -> &mut Mlp {
        &mut self.q_net
    }
}
