//! Lifelong train / infer protocol.
//!
//! A trial runs a [`PhaseSchedule`]: each phase trains (unless the transfer mode forbids
//! it) on a fresh simulator whose clock is cut into fixed-length training episodes, then
//! evaluates a greedy export of the agent on another fresh simulator. The next phase
//! raises the generation rate and builds its agent through
//! [`crate::transfer::initialize_phase_agent`].
//!
//! Every random draw comes from a stream derived from the trial seed and a purpose tag,
//! so workloads are shared across transfer modes and baselines for the same seed and
//! phase, and changing exploration never changes the job trace.

mod baseline;
mod output;
mod stats;

pub use baseline::{min_queue_index, BaselineKind, GreedyMinQueue, RandomPolicy, RoundRobin};
pub use output::{
    aggregate_rows, read_results_csv, write_aggregate_csv, write_boxplot_svg, write_loss_csv,
    write_results_csv, AggregateRow, ResultRow,
};
pub use stats::{aggregate_trials, BoxStats};

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agent::{AgentConfig, Checkpoint, DdqlAgent, InferencePolicy, Transition};
use crate::error::{Error, Result};
use crate::repr::{self, LoadDistribution, ReprDims, Representation};
use crate::rng::{self, derive_seed};
use crate::sim::{Dispatcher, Observation, SimMetrics, Simulator};
use crate::topology::{FogTopology, NodeId};
use crate::transfer::{initialize_phase_agent, TransferMode};
use crate::workload::{validate_categories, GenerationConfig, Job, JobGenerator, WorkloadCategory};

/// Simulated time between checks of the training budget.
const TRAIN_CHUNK: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Phase {
    /// Exponential inter-arrival scale of every cluster.
    pub beta: f64,
    /// Training steps (network updates) in this phase.
    pub train_steps: u64,
    /// Simulated time per training episode.
    pub train_episode_len: f64,
    /// Simulated time of the evaluation episode.
    pub inference_len: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PhaseSchedule {
    pub phases: Vec<Phase>,
}

impl PhaseSchedule {
    pub fn new(phases: Vec<Phase>) -> Result<Self> {
        let s = Self { phases };
        s.validate()?;
        Ok(s)
    }

    pub fn uniform(betas: &[f64], train_steps: u64, episode: f64, inference: f64) -> Result<Self> {
        Self::new(
            betas
                .iter()
                .map(|&beta| Phase {
                    beta,
                    train_steps,
                    train_episode_len: episode,
                    inference_len: inference,
                })
                .collect(),
        )
    }

    /// β = 200, 150, 100; 30 000 training steps per phase; 10 000-unit training episodes;
    /// 100 000-unit evaluation.
    pub fn large() -> Self {
        Self::uniform(&[200.0, 150.0, 100.0], 30_000, 10_000.0, 100_000.0).expect("valid")
    }

    /// Same rates at 5 000 training steps and 20 000-unit evaluation.
    pub fn desk() -> Self {
        Self::uniform(&[200.0, 150.0, 100.0], 5_000, 10_000.0, 20_000.0).expect("valid")
    }

    pub fn validate(&self) -> Result<()> {
        if self.phases.is_empty() {
            return Err(Error::invalid("schedule needs at least one phase"));
        }
        for (i, p) in self.phases.iter().enumerate() {
            if !(p.beta > 0.0) || !p.beta.is_finite() {
                return Err(Error::invalid(format!("phase {i}: beta must be positive")));
            }
            if !(p.train_episode_len > 0.0) || !(p.inference_len >= 0.0) {
                return Err(Error::invalid(format!(
                    "phase {i}: episode lengths must be positive"
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Phase> {
        self.phases.iter()
    }
}

/// Topology, workload table and representation shared by every trial.
#[derive(Debug, Clone)]
pub struct Environment {
    topology: Arc<FogTopology>,
    categories: Arc<Vec<WorkloadCategory>>,
    category_mix: Vec<f64>,
    representation: Representation,
}

impl Environment {
    pub fn new(
        topology: FogTopology,
        categories: Vec<WorkloadCategory>,
        category_mix: Vec<f64>,
        representation: Representation,
    ) -> Result<Self> {
        validate_categories(&categories)?;
        GenerationConfig {
            beta: 1.0,
            category_mix: category_mix.clone(),
        }
        .validate()?;
        if category_mix.len() != categories.len() {
            return Err(Error::DimensionMismatch {
                expected: categories.len(),
                actual: category_mix.len(),
            });
        }
        if topology.clusters().is_empty() {
            return Err(Error::InvalidTopology("no source clusters".into()));
        }
        Ok(Self {
            topology: Arc::new(topology),
            categories: Arc::new(categories),
            category_mix,
            representation,
        })
    }

    pub fn topology(&self) -> &FogTopology {
        &self.topology
    }

    pub fn categories(&self) -> &[WorkloadCategory] {
        &self.categories
    }

    pub fn representation(&self) -> Representation {
        self.representation
    }

    pub fn with_representation(&self, representation: Representation) -> Self {
        Self {
            representation,
            ..self.clone()
        }
    }

    /// Fog nodes in action order.
    pub fn fog_nodes(&self) -> &[NodeId] {
        self.topology.fog_nodes()
    }

    pub fn dims(&self) -> ReprDims {
        ReprDims::new(
            self.topology.clusters().len(),
            self.categories.len(),
            self.fog_nodes().len(),
        )
        .expect("validated environment")
    }

    pub fn state_len(&self) -> usize {
        self.representation.state_len(self.dims())
    }

    pub fn actions(&self) -> usize {
        self.fog_nodes().len()
    }

    /// Simulator with one Poisson source per cluster, each on its own stream of
    /// `workload_seed`.
    pub fn simulator(&self, beta: f64, workload_seed: u64) -> Result<Simulator> {
        let mut sim = Simulator::new(self.topology.clone(), self.categories.clone());
        for (i, &cluster) in self.topology.clusters().iter().enumerate() {
            let config = GenerationConfig {
                beta,
                category_mix: self.category_mix.clone(),
            };
            let rng = rng::stream(workload_seed, "workload", i as u64);
            sim.add_generator(JobGenerator::new(cluster, i, config, rng)?)?;
        }
        Ok(sim)
    }

    pub fn new_observer(&self) -> Observer {
        match self.representation {
            Representation::Parl => Observer::Parl(LoadDistribution::new(self.dims())),
            Representation::Plrl => Observer::Plrl(self.dims()),
        }
    }
}

/// Turns dispatch-time observations into agent states and rewards.
///
/// The privacy-aware variant reads only the job's cluster and category, its own
/// decision history and the system-wide total; the privacy-lacking variant additionally
/// reads per-node queues.
#[derive(Debug, Clone, PartialEq)]
pub enum Observer {
    Parl(LoadDistribution),
    Plrl(ReprDims),
}

impl Observer {
    pub fn state(&self, job: &Job, obs: &Observation<'_>) -> Result<Vec<f64>> {
        match self {
            Observer::Parl(d) => repr::encode_state(job.cluster_index, job.category, d),
            Observer::Plrl(dims) => {
                repr::plrl_state(job.cluster_index, job.category, *dims, obs.queue_lengths)
            }
        }
    }

    pub fn record(&mut self, job: &Job, action: usize) -> Result<()> {
        match self {
            Observer::Parl(d) => d.update(job.cluster_index, job.category, action),
            Observer::Plrl(_) => Ok(()),
        }
    }

    /// Reward for the step from a decision that saw `q_prev` queued jobs to the next one
    /// seeing `q_now`.
    pub fn reward(&self, q_prev: usize, q_now: usize) -> f64 {
        match self {
            Observer::Parl(_) => repr::parl_reward(q_prev, q_now),
            Observer::Plrl(_) => repr::plrl_reward(q_now),
        }
    }

    pub fn distribution(&self) -> Option<&LoadDistribution> {
        match self {
            Observer::Parl(d) => Some(d),
            Observer::Plrl(_) => None,
        }
    }
}

/// Wraps a dispatcher and accumulates the episode return from consecutive decisions.
struct Recorder<'a> {
    inner: &'a mut dyn Dispatcher,
    observer: &'a Observer,
    q_first: Option<usize>,
    q_prev: Option<usize>,
    episode_return: f64,
    decisions: u64,
}

impl<'a> Recorder<'a> {
    fn new(inner: &'a mut dyn Dispatcher, observer: &'a Observer) -> Self {
        Self {
            inner,
            observer,
            q_first: None,
            q_prev: None,
            episode_return: 0.0,
            decisions: 0,
        }
    }
}

impl Dispatcher for Recorder<'_> {
    fn dispatch(&mut self, job: &Job, obs: &Observation<'_>) -> NodeId {
        let q = obs.total_queued;
        if let Some(prev) = self.q_prev {
            self.episode_return += self.observer.reward(prev, q);
        }
        self.q_first.get_or_insert(q);
        self.q_prev = Some(q);
        self.decisions += 1;
        self.inner.dispatch(job, obs)
    }
}

/// Greedy inference policy acting through its own copy of the observer.
struct PolicyDispatcher<'a> {
    policy: &'a InferencePolicy,
    observer: Observer,
    fog: &'a [NodeId],
    error: Option<Error>,
}

impl PolicyDispatcher<'_> {
    fn decide(&mut self, job: &Job, obs: &Observation<'_>) -> Result<usize> {
        let s = self.observer.state(job, obs)?;
        let a = self.policy.act(&s)?;
        self.observer.record(job, a)?;
        Ok(a)
    }
}

impl Dispatcher for PolicyDispatcher<'_> {
    fn dispatch(&mut self, job: &Job, obs: &Observation<'_>) -> NodeId {
        if self.error.is_some() {
            return self.fog[0];
        }
        match self.decide(job, obs) {
            Ok(a) => self.fog[a],
            Err(e) => {
                self.error = Some(e);
                self.fog[0]
            }
        }
    }
}

/// Outcome of one evaluation episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeReport {
    /// Undiscounted reward sum over consecutive decisions.
    pub episode_return: f64,
    /// Mean creation-to-delivery time of the episode's jobs; NaN if there were none.
    pub mean_exec_delay: f64,
    pub jobs_completed: u64,
    pub decisions: u64,
    /// Total queued jobs seen by the first and last decision (0 without decisions).
    pub q_first: usize,
    pub q_last: usize,
}

/// Runs `dispatcher` for `len` simulated time units, then stops the sources and lets every
/// created job finish so each contributes its delay.
pub fn run_episode(
    env: &Environment,
    dispatcher: &mut dyn Dispatcher,
    beta: f64,
    len: f64,
    workload_seed: u64,
) -> Result<EpisodeReport> {
    let observer = env.new_observer();
    run_recorded(env, dispatcher, &observer, beta, len, workload_seed)
}

fn run_recorded(
    env: &Environment,
    dispatcher: &mut dyn Dispatcher,
    observer: &Observer,
    beta: f64,
    len: f64,
    workload_seed: u64,
) -> Result<EpisodeReport> {
    let mut sim = env.simulator(beta, workload_seed)?;
    let mut rec = Recorder::new(dispatcher, observer);
    let mut window = sim.run_until(len, &mut rec)?;
    let tail = sim.drain(&mut rec)?;
    merge(&mut window, tail);
    Ok(EpisodeReport {
        episode_return: rec.episode_return,
        mean_exec_delay: window.mean_exec_delay().unwrap_or(f64::NAN),
        jobs_completed: window.jobs_completed,
        decisions: rec.decisions,
        q_first: rec.q_first.unwrap_or(0),
        q_last: rec.q_prev.unwrap_or(0),
    })
}

fn merge(into: &mut SimMetrics, tail: SimMetrics) {
    into.end = tail.end;
    into.jobs_created += tail.jobs_created;
    into.jobs_dropped += tail.jobs_dropped;
    into.jobs_completed += tail.jobs_completed;
    into.exec_delays.extend(tail.exec_delays);
    into.service_completions += tail.service_completions;
    into.sojourn_sum += tail.sojourn_sum;
    for (a, b) in into.queue_area.iter_mut().zip(tail.queue_area) {
        *a += b;
    }
}

/// Greedy evaluation of `policy` from a copy of `observer` on fresh queues.
pub fn run_inference(
    env: &Environment,
    policy: &InferencePolicy,
    observer: &Observer,
    beta: f64,
    inference_len: f64,
    workload_seed: u64,
) -> Result<EpisodeReport> {
    if policy.state_len() != env.state_len() || policy.actions() != env.actions() {
        return Err(Error::DimensionMismatch {
            expected: env.state_len(),
            actual: policy.state_len(),
        });
    }
    let mut d = PolicyDispatcher {
        policy,
        observer: observer.clone(),
        fog: env.fog_nodes(),
        error: None,
    };
    let report = run_recorded(env, &mut d, observer, beta, inference_len, workload_seed)?;
    match d.error {
        Some(e) => Err(e),
        None => Ok(report),
    }
}

/// ε-greedy learner: stores transitions between consecutive decisions and trains on the
/// agent's cadence until the phase budget is spent.
struct TrainingDispatcher<'a> {
    agent: &'a mut DdqlAgent,
    observer: &'a mut Observer,
    fog: &'a [NodeId],
    budget: u64,
    pending: Option<(Vec<f64>, usize, usize)>,
    crossed_boundary: bool,
    losses: Vec<f64>,
    decisions: u64,
    error: Option<Error>,
}

impl TrainingDispatcher<'_> {
    fn done(&self) -> bool {
        self.losses.len() as u64 >= self.budget
    }

    fn decide(&mut self, job: &Job, obs: &Observation<'_>) -> Result<usize> {
        let s = self.observer.state(job, obs)?;
        let q = obs.total_queued;
        if let Some((ps, pa, pq)) = self.pending.take() {
            self.agent.remember(Transition {
                state: ps,
                action: pa,
                reward: self.observer.reward(pq, q),
                next_state: s.clone(),
                truncated: self.crossed_boundary,
            })?;
            self.crossed_boundary = false;
        }
        let a = self.agent.select_action(&s)?;
        self.observer.record(job, a)?;
        self.decisions += 1;
        self.pending = Some((s, a, q));
        if self.agent.train_due() {
            if let Some(loss) = self.agent.train_step()? {
                self.losses.push(loss);
            }
        }
        Ok(a)
    }
}

impl Dispatcher for TrainingDispatcher<'_> {
    fn dispatch(&mut self, job: &Job, obs: &Observation<'_>) -> NodeId {
        if self.error.is_some() || self.done() {
            return self.fog[0];
        }
        match self.decide(job, obs) {
            Ok(a) => self.fog[a],
            Err(e) => {
                self.error = Some(e);
                self.fog[0]
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainingReport {
    /// Minibatch loss of every training step, in order.
    pub losses: Vec<f64>,
    pub decisions: u64,
    pub episodes: u64,
    pub sim_time: f64,
}

/// Trains `agent` for `phase.train_steps` updates on a fresh simulator.
///
/// Episodes are consecutive `train_episode_len` windows of one simulation, so queues and
/// the observer's history persist across them; the transition spanning a boundary is
/// flagged `truncated`. The phase stops as soon as the budget is reached.
pub fn run_training_phase(
    env: &Environment,
    agent: &mut DdqlAgent,
    observer: &mut Observer,
    phase: &Phase,
    workload_seed: u64,
) -> Result<TrainingReport> {
    if phase.train_steps == 0 {
        return Ok(TrainingReport::default());
    }
    if agent.state_len() != env.state_len() || agent.actions() != env.actions() {
        return Err(Error::DimensionMismatch {
            expected: env.state_len(),
            actual: agent.state_len(),
        });
    }
    let mut sim = env.simulator(phase.beta, workload_seed)?;
    let mut d = TrainingDispatcher {
        agent,
        observer,
        fog: env.fog_nodes(),
        budget: phase.train_steps,
        pending: None,
        crossed_boundary: false,
        losses: Vec::with_capacity(phase.train_steps as usize),
        decisions: 0,
        error: None,
    };
    let mut episodes = 0;
    while !d.done() {
        let start = sim.now();
        let end = start + phase.train_episode_len;
        let before = d.decisions;
        let mut t = start;
        while t < end && !d.done() {
            t = (t + TRAIN_CHUNK).min(end);
            sim.run_until(t, &mut d)?;
            if let Some(e) = d.error.take() {
                return Err(e);
            }
        }
        episodes += 1;
        d.crossed_boundary = true;
        if d.decisions == before {
            return Err(Error::Simulation(
                "a whole training episode passed without a decision".into(),
            ));
        }
    }
    Ok(TrainingReport {
        losses: d.losses,
        decisions: d.decisions,
        episodes,
        sim_time: sim.now(),
    })
}

/// Per-trial stream seeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialSeeds {
    pub seed: u64,
}

impl TrialSeeds {
    pub fn agent(&self, phase: usize) -> u64 {
        derive_seed(self.seed, "agent", phase as u64)
    }

    pub fn train_workload(&self, phase: usize) -> u64 {
        derive_seed(self.seed, "train-workload", phase as u64)
    }

    pub fn inference_workload(&self, phase: usize) -> u64 {
        derive_seed(self.seed, "inference-workload", phase as u64)
    }

    pub fn baseline(&self, phase: usize) -> u64 {
        derive_seed(self.seed, "baseline", phase as u64)
    }
}

/// One (policy, phase, trial) outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseRecord {
    pub mode: String,
    /// 1-based.
    pub phase: usize,
    pub beta: f64,
    pub seed: u64,
    pub episode_return: f64,
    pub mean_exec_delay: f64,
    pub jobs_completed: u64,
    pub q_first: usize,
    pub q_last: usize,
    pub decisions: u64,
    pub losses: Vec<f64>,
    /// Online-network hash after the phase (0 for baselines).
    pub param_hash: u64,
}

impl PhaseRecord {
    fn from_report(mode: &str, phase: usize, beta: f64, seed: u64, r: EpisodeReport) -> Self {
        Self {
            mode: mode.to_string(),
            phase,
            beta,
            seed,
            episode_return: r.episode_return,
            mean_exec_delay: r.mean_exec_delay,
            jobs_completed: r.jobs_completed,
            q_first: r.q_first,
            q_last: r.q_last,
            decisions: r.decisions,
            losses: Vec::new(),
            param_hash: 0,
        }
    }

    pub fn row(&self) -> ResultRow {
        ResultRow {
            mode: self.mode.clone(),
            phase: self.phase,
            beta: self.beta,
            seed: self.seed,
            episode_return: self.episode_return,
            mean_exec_delay: self.mean_exec_delay,
            jobs_completed: self.jobs_completed,
        }
    }
}

/// Agent state at the end of a phase, as handed to the next one.
#[derive(Debug, Clone)]
pub struct PhaseOutcome {
    pub record: PhaseRecord,
    pub checkpoint: Checkpoint,
    pub observer: Observer,
    pub policy: InferencePolicy,
}

#[allow(clippy::too_many_arguments)]
fn train_and_evaluate(
    env: &Environment,
    mut agent: DdqlAgent,
    mut observer: Observer,
    train: bool,
    phase: &Phase,
    index: usize,
    seeds: TrialSeeds,
    mode: &str,
) -> Result<PhaseOutcome> {
    let mut losses = Vec::new();
    if train {
        agent.begin_phase(phase.train_steps);
        losses = run_training_phase(
            env,
            &mut agent,
            &mut observer,
            phase,
            seeds.train_workload(index),
        )?
        .losses;
    }
    let policy = agent.export_inference();
    let report = run_inference(
        env,
        &policy,
        &observer,
        phase.beta,
        phase.inference_len,
        seeds.inference_workload(index),
    )?;
    let mut record = PhaseRecord::from_report(mode, index + 1, phase.beta, seeds.seed, report);
    record.losses = losses;
    record.param_hash = agent.q_net().param_hash();
    Ok(PhaseOutcome {
        record,
        checkpoint: agent.checkpoint(),
        observer,
        policy,
    })
}

/// Phase 1: train from scratch, then evaluate. Identical for every transfer mode.
pub fn run_first_phase(
    env: &Environment,
    schedule: &PhaseSchedule,
    config: &AgentConfig,
    seed: u64,
) -> Result<PhaseOutcome> {
    schedule.validate()?;
    let seeds = TrialSeeds { seed };
    let agent = DdqlAgent::new(
        config.clone(),
        env.state_len(),
        env.actions(),
        seeds.agent(0),
    )?;
    train_and_evaluate(
        env,
        agent,
        env.new_observer(),
        true,
        &schedule.phases[0],
        0,
        seeds,
        TransferMode::Scratch.name(),
    )
}

/// Phases 2.. of a trial, continuing from a phase-1 outcome.
pub fn continue_lifelong(
    env: &Environment,
    schedule: &PhaseSchedule,
    mode: TransferMode,
    config: &AgentConfig,
    first: &PhaseOutcome,
) -> Result<Vec<PhaseOutcome>> {
    let seeds = TrialSeeds {
        seed: first.record.seed,
    };
    let mut head = first.clone();
    head.record.mode = mode.name().to_string();
    let mut out = vec![head];
    for (index, phase) in schedule.phases.iter().enumerate().skip(1) {
        let prev = out.last().expect("phase 1 present");
        let (agent, train) = initialize_phase_agent(
            mode,
            Some(&prev.checkpoint),
            config,
            env.state_len(),
            env.actions(),
            seeds.agent(index),
        )?;
        let observer = if mode.keeps_distribution() {
            prev.observer.clone()
        } else {
            env.new_observer()
        };
        let next = train_and_evaluate(
            env,
            agent,
            observer,
            train,
            phase,
            index,
            seeds,
            mode.name(),
        )?;
        log::debug!(
            "seed {} {mode} phase {}: return {} delay {:.2}",
            seeds.seed,
            index + 1,
            next.record.episode_return,
            next.record.mean_exec_delay
        );
        out.push(next);
    }
    Ok(out)
}

/// Full lifelong run of one trial under one transfer mode.
pub fn run_lifelong(
    env: &Environment,
    schedule: &PhaseSchedule,
    mode: TransferMode,
    config: &AgentConfig,
    seed: u64,
) -> Result<Vec<PhaseOutcome>> {
    let first = run_first_phase(env, schedule, config, seed)?;
    continue_lifelong(env, schedule, mode, config, &first)
}

/// Every mode on every seed, sharing phase 1 per seed. Results are ordered by mode (as
/// given), then seed, then phase, regardless of how trials were scheduled.
pub fn run_matrix(
    env: &Environment,
    schedule: &PhaseSchedule,
    modes: &[TransferMode],
    config: &AgentConfig,
    seeds: &[u64],
) -> Result<Vec<(TransferMode, u64, Vec<PhaseOutcome>)>> {
    let per_seed: Vec<Vec<(TransferMode, Vec<PhaseOutcome>)>> = seeds
        .par_iter()
        .map(|&seed| {
            let first = run_first_phase(env, schedule, config, seed)?;
            modes
                .iter()
                .map(|&m| Ok((m, continue_lifelong(env, schedule, m, config, &first)?)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(modes.len() * seeds.len());
    for (mi, &mode) in modes.iter().enumerate() {
        for (si, &seed) in seeds.iter().enumerate() {
            out.push((mode, seed, per_seed[si][mi].1.clone()));
        }
    }
    Ok(out)
}

/// Evaluates a baseline on every phase's evaluation workload.
pub fn run_baseline(
    env: &Environment,
    schedule: &PhaseSchedule,
    kind: BaselineKind,
    seed: u64,
) -> Result<Vec<PhaseRecord>> {
    let seeds = TrialSeeds { seed };
    schedule
        .phases
        .iter()
        .enumerate()
        .map(|(index, phase)| {
            let fog = env.fog_nodes();
            let mut d: Box<dyn Dispatcher> = match kind {
                BaselineKind::RoundRobin => Box::new(RoundRobin::new(fog)),
                BaselineKind::Random => {
                    Box::new(RandomPolicy::new(fog, rng::seeded(seeds.baseline(index))))
                }
                BaselineKind::GreedyMinQueue => Box::new(GreedyMinQueue::new(fog)),
            };
            let report = run_episode(
                env,
                d.as_mut(),
                phase.beta,
                phase.inference_len,
                seeds.inference_workload(index),
            )?;
            Ok(PhaseRecord::from_report(
                kind.name(),
                index + 1,
                phase.beta,
                seed,
                report,
            ))
        })
        .collect()
}

/// `run_baseline` over many seeds in parallel, ordered by seed then phase.
pub fn run_baseline_trials(
    env: &Environment,
    schedule: &PhaseSchedule,
    kind: BaselineKind,
    seeds: &[u64],
) -> Result<Vec<PhaseRecord>> {
    let runs: Vec<Vec<PhaseRecord>> = seeds
        .par_iter()
        .map(|&s| run_baseline(env, schedule, kind, s))
        .collect::<Result<_>>()?;
    Ok(runs.into_iter().flatten().collect())
}

/// Seeds `base, base + 1, ...` for `trials` trials.
pub fn trial_seeds(base: u64, trials: usize) -> Vec<u64> {
    (0..trials as u64).map(|k| base.wrapping_add(k)).collect()
}
