//! Deterministic discrete-event simulation of a fog network.
//!
//! Jobs are created by per-cluster Poisson generators, assigned to a Fog node by a
//! [`Dispatcher`], travel the minimum-hop route (deterministic `bytes / bw + pr` per link),
//! wait in the node's FIFO, are served by its single server at `ipt` instructions per time
//! unit, and finally send their response back to the source cluster.
//!
//! Events are totally ordered by `(time, seq)` where `seq` is the insertion counter, so two
//! runs with the same inputs produce the same trace bit for bit.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::topology::{FogTopology, LinkSpec, NodeId, Role};
use crate::workload::{Job, JobGenerator, JobId, WorkloadCategory};

/// `bytes / bw + pr`.
pub fn transit_delay(link: &LinkSpec, bytes: f64) -> f64 {
    link.transit_delay(bytes)
}

/// Minimum-hop path from `from` to `to`; among equal-length paths the lexicographically
/// smallest id sequence wins.
pub fn route(topo: &FogTopology, from: NodeId, to: NodeId) -> Result<Vec<NodeId>> {
    let n = topo.nodes().len();
    if from >= n || to >= n {
        return Err(Error::IndexOutOfRange(format!(
            "route endpoints ({from}, {to}) outside 0..{n}"
        )));
    }
    // hop distance to the destination, then a greedy smallest-id walk along it
    let mut dist = vec![usize::MAX; n];
    dist[to] = 0;
    let mut queue = VecDeque::from([to]);
    while let Some(v) = queue.pop_front() {
        for &(w, _) in topo.neighbors(v) {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    if dist[from] == usize::MAX {
        return Err(Error::Unreachable { from, to });
    }
    let mut path = vec![from];
    let mut cur = from;
    while cur != to {
        cur = topo
            .neighbors(cur)
            .iter()
            .map(|&(w, _)| w)
            .find(|&w| dist[w] + 1 == dist[cur])
            .expect("a neighbor one hop closer exists");
        path.push(cur);
    }
    Ok(path)
}

fn link_between(topo: &FogTopology, a: NodeId, b: NodeId) -> usize {
    topo.neighbors(a)
        .iter()
        .find(|&&(w, _)| w == b)
        .map(|&(_, idx)| idx)
        .expect("consecutive route nodes are adjacent")
}

/// Sum of per-link transit delays along `path`.
pub fn path_delay(topo: &FogTopology, path: &[NodeId], bytes: f64) -> f64 {
    path.windows(2)
        .map(|w| {
            topo.link(link_between(topo, w[0], w[1]))
                .transit_delay(bytes)
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    JobCreated,
    ArrivalAtNode,
    ServiceComplete,
    ResponseDelivered,
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            EventKind::JobCreated => "JobCreated",
            EventKind::ArrivalAtNode => "ArrivalAtNode",
            EventKind::ServiceComplete => "ServiceComplete",
            EventKind::ResponseDelivered => "ResponseDelivered",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy)]
struct Event {
    time: f64,
    seq: u64,
    kind: EventKind,
    /// Generator index for `JobCreated`, job id otherwise.
    subject: u64,
    node: NodeId,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    // reversed: BinaryHeap is a max-heap and we pop the earliest (time, seq)
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then(other.seq.cmp(&self.seq))
    }
}

/// One line of the optional event trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub time: f64,
    pub seq: u64,
    pub kind: EventKind,
    /// `None` for `JobCreated` events whose job was dropped before getting an id.
    pub job: Option<JobId>,
    pub node: Option<NodeId>,
}

impl fmt::Display for TraceRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |v: Option<u64>| v.map_or_else(|| "-".to_string(), |x| x.to_string());
        write!(
            f,
            "{}\t{}\t{}\t{}\t{}",
            self.time,
            self.seq,
            self.kind,
            opt(self.job),
            opt(self.node.map(|n| n as u64))
        )
    }
}

/// FIFO single-server queue of one Fog node.
#[derive(Debug, Clone)]
pub struct NodeQueueState {
    pub node: NodeId,
    pub ipt: f64,
    fifo: VecDeque<(JobId, f64)>,
    in_service: Option<JobId>,
    busy_until: f64,
}

impl NodeQueueState {
    pub fn new(node: NodeId, ipt: f64) -> Self {
        Self {
            node,
            ipt,
            fifo: VecDeque::new(),
            in_service: None,
            busy_until: 0.0,
        }
    }

    /// Jobs waiting plus the one in service.
    pub fn len(&self) -> usize {
        self.fifo.len() + usize::from(self.in_service.is_some())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn in_service(&self) -> Option<JobId> {
        self.in_service
    }

    pub fn waiting(&self) -> impl Iterator<Item = JobId> + '_ {
        self.fifo.iter().map(|(j, _)| *j)
    }

    pub fn busy_until(&self) -> f64 {
        self.busy_until
    }

    /// Admits a job. Returns its completion time when the server was idle, `None` when it
    /// joined the FIFO.
    pub fn arrive(&mut self, job: JobId, instructions: f64, now: f64) -> Option<f64> {
        if self.in_service.is_none() {
            Some(self.start(job, instructions, now))
        } else {
            self.fifo.push_back((job, instructions));
            None
        }
    }

    fn start(&mut self, job: JobId, instructions: f64, now: f64) -> f64 {
        self.in_service = Some(job);
        self.busy_until = now + instructions / self.ipt;
        self.busy_until
    }

    /// Finishes the job in service and starts the next one, if any. Returns the finished
    /// job and `(next job, its completion time)`.
    pub fn complete(&mut self, now: f64) -> Result<(JobId, Option<(JobId, f64)>)> {
        let done = self.in_service.take().ok_or_else(|| {
            Error::Simulation(format!("service completion on idle node {}", self.node))
        })?;
        let next = self
            .fifo
            .pop_front()
            .map(|(job, instr)| (job, self.start(job, instr, now)));
        Ok((done, next))
    }
}

/// What the dispatcher sees when a job is created.
///
/// `queue_lengths` and `total_queued` are true system state; privacy-aware policies only
/// ever read `cluster_index`, `category` and `total_queued`.
#[derive(Debug, Clone, Copy)]
pub struct Observation<'a> {
    pub now: f64,
    pub cluster_index: usize,
    pub category: usize,
    /// Per Fog node, in `FogTopology::fog_nodes()` order.
    pub queue_lengths: &'a [usize],
    pub total_queued: usize,
}

/// Chooses the Fog node for every created job.
pub trait Dispatcher {
    fn dispatch(&mut self, job: &Job, obs: &Observation<'_>) -> NodeId;
}

impl<F> Dispatcher for F
where
    F: FnMut(&Job, &Observation<'_>) -> NodeId,
{
    fn dispatch(&mut self, job: &Job, obs: &Observation<'_>) -> NodeId {
        self(job, obs)
    }
}

/// Statistics collected over one `run_until` / `drain` window.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimMetrics {
    pub start: f64,
    pub end: f64,
    pub jobs_created: u64,
    pub jobs_dropped: u64,
    /// Responses delivered within the window.
    pub jobs_completed: u64,
    /// `t_delivered - t_created` of every job delivered within the window.
    pub exec_delays: Vec<f64>,
    pub service_completions: u64,
    /// Sum over served jobs of time spent at the node (waiting + service).
    pub sojourn_sum: f64,
    /// Time integral of each Fog node's queue length (waiting + in service).
    pub queue_area: Vec<f64>,
}

impl SimMetrics {
    fn new(start: f64, fog: usize) -> Self {
        Self {
            start,
            end: start,
            queue_area: vec![0.0; fog],
            ..Self::default()
        }
    }

    pub fn duration(&self) -> f64 {
        self.end - self.start
    }

    pub fn mean_exec_delay(&self) -> Option<f64> {
        (!self.exec_delays.is_empty())
            .then(|| self.exec_delays.iter().sum::<f64>() / self.exec_delays.len() as f64)
    }

    pub fn mean_sojourn(&self) -> Option<f64> {
        (self.service_completions > 0).then(|| self.sojourn_sum / self.service_completions as f64)
    }

    /// Time-averaged number of jobs at Fog node `fog_index`.
    pub fn time_avg_queue(&self, fog_index: usize) -> f64 {
        let d = self.duration();
        if d > 0.0 {
            self.queue_area[fog_index] / d
        } else {
            0.0
        }
    }

    /// Time-averaged total number of jobs at Fog nodes.
    pub fn time_avg_in_system(&self) -> f64 {
        (0..self.queue_area.len())
            .map(|i| self.time_avg_queue(i))
            .sum()
    }
}

/// Running totals since the simulator was created.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Counters {
    pub created: u64,
    pub dropped: u64,
    pub delivered: u64,
    pub uplink: u64,
    pub downlink: u64,
    pub queued: u64,
}

impl Counters {
    pub fn in_flight(&self) -> u64 {
        self.uplink + self.downlink
    }

    /// `created = delivered + in flight + queued + dropped`.
    pub fn conserved(&self) -> bool {
        self.created == self.delivered + self.in_flight() + self.queued + self.dropped
    }
}

struct Source {
    generator: JobGenerator,
    active: bool,
}

pub struct Simulator {
    topology: Arc<FogTopology>,
    categories: Arc<Vec<WorkloadCategory>>,
    now: f64,
    seq: u64,
    next_job: JobId,
    events: BinaryHeap<Event>,
    sources: Vec<Source>,
    jobs: HashMap<JobId, Job>,
    /// Indexed by Fog ordinal.
    queues: Vec<NodeQueueState>,
    queue_lengths: Vec<usize>,
    fog_index: HashMap<NodeId, usize>,
    routes: HashMap<(NodeId, NodeId), Vec<NodeId>>,
    counters: Counters,
    trace: Option<Vec<TraceRecord>>,
}

impl Simulator {
    pub fn new(topology: Arc<FogTopology>, categories: Arc<Vec<WorkloadCategory>>) -> Self {
        let queues: Vec<NodeQueueState> = topology
            .fog_nodes()
            .iter()
            .map(|&id| NodeQueueState::new(id, topology.node(id).ipt))
            .collect();
        let fog_index = topology
            .fog_nodes()
            .iter()
            .enumerate()
            .map(|(i, &id)| (id, i))
            .collect();
        Self {
            queue_lengths: vec![0; queues.len()],
            queues,
            fog_index,
            topology,
            categories,
            now: 0.0,
            seq: 0,
            next_job: 0,
            events: BinaryHeap::new(),
            sources: Vec::new(),
            jobs: HashMap::new(),
            routes: HashMap::new(),
            counters: Counters::default(),
            trace: None,
        }
    }

    pub fn topology(&self) -> &FogTopology {
        &self.topology
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn counters(&self) -> Counters {
        self.counters
    }

    /// Total jobs at Fog nodes, in-service jobs included.
    pub fn total_queued(&self) -> usize {
        self.counters.queued as usize
    }

    /// Per Fog node, in `fog_nodes()` order.
    pub fn queue_lengths(&self) -> &[usize] {
        &self.queue_lengths
    }

    pub fn node_state(&self, node: NodeId) -> Result<&NodeQueueState> {
        self.fog_index
            .get(&node)
            .map(|&i| &self.queues[i])
            .ok_or_else(|| Error::Simulation(format!("node {node} is not a Fog node")))
    }

    pub fn job(&self, id: JobId) -> Option<&Job> {
        self.jobs.get(&id)
    }

    pub fn enable_trace(&mut self) {
        self.trace.get_or_insert_with(Vec::new);
    }

    pub fn trace(&self) -> &[TraceRecord] {
        self.trace.as_deref().unwrap_or(&[])
    }

    /// Attaches a Poisson source; its first job is scheduled one gap after `now`.
    pub fn add_generator(&mut self, mut generator: JobGenerator) -> Result<()> {
        let role = self
            .topology
            .nodes()
            .get(generator.cluster)
            .map(|n| n.role)
            .ok_or_else(|| Error::IndexOutOfRange(format!("cluster {}", generator.cluster)))?;
        if role != Role::SourceCluster {
            return Err(Error::Simulation(format!(
                "generator attached to non-cluster node {}",
                generator.cluster
            )));
        }
        let idx = self.sources.len();
        let t = self.now + generator.next_gap();
        self.schedule(t, EventKind::JobCreated, idx as u64, generator.cluster);
        self.sources.push(Source {
            generator,
            active: true,
        });
        Ok(())
    }

    /// Stops all generators; already scheduled creations are discarded.
    pub fn stop_generators(&mut self) {
        for s in &mut self.sources {
            s.active = false;
        }
    }

    fn schedule(&mut self, time: f64, kind: EventKind, subject: u64, node: NodeId) {
        self.events.push(Event {
            time,
            seq: self.seq,
            kind,
            subject,
            node,
        });
        self.seq += 1;
    }

    fn route_delay(&mut self, from: NodeId, to: NodeId, bytes: f64) -> Result<f64> {
        if !self.routes.contains_key(&(from, to)) {
            let path = route(&self.topology, from, to)?;
            self.routes.insert((from, to), path);
        }
        Ok(path_delay(&self.topology, &self.routes[&(from, to)], bytes))
    }

    /// Places a job directly on a Fog node, bypassing generators and dispatch.
    pub fn inject_job(
        &mut self,
        cluster_index: usize,
        category: usize,
        instructions: f64,
        node: NodeId,
    ) -> Result<JobId> {
        if !self.fog_index.contains_key(&node) {
            return Err(Error::Simulation(format!("arrival at non-Fog node {node}")));
        }
        let cluster = *self
            .topology
            .clusters()
            .get(cluster_index)
            .ok_or_else(|| Error::IndexOutOfRange(format!("cluster index {cluster_index}")))?;
        if category >= self.categories.len() || !(instructions > 0.0) {
            return Err(Error::invalid("bad injected job"));
        }
        let id = self.new_job(cluster, cluster_index, category, instructions);
        self.assign(id, node)?;
        Ok(id)
    }

    fn new_job(
        &mut self,
        cluster: NodeId,
        cluster_index: usize,
        category: usize,
        instructions: f64,
    ) -> JobId {
        let id = self.next_job;
        self.next_job += 1;
        self.counters.created += 1;
        self.jobs.insert(
            id,
            Job {
                id,
                category,
                source_cluster: cluster,
                cluster_index,
                instructions,
                t_created: self.now,
                t_assigned: None,
                t_arrived: None,
                t_service_start: None,
                t_completed: None,
                t_delivered: None,
                assigned_to: None,
            },
        );
        id
    }

    fn assign(&mut self, id: JobId, node: NodeId) -> Result<()> {
        let (cluster, category) = {
            let job = &self.jobs[&id];
            (job.source_cluster, job.category)
        };
        let bytes = self.categories[category].request_bytes;
        let delay = self.route_delay(cluster, node, bytes)?;
        let now = self.now;
        let job = self.jobs.get_mut(&id).expect("live job");
        job.t_assigned = Some(now);
        job.assigned_to = Some(node);
        self.counters.uplink += 1;
        self.schedule(now + delay, EventKind::ArrivalAtNode, id, node);
        Ok(())
    }

    fn advance(&mut self, t: f64, window: &mut SimMetrics) {
        let dt = t - self.now;
        debug_assert!(dt >= 0.0, "clock moved backwards");
        if dt > 0.0 {
            for (area, &q) in window.queue_area.iter_mut().zip(&self.queue_lengths) {
                *area += q as f64 * dt;
            }
        }
        self.now = t;
    }

    /// Processes every event with `time <= t_end`, then sets the clock to `t_end`.
    pub fn run_until(&mut self, t_end: f64, dispatcher: &mut dyn Dispatcher) -> Result<SimMetrics> {
        if !(t_end >= self.now) {
            return Err(Error::Simulation(format!(
                "run_until({t_end}) is before the current time {}",
                self.now
            )));
        }
        let mut window = SimMetrics::new(self.now, self.queues.len());
        while self.events.peek().is_some_and(|e| e.time <= t_end) {
            let ev = self.events.pop().expect("peeked");
            self.advance(ev.time, &mut window);
            self.handle(ev, dispatcher, &mut window)?;
        }
        self.advance(t_end, &mut window);
        window.end = t_end;
        Ok(window)
    }

    /// Stops the generators and runs until every job in the system has been delivered.
    pub fn drain(&mut self, dispatcher: &mut dyn Dispatcher) -> Result<SimMetrics> {
        self.stop_generators();
        let mut window = SimMetrics::new(self.now, self.queues.len());
        while let Some(ev) = self.events.pop() {
            self.advance(ev.time, &mut window);
            self.handle(ev, dispatcher, &mut window)?;
        }
        window.end = self.now;
        Ok(window)
    }

    fn record(&mut self, ev: &Event, job: Option<JobId>) {
        if let Some(trace) = &mut self.trace {
            trace.push(TraceRecord {
                time: ev.time,
                seq: ev.seq,
                kind: ev.kind,
                job,
                node: Some(ev.node),
            });
        }
    }

    fn handle(
        &mut self,
        ev: Event,
        dispatcher: &mut dyn Dispatcher,
        window: &mut SimMetrics,
    ) -> Result<()> {
        match ev.kind {
            EventKind::JobCreated => self.on_created(ev, dispatcher, window),
            EventKind::ArrivalAtNode => {
                self.record(&ev, Some(ev.subject));
                self.on_arrival(ev.subject, ev.node)
            }
            EventKind::ServiceComplete => {
                self.record(&ev, Some(ev.subject));
                self.on_service_complete(ev.subject, ev.node, window)
            }
            EventKind::ResponseDelivered => {
                self.record(&ev, Some(ev.subject));
                self.on_delivered(ev.subject, window)
            }
        }
    }

    fn on_created(
        &mut self,
        ev: Event,
        dispatcher: &mut dyn Dispatcher,
        window: &mut SimMetrics,
    ) -> Result<()> {
        let src = ev.subject as usize;
        if !self.sources[src].active {
            return Ok(());
        }
        let categories = Arc::clone(&self.categories);
        let source = &mut self.sources[src];
        let draw = source.generator.draw(&categories)?;
        let gap = source.generator.next_gap();
        let (cluster, cluster_index) = (source.generator.cluster, source.generator.cluster_index);
        self.schedule(self.now + gap, EventKind::JobCreated, src as u64, cluster);

        let id = self.new_job(cluster, cluster_index, draw.category, draw.instructions);
        window.jobs_created += 1;
        let obs = Observation {
            now: self.now,
            cluster_index,
            category: draw.category,
            queue_lengths: &self.queue_lengths,
            total_queued: self.counters.queued as usize,
        };
        let node = dispatcher.dispatch(&self.jobs[&id], &obs);
        self.record(&ev, Some(id));
        if !self.fog_index.contains_key(&node) {
            log::warn!("dispatcher chose non-Fog node {node} for job {id}; dropping");
            self.jobs.remove(&id);
            self.counters.dropped += 1;
            window.jobs_dropped += 1;
            return Ok(());
        }
        self.assign(id, node)
    }

    fn on_arrival(&mut self, id: JobId, node: NodeId) -> Result<()> {
        let i = *self
            .fog_index
            .get(&node)
            .ok_or_else(|| Error::Simulation(format!("arrival at non-Fog node {node}")))?;
        let now = self.now;
        let job = self
            .jobs
            .get_mut(&id)
            .ok_or_else(|| Error::Simulation(format!("unknown job {id}")))?;
        job.t_arrived = Some(now);
        let instructions = job.instructions;
        self.counters.uplink -= 1;
        self.counters.queued += 1;
        self.queue_lengths[i] += 1;
        if let Some(done_at) = self.queues[i].arrive(id, instructions, now) {
            job.t_service_start = Some(now);
            self.schedule(done_at, EventKind::ServiceComplete, id, node);
        }
        Ok(())
    }

    fn on_service_complete(
        &mut self,
        id: JobId,
        node: NodeId,
        window: &mut SimMetrics,
    ) -> Result<()> {
        let i = self.fog_index[&node];
        let now = self.now;
        let (done, next) = self.queues[i].complete(now)?;
        debug_assert_eq!(done, id);
        self.queue_lengths[i] -= 1;
        self.counters.queued -= 1;
        self.counters.downlink += 1;

        let job = self.jobs.get_mut(&id).expect("live job");
        job.t_completed = Some(now);
        window.service_completions += 1;
        window.sojourn_sum += now - job.t_arrived.expect("arrived before service");
        let (cluster, category) = (job.source_cluster, job.category);
        let bytes = self.categories[category].response_bytes;
        let delay = self.route_delay(node, cluster, bytes)?;
        self.schedule(now + delay, EventKind::ResponseDelivered, id, cluster);

        if let Some((next_id, done_at)) = next {
            self.jobs
                .get_mut(&next_id)
                .expect("queued job")
                .t_service_start = Some(now);
            self.schedule(done_at, EventKind::ServiceComplete, next_id, node);
        }
        Ok(())
    }

    fn on_delivered(&mut self, id: JobId, window: &mut SimMetrics) -> Result<()> {
        let mut job = self
            .jobs
            .remove(&id)
            .ok_or_else(|| Error::Simulation(format!("unknown job {id}")))?;
        job.t_delivered = Some(self.now);
        self.counters.downlink -= 1;
        self.counters.delivered += 1;
        window.jobs_completed += 1;
        window.exec_delays.push(self.now - job.t_created);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::NodeSpec;
    use crate::workload::{default_categories, CategoryLabel};

    fn node(id: usize, role: Role, ipt: f64) -> NodeSpec {
        NodeSpec {
            id,
            role,
            ipt,
            ram: 1,
        }
    }

    fn link(a: usize, b: usize, bw: f64, pr: f64) -> LinkSpec {
        LinkSpec {
            endpoints: (a, b),
            bw,
            pr,
        }
    }

    /// cloud 0 – fog 1, fog 2, fog 3 (diamond 0-1-3, 0-2-3 style), cluster 4 on fog 1
    fn diamond() -> FogTopology {
        FogTopology::new(
            vec![
                node(0, Role::Cloud, 1e4),
                node(1, Role::Fog, 100.0),
                node(2, Role::Fog, 200.0),
                node(3, Role::Fog, 300.0),
                node(4, Role::SourceCluster, 1.0),
            ],
            vec![
                link(0, 1, 1000.0, 1.0),
                link(0, 2, 1000.0, 1.0),
                link(1, 3, 1000.0, 1.0),
                link(2, 3, 1000.0, 1.0),
                link(1, 4, 1000.0, 2.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn transit_examples() {
        assert_eq!(transit_delay(&link(0, 1, 1000.0, 2.0), 500.0), 2.5);
        assert_eq!(transit_delay(&link(0, 1, 1000.0, 2.0), 0.0), 2.0);
        assert_eq!(transit_delay(&link(0, 1, 1.0, 0.0), 7.0), 7.0);
    }

    #[test]
    fn routes() {
        let t = diamond();
        assert_eq!(route(&t, 3, 3).unwrap(), vec![3]);
        assert_eq!(path_delay(&t, &[3], 100.0), 0.0);
        // two 2-hop paths 1→0→2 and 1→3→2; smallest id sequence goes through 0
        assert_eq!(route(&t, 1, 2).unwrap(), vec![1, 0, 2]);
        assert_eq!(route(&t, 4, 2).unwrap(), vec![4, 1, 0, 2]);
        assert_eq!(route(&t, 0, 3).unwrap(), vec![0, 1, 3]);
    }

    #[test]
    fn node_queue_fifo() {
        let mut q = NodeQueueState::new(1, 100.0);
        assert_eq!(q.arrive(7, 250.0, 10.0), Some(12.5));
        assert_eq!(q.arrive(8, 100.0, 11.0), None);
        assert_eq!(q.arrive(9, 100.0, 11.0), None);
        assert_eq!(q.len(), 3);
        assert_eq!(q.waiting().collect::<Vec<_>>(), vec![8, 9]);
        let (done, next) = q.complete(12.5).unwrap();
        assert_eq!((done, next), (7, Some((8, 13.5))));
        assert!(NodeQueueState::new(1, 1.0).complete(0.0).is_err());
    }

    fn sim(topo: FogTopology) -> Simulator {
        Simulator::new(Arc::new(topo), Arc::new(default_categories()))
    }

    #[test]
    fn single_job_delay_is_uplink_service_downlink() {
        let mut s = sim(diamond());
        let cat = &default_categories()[0];
        assert_eq!(cat.label, CategoryLabel::Light);
        let id = s.inject_job(0, 0, 250.0, 3).unwrap();
        let mut never = |_: &Job, _: &Observation<'_>| -> NodeId { unreachable!() };
        let m = s.drain(&mut never).unwrap();
        let t = diamond();
        let up = path_delay(&t, &route(&t, 4, 3).unwrap(), cat.request_bytes);
        let down = path_delay(&t, &route(&t, 3, 4).unwrap(), cat.response_bytes);
        let expected = up + 250.0 / 300.0 + down;
        assert_eq!(m.exec_delays.len(), 1);
        assert!((m.exec_delays[0] - expected).abs() < 1e-12);
        assert!(s.job(id).is_none());
        assert!(s.counters().conserved());
    }

    #[test]
    fn arrival_at_non_fog_is_rejected() {
        let mut s = sim(diamond());
        assert!(s.inject_job(0, 0, 10.0, 0).is_err());
        assert!(s.inject_job(0, 0, 10.0, 4).is_err());
        assert!(s.node_state(0).is_err());
    }

    #[test]
    fn busy_node_queues_and_counts() {
        let mut s = sim(diamond());
        let mut never = |_: &Job, _: &Observation<'_>| -> NodeId { unreachable!() };
        assert_eq!(s.total_queued(), 0);
        s.inject_job(0, 0, 1e6, 1).unwrap();
        s.inject_job(0, 0, 1e6, 1).unwrap();
        s.inject_job(0, 0, 1.0, 2).unwrap();
        s.run_until(100.0, &mut never).unwrap();
        // node 1: one in service, one waiting; node 2 finished its tiny job
        assert_eq!(s.node_state(1).unwrap().len(), 2);
        assert_eq!(s.total_queued(), 2);
        assert_eq!(s.total_queued(), s.queue_lengths().iter().sum::<usize>());
        assert!(s.counters().conserved());
    }

    #[test]
    fn simultaneous_arrivals_served_in_insertion_order() {
        let mut s = sim(diamond());
        let a = s.inject_job(0, 0, 100.0, 1).unwrap();
        let b = s.inject_job(0, 0, 100.0, 1).unwrap();
        let mut never = |_: &Job, _: &Observation<'_>| -> NodeId { unreachable!() };
        s.run_until(4.5, &mut never).unwrap();
        let st = s.node_state(1).unwrap();
        assert_eq!(st.in_service(), Some(a));
        assert_eq!(st.waiting().collect::<Vec<_>>(), vec![b]);
    }

    #[test]
    fn empty_simulator_returns_immediately() {
        let mut s = sim(diamond());
        let mut never = |_: &Job, _: &Observation<'_>| -> NodeId { unreachable!() };
        let m = s.run_until(1000.0, &mut never).unwrap();
        assert_eq!(m.jobs_created, 0);
        assert_eq!(s.now(), 1000.0);
        assert!(s.run_until(10.0, &mut never).is_err());
    }
}
