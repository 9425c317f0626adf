//! Reproducible fog topologies.
//!
//! A topology starts as a scale-free graph grown by preferential attachment. Betweenness
//! centrality then picks the Cloud (the most central vertex), degree-1 vertices become
//! source clusters and everything else is a Fog node. Finally compute and link resources
//! are sampled and clusters are re-attached so that weaker Fog nodes serve more clusters.

use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, SimRng};

pub type NodeId = usize;

pub const TOPOLOGY_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Role {
    Cloud,
    Fog,
    SourceCluster,
}

/// Plain undirected graph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    /// Sorted, each edge stored once as `(lo, hi)`.
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut list = Vec::new();
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::invalid(format!("edge ({a}, {b}) outside 0..{n}")));
            }
            if a == b {
                return Err(Error::invalid(format!("self loop on vertex {a}")));
            }
            list.push((a.min(b), a.max(b)));
        }
        list.sort_unstable();
        list.dedup();
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in &list {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
        }
        Ok(Self {
            n,
            edges: list,
            adjacency,
        })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &w in &self.adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        count == self.n
    }
}

/// Grows a scale-free graph by preferential attachment.
///
/// Starts from a star on `m + 1` vertices (vertex 0 at the center); every further vertex
/// attaches to `m` distinct existing vertices chosen with probability proportional to
/// their degree. With `m = 1` the result is a tree.
pub fn generate_graph(seed: u64, n: usize, m: usize) -> Result<Graph> {
    if n == 0 {
        return Err(Error::invalid("graph needs at least one vertex"));
    }
    if n == 1 {
        return Graph::new(1, []);
    }
    if m == 0 || m >= n {
        return Err(Error::invalid(format!(
            "attachment degree m={m} must satisfy 1 <= m < n={n}"
        )));
    }
    let mut rng = rng::seeded(seed);
    let mut edges = Vec::with_capacity(m * n);
    // every edge endpoint once; sampling uniformly from it is degree-proportional
    let mut endpoints = Vec::with_capacity(2 * m * n);
    for leaf in 1..=m {
        edges.push((0, leaf));
        endpoints.extend([0, leaf]);
    }
    let mut targets = Vec::with_capacity(m);
    for v in (m + 1)..n {
        targets.clear();
        while targets.len() < m {
            let pick = endpoints[rng.random_range(0..endpoints.len())];
            if !targets.contains(&pick) {
                targets.push(pick);
            }
        }
        for &t in &targets {
            edges.push((t, v));
            endpoints.extend([t, v]);
        }
    }
    Graph::new(n, edges)
}

/// Normalized betweenness centrality (Brandes), scores in `[0, 1]`.
///
/// Each unordered vertex pair contributes the fraction of its shortest paths that pass
/// through a vertex; the sum is divided by the number of pairs not involving the vertex,
/// `(n - 1)(n - 2) / 2`.
pub fn betweenness(graph: &Graph) -> Result<Vec<f64>> {
    let n = graph.node_count();
    if !graph.is_connected() {
        return Err(Error::Disconnected);
    }
    let mut score = vec![0.0; n];
    if n < 3 {
        return Ok(score);
    }
    let mut stack = Vec::with_capacity(n);
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut sigma = vec![0.0f64; n];
    let mut dist = vec![usize::MAX; n];
    let mut delta = vec![0.0f64; n];
    let mut queue = VecDeque::with_capacity(n);
    for s in 0..n {
        stack.clear();
        for p in &mut preds {
            p.clear();
        }
        sigma.fill(0.0);
        dist.fill(usize::MAX);
        delta.fill(0.0);
        sigma[s] = 1.0;
        dist[s] = 0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            stack.push(v);
            for &w in graph.neighbors(v) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    preds[w].push(v);
                }
            }
        }
        while let Some(w) = stack.pop() {
            for &v in &preds[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                score[w] += delta[w];
            }
        }
    }
    // every unordered pair was counted from both ends
    let norm = ((n - 1) * (n - 2)) as f64;
    for x in &mut score {
        *x /= norm;
    }
    Ok(score)
}

/// Cloud = highest betweenness (lowest id on ties), degree-1 = source cluster, rest = Fog.
pub fn assign_roles(graph: &Graph, scores: &[f64]) -> Result<Vec<Role>> {
    let n = graph.node_count();
    if scores.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: scores.len(),
        });
    }
    let mut cloud = 0;
    for (v, &s) in scores.iter().enumerate() {
        if s > scores[cloud] {
            cloud = v;
        }
    }
    let roles: Vec<Role> = (0..n)
        .map(|v| {
            if v == cloud {
                Role::Cloud
            } else if graph.degree(v) == 1 {
                Role::SourceCluster
            } else {
                Role::Fog
            }
        })
        .collect();
    let fog = roles.iter().filter(|r| **r == Role::Fog).count();
    if fog < 2 {
        return Err(Error::TopologyTooSmall(format!(
            "{fog} Fog node(s) after role assignment, need at least 2"
        )));
    }
    Ok(roles)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub id: NodeId,
    pub role: Role,
    /// Instructions per simulated time unit.
    pub ipt: f64,
    /// Bytes. Recorded for reporting, never bounds a queue.
    pub ram: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkSpec {
    pub endpoints: (NodeId, NodeId),
    /// Bytes per simulated time unit.
    pub bw: f64,
    /// Propagation delay in simulated time units.
    pub pr: f64,
}

impl LinkSpec {
    pub fn transit_delay(&self, bytes: f64) -> f64 {
        bytes / self.bw + self.pr
    }

    pub fn other(&self, v: NodeId) -> NodeId {
        if self.endpoints.0 == v {
            self.endpoints.1
        } else {
            self.endpoints.0
        }
    }
}

/// Sampling ranges for node and link resources (inclusive bounds).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResourceRanges {
    pub ipt: (f64, f64),
    pub ram: (u64, u64),
    pub bw: (f64, f64),
    pub pr: (f64, f64),
    /// Cloud IPT is the upper IPT bound times this factor. Jobs never run on the Cloud.
    pub cloud_ipt_factor: f64,
}

impl Default for ResourceRanges {
    fn default() -> Self {
        Self {
            ipt: (100.0, 1000.0),
            ram: (1 << 30, 8 << 30),
            bw: (1000.0, 5000.0),
            pr: (1.0, 5.0),
            cloud_ipt_factor: 10.0,
        }
    }
}

impl ResourceRanges {
    pub fn validate(&self) -> Result<()> {
        let ok = |(lo, hi): (f64, f64)| lo.is_finite() && hi.is_finite() && lo <= hi;
        if !ok(self.ipt) || self.ipt.0 <= 0.0 {
            return Err(Error::invalid(format!("bad ipt range {:?}", self.ipt)));
        }
        if self.ram.0 > self.ram.1 || self.ram.0 == 0 {
            return Err(Error::invalid(format!("bad ram range {:?}", self.ram)));
        }
        if !ok(self.bw) || self.bw.0 <= 0.0 {
            return Err(Error::invalid(format!("bad bw range {:?}", self.bw)));
        }
        if !ok(self.pr) || self.pr.0 < 0.0 {
            return Err(Error::invalid(format!("bad pr range {:?}", self.pr)));
        }
        if !(self.cloud_ipt_factor > 0.0) {
            return Err(Error::invalid("cloud_ipt_factor must be positive"));
        }
        Ok(())
    }
}

fn uniform(rng: &mut SimRng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

/// Deals clusters round-robin over Fog nodes sorted ascending by IPT (lowest id on ties),
/// starting at the weakest node. Returns `(cluster, fog)` pairs.
pub fn deal_clusters(fog: &[(NodeId, f64)], clusters: &[NodeId]) -> Vec<(NodeId, NodeId)> {
    if fog.is_empty() {
        return Vec::new();
    }
    let mut order: Vec<(NodeId, f64)> = fog.to_vec();
    order.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    let mut sorted_clusters = clusters.to_vec();
    sorted_clusters.sort_unstable();
    sorted_clusters
        .into_iter()
        .enumerate()
        .map(|(i, c)| (c, order[i % order.len()].0))
        .collect()
}

/// Samples node and link resources and re-attaches source clusters inversely to Fog IPT.
pub fn attach_resources(
    graph: &Graph,
    roles: &[Role],
    seed: u64,
    ranges: &ResourceRanges,
) -> Result<FogTopology> {
    ranges.validate()?;
    if roles.len() != graph.node_count() {
        return Err(Error::DimensionMismatch {
            expected: graph.node_count(),
            actual: roles.len(),
        });
    }
    let mut rng = rng::seeded(seed);
    let nodes: Vec<NodeSpec> = roles
        .iter()
        .enumerate()
        .map(|(id, &role)| {
            let mut ipt = uniform(&mut rng, ranges.ipt);
            if role == Role::Cloud {
                ipt = ranges.ipt.1 * ranges.cloud_ipt_factor;
            }
            let ram = rng.random_range(ranges.ram.0..=ranges.ram.1);
            NodeSpec { id, role, ipt, ram }
        })
        .collect();

    let fog: Vec<(NodeId, f64)> = nodes
        .iter()
        .filter(|n| n.role == Role::Fog)
        .map(|n| (n.id, n.ipt))
        .collect();
    let clusters: Vec<NodeId> = nodes
        .iter()
        .filter(|n| n.role == Role::SourceCluster)
        .map(|n| n.id)
        .collect();

    let mut edges: Vec<(usize, usize)> = graph
        .edges()
        .iter()
        .copied()
        .filter(|&(a, b)| roles[a] != Role::SourceCluster && roles[b] != Role::SourceCluster)
        .collect();
    for (c, f) in deal_clusters(&fog, &clusters) {
        edges.push((c.min(f), c.max(f)));
    }
    edges.sort_unstable();

    let links = edges
        .into_iter()
        .map(|endpoints| LinkSpec {
            endpoints,
            bw: uniform(&mut rng, ranges.bw),
            pr: uniform(&mut rng, ranges.pr),
        })
        .collect();
    FogTopology::new(nodes, links)
}

/// Parameters for the full generate → score → assign → attach pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TopologyParams {
    pub seed: u64,
    pub nodes: usize,
    pub attachment: usize,
    /// Required number of source clusters; `None` accepts any count.
    pub clusters: Option<usize>,
    /// Required number of Fog nodes; `None` accepts any count (at least 2).
    pub fog: Option<usize>,
    /// Graph seeds tried before giving up when role counts are constrained.
    pub max_attempts: u32,
    pub resources: ResourceRanges,
}

impl Default for TopologyParams {
    fn default() -> Self {
        Self {
            seed: 7,
            nodes: 20,
            attachment: 2,
            clusters: None,
            fog: None,
            max_attempts: 1000,
            resources: ResourceRanges::default(),
        }
    }
}

/// Runs the topology pipeline.
///
/// Attempt 0 grows the graph from `params.seed` itself; later attempts use derived seeds
/// and are only needed when the role assignment fails or misses the requested counts.
pub fn build_topology(params: &TopologyParams) -> Result<FogTopology> {
    params.resources.validate()?;
    let mut last_err = None;
    for attempt in 0..params.max_attempts.max(1) {
        let graph_seed = if attempt == 0 {
            params.seed
        } else {
            rng::derive_seed(params.seed, "topology-retry", u64::from(attempt))
        };
        let graph = generate_graph(graph_seed, params.nodes, params.attachment)?;
        let scores = betweenness(&graph)?;
        let roles = match assign_roles(&graph, &scores) {
            Ok(r) => r,
            Err(e) => {
                last_err = Some(e);
                continue;
            }
        };
        let count = |role| roles.iter().filter(|r| **r == role).count();
        let clusters = count(Role::SourceCluster);
        let fog = count(Role::Fog);
        if params.clusters.is_some_and(|c| c != clusters) || params.fog.is_some_and(|f| f != fog) {
            last_err = Some(Error::TopologyTooSmall(format!(
                "graph seed {graph_seed} gave {clusters} clusters / {fog} Fog nodes"
            )));
            continue;
        }
        let resource_seed = rng::derive_seed(params.seed, "topology-resources", 0);
        return attach_resources(&graph, &roles, resource_seed, &params.resources);
    }
    Err(last_err.unwrap_or_else(|| Error::invalid("no topology attempts made")))
}

/// A validated fog topology. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct FogTopology {
    nodes: Vec<NodeSpec>,
    links: Vec<LinkSpec>,
    /// `(neighbor, link index)` per node, sorted by neighbor id.
    adjacency: Vec<Vec<(NodeId, usize)>>,
    fog: Vec<NodeId>,
    clusters: Vec<NodeId>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TopologyDocument {
    format_version: u32,
    nodes: Vec<NodeSpec>,
    links: Vec<LinkSpec>,
}

impl FogTopology {
    pub fn new(nodes: Vec<NodeSpec>, links: Vec<LinkSpec>) -> Result<Self> {
        let n = nodes.len();
        for (i, node) in nodes.iter().enumerate() {
            if node.id != i {
                return Err(Error::InvalidTopology(format!(
                    "node ids must be 0..{n} in order; found id {} at position {i}",
                    node.id
                )));
            }
            if !(node.ipt > 0.0) || !node.ipt.is_finite() {
                return Err(Error::InvalidTopology(format!(
                    "node {i} has ipt {}",
                    node.ipt
                )));
            }
        }
        let mut adjacency = vec![Vec::new(); n];
        let mut seen = std::collections::HashSet::new();
        for (idx, link) in links.iter().enumerate() {
            let (a, b) = link.endpoints;
            if a >= n || b >= n || a == b {
                return Err(Error::InvalidTopology(format!(
                    "bad link endpoints ({a}, {b})"
                )));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(Error::InvalidTopology(format!("duplicate link ({a}, {b})")));
            }
            if !(link.bw > 0.0) || !link.bw.is_finite() || !(link.pr >= 0.0) || !link.pr.is_finite()
            {
                return Err(Error::InvalidTopology(format!(
                    "link ({a}, {b}) has bw {} pr {}",
                    link.bw, link.pr
                )));
            }
            adjacency[a].push((b, idx));
            adjacency[b].push((a, idx));
        }
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
        }
        let ids = |role| -> Vec<NodeId> {
            nodes
                .iter()
                .filter(|x| x.role == role)
                .map(|x| x.id)
                .collect()
        };
        let clouds = ids(Role::Cloud);
        let fog = ids(Role::Fog);
        let clusters = ids(Role::SourceCluster);
        if clouds.len() != 1 {
            return Err(Error::InvalidTopology(format!(
                "expected exactly one Cloud node, found {}",
                clouds.len()
            )));
        }
        if fog.len() < 2 {
            return Err(Error::InvalidTopology(format!(
                "expected at least 2 Fog nodes, found {}",
                fog.len()
            )));
        }
        for &c in &clusters {
            let nbrs = &adjacency[c];
            if nbrs.len() != 1 || nodes[nbrs[0].0].role != Role::Fog {
                return Err(Error::InvalidTopology(format!(
                    "source cluster {c} must have exactly one Fog neighbor"
                )));
            }
        }
        let topo = Self {
            nodes,
            links,
            adjacency,
            fog,
            clusters,
        };
        let graph = Graph::new(n, topo.links.iter().map(|l| l.endpoints))?;
        if !graph.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(topo)
    }

    pub fn nodes(&self) -> &[NodeSpec] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &NodeSpec {
        &self.nodes[id]
    }

    pub fn links(&self) -> &[LinkSpec] {
        &self.links
    }

    pub fn link(&self, idx: usize) -> &LinkSpec {
        &self.links[idx]
    }

    /// `(neighbor, link index)` pairs sorted by neighbor id.
    pub fn neighbors(&self, id: NodeId) -> &[(NodeId, usize)] {
        &self.adjacency[id]
    }

    /// Fog node ids, ascending. Action `a` of an agent refers to `fog_nodes()[a]`.
    pub fn fog_nodes(&self) -> &[NodeId] {
        &self.fog
    }

    /// Source-cluster ids, ascending. Cluster index `c` refers to `clusters()[c]`.
    pub fn clusters(&self) -> &[NodeId] {
        &self.clusters
    }

    pub fn cloud(&self) -> NodeId {
        self.nodes
            .iter()
            .find(|n| n.role == Role::Cloud)
            .map(|n| n.id)
            .expect("validated topology has a cloud")
    }

    /// Number of clusters attached to a Fog node.
    pub fn cluster_count(&self, fog: NodeId) -> usize {
        self.adjacency[fog]
            .iter()
            .filter(|(v, _)| self.nodes[*v].role == Role::SourceCluster)
            .count()
    }

    pub fn graph(&self) -> Graph {
        Graph::new(self.nodes.len(), self.links.iter().map(|l| l.endpoints))
            .expect("validated topology")
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = TopologyDocument {
            format_version: TOPOLOGY_FORMAT_VERSION,
            nodes: self.nodes.clone(),
            links: self.links.clone(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Probe {
            format_version: u32,
        }
        let probe: Probe = serde_json::from_str(text)?;
        if probe.format_version != TOPOLOGY_FORMAT_VERSION {
            return Err(Error::VersionMismatch {
                found: probe.format_version,
                expected: TOPOLOGY_FORMAT_VERSION,
            });
        }
        let doc: TopologyDocument = serde_json::from_str(text)?;
        Self::new(doc.nodes, doc.links)
    }
}
