//! Mesh topology model, random-geometric generator and path utilities.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};
use std::fmt;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

/// Highest 2.4 GHz channel number.
pub const MAX_CHANNEL: u8 = 11;

/// Default ceiling on the number of paths [`enumerate_simple_paths`] may produce.
pub const DEFAULT_PATH_CAP: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<usize> for NodeId {
    fn from(i: usize) -> Self {
        NodeId(i)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub x: f64,
    pub y: f64,
    pub radios: Vec<u8>,
}

impl Node {
    pub fn distance(&self, other: &Node) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// An undirected radio link with its QoS weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub u: NodeId,
    pub v: NodeId,
    pub channel: u8,
    pub cost: f64,
    /// Mbps.
    pub bandwidth: f64,
    /// Milliseconds.
    pub delay: f64,
    /// Milliseconds.
    pub jitter: f64,
    pub loss: f64,
    pub ifactor: f64,
    /// Set on links added to reconnect the graph; these may exceed the
    /// transmission range.
    #[serde(default)]
    pub synthetic: bool,
}

impl Link {
    /// The endpoint opposite `n`.
    pub fn other(&self, n: NodeId) -> NodeId {
        if self.u == n {
            self.v
        } else {
            self.u
        }
    }

    pub fn touches(&self, n: NodeId) -> bool {
        self.u == n || self.v == n
    }
}

/// Normalised interference between two links as a function of their channel
/// separation. Entry `k` is the factor at separation `k`; separations past the
/// end of the table are treated as orthogonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterferenceTable {
    pub factors: Vec<f64>,
}

impl Default for InterferenceTable {
    fn default() -> Self {
        InterferenceTable {
            factors: vec![1.0, 0.7, 0.4, 0.2, 0.1],
        }
    }
}

impl InterferenceTable {
    pub fn factor(&self, channel_separation: u32) -> f64 {
        self.factors
            .get(channel_separation as usize)
            .copied()
            .unwrap_or(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.factors.iter().any(|f| !(0.0..=1.0).contains(f)) {
            return Err(Error::InvalidParams(
                "interference factors must lie in [0, 1]".into(),
            ));
        }
        if self.factors.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidParams(
                "interference factors must be non-increasing in channel separation".into(),
            ));
        }
        Ok(())
    }
}

/// Interference factor under the default partially-overlapping-channel table.
pub fn interference_factor(channel_separation: u32) -> f64 {
    InterferenceTable::default().factor(channel_separation)
}

/// Weighted, undirected mesh graph. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TopologyDoc", into = "TopologyDoc")]
pub struct MeshTopology {
    nodes: Vec<Node>,
    links: Vec<Link>,
    gateways: Vec<NodeId>,
    range: f64,
    /// Per node: `(neighbor, link index)` sorted by neighbor.
    adjacency: Vec<Vec<(NodeId, usize)>>,
    max_cost: f64,
}

#[derive(Serialize, Deserialize)]
struct TopologyDoc {
    nodes: Vec<Node>,
    links: Vec<Link>,
    gateways: Vec<NodeId>,
    range: f64,
}

impl TryFrom<TopologyDoc> for MeshTopology {
    type Error = Error;

    fn try_from(doc: TopologyDoc) -> Result<Self> {
        MeshTopology::new(doc.nodes, doc.links, doc.gateways, doc.range)
    }
}

impl From<MeshTopology> for TopologyDoc {
    fn from(t: MeshTopology) -> Self {
        TopologyDoc {
            nodes: t.nodes,
            links: t.links,
            gateways: t.gateways,
            range: t.range,
        }
    }
}

impl MeshTopology {
    /// Builds a topology, checking every structural invariant except
    /// connectivity (hand-built graphs may be disconnected).
    pub fn new(
        nodes: Vec<Node>,
        links: Vec<Link>,
        mut gateways: Vec<NodeId>,
        range: f64,
    ) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidTopology(m));
        if nodes.is_empty() {
            return bad("topology has no nodes".into());
        }
        if !(range > 0.0) {
            return bad(format!("transmission range must be positive, got {range}"));
        }
        for (i, n) in nodes.iter().enumerate() {
            if n.id.0 != i {
                return bad(format!("node ids must be dense: position {i} holds id {}", n.id));
            }
            if n.radios.is_empty() {
                return bad(format!("node {i} has no radio"));
            }
            if n.radios.iter().any(|&c| c == 0 || c > MAX_CHANNEL) {
                return bad(format!("node {i} has a channel outside 1..={MAX_CHANNEL}"));
            }
        }
        let n = nodes.len();
        let mut adjacency: Vec<Vec<(NodeId, usize)>> = vec![Vec::new(); n];
        let mut seen = HashSet::new();
        for (idx, l) in links.iter().enumerate() {
            if l.u.0 >= n || l.v.0 >= n {
                return bad(format!("link {idx} references a missing node"));
            }
            if l.u == l.v {
                return bad(format!("link {idx} is a self-loop on node {}", l.u));
            }
            if !seen.insert((l.u.min(l.v), l.u.max(l.v))) {
                return bad(format!("duplicate link between {} and {}", l.u, l.v));
            }
            if l.channel == 0 || l.channel > MAX_CHANNEL {
                return bad(format!("link {idx} channel {} outside 1..={MAX_CHANNEL}", l.channel));
            }
            let weights_ok = l.cost > 0.0
                && l.bandwidth > 0.0
                && l.delay >= 0.0
                && l.jitter >= 0.0
                && (0.0..=1.0).contains(&l.loss)
                && (0.0..=1.0).contains(&l.ifactor);
            if !weights_ok {
                return bad(format!("link {}-{} has out-of-range weights", l.u, l.v));
            }
            if !l.synthetic {
                let d = nodes[l.u.0].distance(&nodes[l.v.0]);
                if d > range * (1.0 + 1e-12) {
                    return bad(format!(
                        "link {}-{} spans {d:.3} m, beyond the {range} m range",
                        l.u, l.v
                    ));
                }
            }
            adjacency[l.u.0].push((l.v, idx));
            adjacency[l.v.0].push((l.u, idx));
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
        }
        gateways.sort_unstable();
        gateways.dedup();
        if gateways.is_empty() {
            return bad("at least one gateway is required".into());
        }
        if let Some(g) = gateways.iter().find(|g| g.0 >= n) {
            return bad(format!("gateway {g} is not a node"));
        }
        let max_cost = links.iter().map(|l| l.cost).fold(0.0, f64::max);
        Ok(MeshTopology {
            nodes,
            links,
            gateways,
            range,
            adjacency,
            max_cost,
        })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn gateways(&self) -> &[NodeId] {
        &self.gateways
    }

    pub fn range(&self) -> f64 {
        self.range
    }

    pub fn max_link_cost(&self) -> f64 {
        self.max_cost
    }

    pub fn contains(&self, n: NodeId) -> bool {
        n.0 < self.nodes.len()
    }

    pub fn is_gateway(&self, n: NodeId) -> bool {
        self.gateways.binary_search(&n).is_ok()
    }

    /// Neighbors of `n` in ascending id order, paired with the connecting link.
    pub fn neighbors(&self, n: NodeId) -> impl Iterator<Item = (NodeId, &Link)> + '_ {
        self.adjacency[n.0]
            .iter()
            .map(move |&(m, idx)| (m, &self.links[idx]))
    }

    pub fn degree(&self, n: NodeId) -> usize {
        self.adjacency[n.0].len()
    }

    pub fn link_between(&self, a: NodeId, b: NodeId) -> Option<&Link> {
        let adj = self.adjacency.get(a.0)?;
        adj.binary_search_by_key(&b, |&(m, _)| m)
            .ok()
            .map(|pos| &self.links[adj[pos].1])
    }

    pub fn are_adjacent(&self, a: NodeId, b: NodeId) -> bool {
        self.link_between(a, b).is_some()
    }

    pub fn is_connected(&self) -> bool {
        let n = self.nodes.len();
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &(v, _) in &self.adjacency[u] {
                if !seen[v.0] {
                    seen[v.0] = true;
                    count += 1;
                    stack.push(v.0);
                }
            }
        }
        count == n
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("topology serialization is infallible")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidTopology(e.to_string()))
    }
}

/// Per-link weights for hand-built topologies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkWeights {
    pub channel: u8,
    pub cost: f64,
    pub bandwidth: f64,
    pub delay: f64,
    pub jitter: f64,
    pub loss: f64,
    pub ifactor: f64,
}

impl Default for LinkWeights {
    fn default() -> Self {
        LinkWeights {
            channel: 1,
            cost: 1.0,
            bandwidth: 11.0,
            delay: 1.0,
            jitter: 0.5,
            loss: 0.0,
            ifactor: 0.0,
        }
    }
}

impl LinkWeights {
    pub fn cost(cost: f64) -> Self {
        LinkWeights {
            cost,
            ..Default::default()
        }
    }
}

/// Assembles a topology by hand. Every node sits at the origin with a single
/// radio on channel 1, so range checks always pass.
#[derive(Debug, Clone)]
pub struct TopologyBuilder {
    node_count: usize,
    links: Vec<Link>,
    gateways: Vec<NodeId>,
}

impl TopologyBuilder {
    pub fn new(node_count: usize) -> Self {
        TopologyBuilder {
            node_count,
            links: Vec::new(),
            gateways: Vec::new(),
        }
    }

    pub fn link(self, u: usize, v: usize, cost: f64) -> Self {
        self.link_with(u, v, LinkWeights::cost(cost))
    }

    pub fn link_with(mut self, u: usize, v: usize, w: LinkWeights) -> Self {
        self.links.push(Link {
            u: NodeId(u),
            v: NodeId(v),
            channel: w.channel,
            cost: w.cost,
            bandwidth: w.bandwidth,
            delay: w.delay,
            jitter: w.jitter,
            loss: w.loss,
            ifactor: w.ifactor,
            synthetic: false,
        });
        self
    }

    pub fn gateways(mut self, gws: &[usize]) -> Self {
        self.gateways = gws.iter().map(|&g| NodeId(g)).collect();
        self
    }

    pub fn build(self) -> Result<MeshTopology> {
        let nodes = (0..self.node_count)
            .map(|i| Node {
                id: NodeId(i),
                x: 0.0,
                y: 0.0,
                radios: vec![1],
            })
            .collect();
        MeshTopology::new(nodes, self.links, self.gateways, 250.0)
    }
}

/// Inputs to [`generate_topology`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TopologyParams {
    pub node_count: usize,
    /// Deployment area (width, height) in metres. `None` picks a square of
    /// side `1000 * sqrt(node_count / 25)`.
    pub area: Option<(f64, f64)>,
    pub transmission_range: f64,
    pub cost_range: (f64, f64),
    pub bandwidth: f64,
    pub delay_range: (f64, f64),
    pub jitter_range: (f64, f64),
    pub loss_range: (f64, f64),
    pub gateway_count: usize,
    pub radios_per_node: usize,
    pub interference: InterferenceTable,
    pub ifactor_aggregate: IfactorAggregate,
    pub seed: u64,
}

/// How a link's interference factor combines the overlaps with the links
/// sharing one of its endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum IfactorAggregate {
    /// Worst overlap with any adjacent link.
    Max,
    /// Mean overlap over adjacent links.
    #[default]
    Mean,
}

impl Default for TopologyParams {
    fn default() -> Self {
        TopologyParams {
            node_count: 25,
            area: None,
            transmission_range: 250.0,
            cost_range: (2.0, 10.0),
            bandwidth: 11.0,
            delay_range: (0.5, 2.0),
            jitter_range: (0.5, 2.0),
            loss_range: (0.001, 0.10),
            gateway_count: 3,
            radios_per_node: 2,
            interference: InterferenceTable::default(),
            ifactor_aggregate: IfactorAggregate::default(),
            seed: 0,
        }
    }
}

impl TopologyParams {
    pub fn new(node_count: usize, seed: u64) -> Self {
        TopologyParams {
            node_count,
            seed,
            ..Default::default()
        }
    }

    pub fn area_dims(&self) -> (f64, f64) {
        self.area.unwrap_or_else(|| {
            let side = 1000.0 * (self.node_count as f64 / 25.0).sqrt();
            (side, side)
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if self.node_count < 2 {
            return bad(format!("node_count must be at least 2, got {}", self.node_count));
        }
        let (w, h) = self.area_dims();
        if !(w > 0.0 && h > 0.0) || !w.is_finite() || !h.is_finite() {
            return bad(format!("degenerate deployment area {w} x {h}"));
        }
        if !(self.transmission_range > 0.0) {
            return bad("transmission_range must be positive".into());
        }
        if self.gateway_count == 0 || self.gateway_count >= self.node_count {
            return bad(format!(
                "gateway_count must be in 1..{}, got {}",
                self.node_count, self.gateway_count
            ));
        }
        if self.radios_per_node == 0 || self.radios_per_node > MAX_CHANNEL as usize {
            return bad(format!("radios_per_node must be in 1..={MAX_CHANNEL}"));
        }
        if !(self.bandwidth > 0.0) {
            return bad("bandwidth must be positive".into());
        }
        let ranges = [
            ("cost_range", self.cost_range, 0.0, f64::INFINITY, true),
            ("delay_range", self.delay_range, 0.0, f64::INFINITY, false),
            ("jitter_range", self.jitter_range, 0.0, f64::INFINITY, false),
            ("loss_range", self.loss_range, 0.0, 1.0, false),
        ];
        for (name, (lo, hi), min, max, strict) in ranges {
            let lo_ok = if strict { lo > min } else { lo >= min };
            if !(lo_ok && lo <= hi && hi <= max) {
                return bad(format!("{name} [{lo}, {hi}] is invalid"));
            }
        }
        self.interference.validate()
    }
}

fn uniform<R: Rng>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

/// Random-geometric mesh generator. Deterministic in `params` (seed included).
pub fn generate_topology(params: &TopologyParams) -> Result<MeshTopology> {
    params.validate()?;
    let mut rng = seed::rng(params.seed);
    let (w, h) = params.area_dims();
    let positions: Vec<(f64, f64)> = (0..params.node_count)
        .map(|_| (rng.random_range(0.0..w), rng.random_range(0.0..h)))
        .collect();
    build_from_positions(params, &positions, &mut rng)
}

/// Same as [`generate_topology`] but with caller-chosen node positions.
pub fn generate_with_positions(
    params: &TopologyParams,
    positions: &[(f64, f64)],
) -> Result<MeshTopology> {
    params.validate()?;
    if positions.len() != params.node_count {
        return Err(Error::InvalidParams(format!(
            "{} positions given for {} nodes",
            positions.len(),
            params.node_count
        )));
    }
    let mut rng = seed::rng(params.seed);
    build_from_positions(params, positions, &mut rng)
}

fn build_from_positions<R: Rng>(
    params: &TopologyParams,
    positions: &[(f64, f64)],
    rng: &mut R,
) -> Result<MeshTopology> {
    let n = positions.len();
    let nodes: Vec<Node> = positions
        .iter()
        .enumerate()
        .map(|(i, &(x, y))| {
            let mut radios: Vec<u8> = index::sample(rng, MAX_CHANNEL as usize, params.radios_per_node)
                .into_iter()
                .map(|c| c as u8 + 1)
                .collect();
            radios.sort_unstable();
            Node {
                id: NodeId(i),
                x,
                y,
                radios,
            }
        })
        .collect();

    let mut links = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if nodes[i].distance(&nodes[j]) <= params.transmission_range {
                links.push(random_link(params, &nodes[i], &nodes[j], false, rng));
            }
        }
    }

    // Stitch components together through their nearest node pairs.
    let mut comp = DisjointSet::new(n);
    for l in &links {
        comp.union(l.u.0, l.v.0);
    }
    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..n {
            for j in (i + 1)..n {
                if comp.find(i) != comp.find(j) {
                    let d = nodes[i].distance(&nodes[j]);
                    if best.is_none_or(|(bd, _, _)| d < bd) {
                        best = Some((d, i, j));
                    }
                }
            }
        }
        let Some((_, i, j)) = best else { break };
        links.push(random_link(params, &nodes[i], &nodes[j], true, rng));
        comp.union(i, j);
    }

    assign_ifactors(&mut links, n, &params.interference, params.ifactor_aggregate);

    let gateways = index::sample(rng, n, params.gateway_count)
        .into_iter()
        .map(NodeId)
        .collect();
    MeshTopology::new(nodes, links, gateways, params.transmission_range)
}

fn random_link<R: Rng>(
    params: &TopologyParams,
    a: &Node,
    b: &Node,
    synthetic: bool,
    rng: &mut R,
) -> Link {
    let shared: Vec<u8> = a
        .radios
        .iter()
        .copied()
        .filter(|c| b.radios.contains(c))
        .collect();
    // Without a common radio the link takes any channel either endpoint has.
    let pool = if shared.is_empty() {
        let mut all: Vec<u8> = a.radios.iter().chain(&b.radios).copied().collect();
        all.sort_unstable();
        all.dedup();
        all
    } else {
        shared
    };
    let channel = pool[rng.random_range(0..pool.len())];
    Link {
        u: a.id,
        v: b.id,
        channel,
        cost: uniform(rng, params.cost_range),
        bandwidth: params.bandwidth,
        delay: uniform(rng, params.delay_range),
        jitter: uniform(rng, params.jitter_range),
        loss: uniform(rng, params.loss_range),
        ifactor: 0.0,
        synthetic,
    }
}

/// Overlap with the links sharing an endpoint, aggregated per `how`; isolated
/// links get 0.
fn assign_ifactors(
    links: &mut [Link],
    node_count: usize,
    table: &InterferenceTable,
    how: IfactorAggregate,
) {
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); node_count];
    for (i, l) in links.iter().enumerate() {
        incident[l.u.0].push(i);
        incident[l.v.0].push(i);
    }
    let factors: Vec<f64> = links
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let overlaps = incident[l.u.0]
                .iter()
                .chain(&incident[l.v.0])
                .filter(|&&k| k != i)
                .map(|&k| table.factor(l.channel.abs_diff(links[k].channel) as u32));
            match how {
                IfactorAggregate::Max => overlaps.fold(0.0, f64::max),
                IfactorAggregate::Mean => {
                    let (sum, count) = overlaps.fold((0.0, 0usize), |(s, c), f| (s + f, c + 1));
                    if count == 0 {
                        0.0
                    } else {
                        sum / count as f64
                    }
                }
            }
        })
        .collect();
    for (l, f) in links.iter_mut().zip(factors) {
        l.ifactor = f;
    }
}

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

#[derive(Copy, Clone, PartialEq)]
struct HeapEntry {
    cost: f64,
    node: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source shortest-path tree over link costs.
#[derive(Debug, Clone)]
pub struct ShortestPaths {
    source: NodeId,
    dist: Vec<f64>,
    prev: Vec<Option<NodeId>>,
}

impl ShortestPaths {
    /// Dijkstra from `source`, never entering nodes flagged in `blocked`.
    pub fn compute(topo: &MeshTopology, source: NodeId, blocked: Option<&[bool]>) -> Self {
        let n = topo.node_count();
        let mut dist = vec![f64::INFINITY; n];
        let mut prev = vec![None; n];
        let mut heap = BinaryHeap::new();
        dist[source.0] = 0.0;
        heap.push(HeapEntry {
            cost: 0.0,
            node: source.0,
        });
        while let Some(HeapEntry { cost, node }) = heap.pop() {
            if cost > dist[node] {
                continue;
            }
            for (m, link) in topo.neighbors(NodeId(node)) {
                if blocked.is_some_and(|b| b[m.0]) {
                    continue;
                }
                let next = cost + link.cost;
                if next < dist[m.0] {
                    dist[m.0] = next;
                    prev[m.0] = Some(NodeId(node));
                    heap.push(HeapEntry {
                        cost: next,
                        node: m.0,
                    });
                }
            }
        }
        ShortestPaths { source, dist, prev }
    }

    pub fn source(&self) -> NodeId {
        self.source
    }

    pub fn cost_to(&self, target: NodeId) -> Option<f64> {
        let d = *self.dist.get(target.0)?;
        d.is_finite().then_some(d)
    }

    pub fn path_to(&self, target: NodeId) -> Option<Vec<NodeId>> {
        self.cost_to(target)?;
        let mut path = vec![target];
        let mut cur = target;
        while let Some(p) = self.prev[cur.0] {
            path.push(p);
            cur = p;
        }
        path.reverse();
        Some(path)
    }
}

/// Minimum total link cost from `from` to `to`; `Ok(None)` when unreachable.
pub fn shortest_path_cost(topo: &MeshTopology, from: NodeId, to: NodeId) -> Result<Option<f64>> {
    for n in [from, to] {
        if !topo.contains(n) {
            return Err(Error::UnknownNode(n));
        }
    }
    Ok(ShortestPaths::compute(topo, from, None).cost_to(to))
}

/// Minimum-cost node sequence from `from` to `to`.
pub fn shortest_path(topo: &MeshTopology, from: NodeId, to: NodeId) -> Option<Vec<NodeId>> {
    if !topo.contains(from) || !topo.contains(to) {
        return None;
    }
    ShortestPaths::compute(topo, from, None).path_to(to)
}

/// True iff `path` is non-empty, simple, uses only existing links and, when
/// `require_gateway` is set, ends at a gateway.
pub fn validate_path(topo: &MeshTopology, path: &[NodeId], require_gateway: bool) -> bool {
    is_simple_walk(topo, path)
        && (!require_gateway || path.last().is_some_and(|&g| topo.is_gateway(g)))
}

/// Uniformly random non-gateway node, deterministic in `seed`. `None` when
/// every node is a gateway.
pub fn pick_source(topo: &MeshTopology, seed: u64) -> Option<NodeId> {
    let candidates: Vec<NodeId> = (0..topo.node_count())
        .map(NodeId)
        .filter(|&n| !topo.is_gateway(n))
        .collect();
    if candidates.is_empty() {
        return None;
    }
    let mut rng = seed::rng(seed);
    Some(candidates[rng.random_range(0..candidates.len())])
}

pub(crate) fn is_simple_walk(topo: &MeshTopology, path: &[NodeId]) -> bool {
    if path.is_empty() || path.iter().any(|&n| !topo.contains(n)) {
        return false;
    }
    let mut seen = vec![false; topo.node_count()];
    for &n in path {
        if std::mem::replace(&mut seen[n.0], true) {
            return false;
        }
    }
    path.windows(2).all(|w| topo.are_adjacent(w[0], w[1]))
}

/// Visits every simple path from `source` that ends in `destinations` and uses
/// at most `max_hops` links, in lexicographic order of node sequence. Returns
/// the number of paths visited.
pub fn for_each_simple_path<F>(
    topo: &MeshTopology,
    source: NodeId,
    destinations: &[NodeId],
    max_hops: usize,
    cap: usize,
    mut visit: F,
) -> Result<usize>
where
    F: FnMut(&[NodeId]),
{
    if !topo.contains(source) {
        return Err(Error::UnknownNode(source));
    }
    if destinations.is_empty() {
        return Err(Error::InvalidParams("destination set is empty".into()));
    }
    if let Some(&d) = destinations.iter().find(|d| !topo.contains(**d)) {
        return Err(Error::UnknownNode(d));
    }
    if max_hops == 0 {
        return Err(Error::InvalidParams("max_hops must be at least 1".into()));
    }
    let n = topo.node_count();
    let mut is_dest = vec![false; n];
    for d in destinations {
        is_dest[d.0] = true;
    }
    let mut on_path = vec![false; n];
    let mut path = vec![source];
    on_path[source.0] = true;
    // Stack of neighbor cursors for the nodes on the current path.
    let mut cursors: Vec<usize> = vec![0];
    let mut count = 0usize;

    if is_dest[source.0] {
        count += 1;
        visit(&path);
    }
    while let Some(cursor) = cursors.last_mut() {
        let tip = *path.last().expect("path tracks cursors");
        let adj = &topo.adjacency[tip.0];
        let next = (path.len() <= max_hops)
            .then(|| {
                while *cursor < adj.len() && on_path[adj[*cursor].0 .0] {
                    *cursor += 1;
                }
                adj.get(*cursor).map(|&(m, _)| m)
            })
            .flatten();
        match next {
            Some(m) => {
                *cursor += 1;
                path.push(m);
                on_path[m.0] = true;
                cursors.push(0);
                if is_dest[m.0] {
                    count += 1;
                    if count > cap {
                        return Err(Error::PathCapExceeded { cap });
                    }
                    visit(&path);
                }
            }
            None => {
                cursors.pop();
                let last = path.pop().expect("non-empty");
                on_path[last.0] = false;
            }
        }
    }
    Ok(count)
}

/// Collects every simple path from `source` to any of `destinations` with at
/// most `max_hops` links, lexicographically ordered.
pub fn enumerate_simple_paths(
    topo: &MeshTopology,
    source: NodeId,
    destinations: &[NodeId],
    max_hops: usize,
    cap: usize,
) -> Result<Vec<Vec<NodeId>>> {
    let mut out = Vec::new();
    for_each_simple_path(topo, source, destinations, max_hops, cap, |p| {
        out.push(p.to_vec())
    })?;
    Ok(out)
}
