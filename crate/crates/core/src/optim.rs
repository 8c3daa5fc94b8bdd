//! Discrete path-domain swarm solvers.
//!
//! A particle is a loop-free node sequence from the source to a gateway. Three
//! drivers share the same operators:
//!
//! * `Hybrid` keeps an elite set, moves a breed-ratio share of the remaining
//!   particles with the ⊕ position update and recombines the rest with
//!   two-point crossover plus mutation.
//! * `Pso` applies the ⊕ update to every non-elite particle.
//! * `Ga` refills the non-elite slots by tournament selection, crossover and
//!   mutation.
//!
//! Every operator output goes through [`repair_path`], so particles are always
//! valid routes.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{MeshTopology, NodeId, ShortestPaths};
use crate::qos::{Evaluator, FitnessBreakdown, PenaltyCoeffs, QosRequest};
use crate::seed;

/// Random-walk restarts before falling back to the min-cost route.
const MAX_WALK_RETRIES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Pso,
    Ga,
    Hybrid,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Pso, Algorithm::Ga, Algorithm::Hybrid];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Pso => "pso",
            Algorithm::Ga => "ga",
            Algorithm::Hybrid => "hybrid",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pso" => Ok(Algorithm::Pso),
            "ga" => Ok(Algorithm::Ga),
            "hybrid" => Ok(Algorithm::Hybrid),
            other => Err(Error::InvalidConfig(format!("unknown algorithm '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HybridConfig {
    pub swarm_size: usize,
    pub max_iterations: usize,
    pub c1: f64,
    pub c2: f64,
    pub breed_ratio: f64,
    pub mutation_rate: f64,
    pub stagnation_window: usize,
    /// Share of the swarm carried over unchanged each generation (rounded up).
    pub elite_fraction: f64,
    pub seed: u64,
    pub algorithm: Algorithm,
}

impl Default for HybridConfig {
    fn default() -> Self {
        HybridConfig {
            swarm_size: 30,
            max_iterations: 100,
            c1: 1.5,
            c2: 1.5,
            breed_ratio: 0.5,
            mutation_rate: 0.05,
            stagnation_window: 15,
            elite_fraction: 0.1,
            seed: 0,
            algorithm: Algorithm::Hybrid,
        }
    }
}

impl HybridConfig {
    pub fn new(algorithm: Algorithm, seed: u64) -> Self {
        HybridConfig {
            algorithm,
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.swarm_size < 2 {
            return bad("swarm_size must be at least 2");
        }
        if self.max_iterations < 1 {
            return bad("max_iterations must be at least 1");
        }
        if !(0.0..=2.0).contains(&self.c1) || !(0.0..=2.0).contains(&self.c2) {
            return bad("c1 and c2 must lie in [0, 2]");
        }
        if !(0.0..=1.0).contains(&self.breed_ratio) {
            return bad("breed_ratio must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return bad("mutation_rate must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.elite_fraction) {
            return bad("elite_fraction must lie in [0, 1]");
        }
        if self.stagnation_window < 1 {
            return bad("stagnation_window must be at least 1");
        }
        Ok(())
    }

    pub fn elite_count(&self) -> usize {
        let raw = self.elite_fraction * self.swarm_size as f64;
        ((raw - 1e-9).ceil().max(0.0) as usize).min(self.swarm_size)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Particle {
    pub path: Vec<NodeId>,
    pub fitness: FitnessBreakdown,
    pub pbest_path: Vec<NodeId>,
    pub pbest_fitness: FitnessBreakdown,
}

impl Particle {
    fn fresh(path: Vec<NodeId>, fitness: FitnessBreakdown) -> Self {
        Particle {
            pbest_path: path.clone(),
            pbest_fitness: fitness,
            path,
            fitness,
        }
    }

    fn moved_to(&mut self, path: Vec<NodeId>, fitness: FitnessBreakdown) {
        if fitness.total < self.pbest_fitness.total {
            self.pbest_path = path.clone();
            self.pbest_fitness = fitness;
        }
        self.path = path;
        self.fitness = fitness;
    }
}

/// How many times each operator fired during a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct OperatorCounts {
    pub oplus: usize,
    pub crossover: usize,
    pub mutation: usize,
    pub tournament: usize,
    pub dedupe_replacements: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub best_path: Vec<NodeId>,
    pub best_fitness: FitnessBreakdown,
    /// Best-so-far F per iteration.
    pub fitness_trace: Vec<f64>,
    /// Best-so-far route per iteration.
    pub path_trace: Vec<Vec<NodeId>>,
    pub iterations_executed: usize,
    /// 1-based iteration at which the final best was first reached.
    pub iterations_to_best: usize,
    pub wall_time_ms: f64,
    /// Wall-clock time from the start of the run to the last improvement.
    pub time_to_best_ms: f64,
    pub operators: OperatorCounts,
}

impl RunResult {
    /// Equality ignoring the wall-clock fields.
    pub fn same_outcome(&self, other: &RunResult) -> bool {
        let strip = |r: &RunResult| RunResult {
            wall_time_ms: 0.0,
            time_to_best_ms: 0.0,
            ..r.clone()
        };
        strip(self) == strip(other)
    }
}

/// A routing instance: topology, endpoints, QoS request and the shortest-path
/// tables every operator relies on.
#[derive(Debug, Clone)]
pub struct RouteProblem<'a> {
    eval: Evaluator<'a>,
    source: NodeId,
    gateways: Vec<NodeId>,
    is_gateway: Vec<bool>,
    /// `paths[u]` is the shortest-path tree rooted at `u`.
    paths: Vec<ShortestPaths>,
}

impl<'a> RouteProblem<'a> {
    pub fn new(
        topo: &'a MeshTopology,
        source: NodeId,
        gateways: &[NodeId],
        req: &QosRequest,
        coeffs: &PenaltyCoeffs,
    ) -> Result<Self> {
        req.validate()?;
        coeffs.validate()?;
        if !topo.contains(source) {
            return Err(Error::UnknownNode(source));
        }
        if gateways.is_empty() {
            return Err(Error::InvalidConfig("gateway set is empty".into()));
        }
        if let Some(&g) = gateways.iter().find(|g| !topo.contains(**g)) {
            return Err(Error::UnknownNode(g));
        }
        let mut is_gateway = vec![false; topo.node_count()];
        for g in gateways {
            is_gateway[g.0] = true;
        }
        let paths: Vec<ShortestPaths> = (0..topo.node_count())
            .map(|u| ShortestPaths::compute(topo, NodeId(u), None))
            .collect();
        if gateways.iter().all(|&g| paths[source.0].cost_to(g).is_none()) {
            return Err(Error::Unreachable(source));
        }
        let mut gateways = gateways.to_vec();
        gateways.sort_unstable();
        gateways.dedup();
        Ok(RouteProblem {
            eval: Evaluator::new(topo, *req, *coeffs),
            source,
            gateways,
            is_gateway,
            paths,
        })
    }

    pub fn topology(&self) -> &'a MeshTopology {
        self.eval.topology()
    }

    pub fn source(&self) -> NodeId {
        self.source
    }

    pub fn gateways(&self) -> &[NodeId] {
        &self.gateways
    }

    pub fn is_gateway(&self, n: NodeId) -> bool {
        self.is_gateway.get(n.0).copied().unwrap_or(false)
    }

    pub fn evaluator(&self) -> &Evaluator<'a> {
        &self.eval
    }

    pub fn evaluate(&self, path: &[NodeId]) -> FitnessBreakdown {
        self.eval.evaluate(path)
    }

    /// Shortest-path tree rooted at the source.
    pub fn from_source(&self) -> &ShortestPaths {
        &self.paths[self.source.0]
    }

    fn stitch(&self, from: NodeId, to: NodeId) -> Option<Vec<NodeId>> {
        self.paths[from.0].path_to(to)
    }

    /// Cheapest gateway reachable from `from` (lowest id on ties).
    fn nearest_gateway(&self, from: NodeId) -> Option<NodeId> {
        let tree = &self.paths[from.0];
        self.gateways
            .iter()
            .filter_map(|&g| tree.cost_to(g).map(|c| (c, g)))
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
            .map(|(_, g)| g)
    }

    /// Min-cost route from the source to its cheapest gateway.
    pub fn greedy_route(&self) -> Vec<NodeId> {
        let g = self
            .nearest_gateway(self.source)
            .expect("reachability checked on construction");
        self.stitch(self.source, g).expect("gateway is reachable")
    }
}

/// Picks whichever node is cheaper to reach from the source; `a` wins ties.
pub fn alter(a: NodeId, b: NodeId, from_source: &ShortestPaths) -> NodeId {
    let cost = |n| from_source.cost_to(n).unwrap_or(f64::INFINITY);
    if cost(b) < cost(a) {
        b
    } else {
        a
    }
}

/// Cuts every loop by keeping the first occurrence of a node and resuming
/// right after its last occurrence. Endpoints are preserved.
pub fn remove_loops(path: &[NodeId]) -> Vec<NodeId> {
    let mut last = std::collections::HashMap::with_capacity(path.len());
    for (i, n) in path.iter().enumerate() {
        last.insert(*n, i);
    }
    let mut out = Vec::with_capacity(path.len());
    let mut i = 0;
    while i < path.len() {
        out.push(path[i]);
        i = last[&path[i]] + 1;
    }
    out
}

/// One ⊕ stage: interior positions shared by both sequences are replaced by
/// `alter(current_k, other_k)` when `eligible` says so. Loops are removed from
/// the result; adjacency is not restored.
pub fn oplus_combine<F>(
    current: &[NodeId],
    other: &[NodeId],
    from_source: &ShortestPaths,
    mut eligible: F,
) -> Vec<NodeId>
where
    F: FnMut() -> bool,
{
    let mut out = current.to_vec();
    let shared = current.len().min(other.len());
    for k in 1..shared.saturating_sub(1) {
        if eligible() {
            out[k] = alter(current[k], other[k], from_source);
        }
    }
    remove_loops(&out)
}

/// ⊕ with every position eligible.
pub fn oplus(current: &[NodeId], other: &[NodeId], from_source: &ShortestPaths) -> Vec<NodeId> {
    oplus_combine(current, other, from_source, || true)
}

/// Discrete position update `x ⊕ c1·r1·pbest ⊕ c2·r2·gbest`. Each stage makes
/// a position eligible with probability `min(1, c·r)`, `r ~ U(0, 1)` drawn once
/// per stage. Falls back to the current path if repair fails.
pub fn oplus_update<R: Rng>(
    particle: &Particle,
    gbest: &[NodeId],
    problem: &RouteProblem<'_>,
    config: &HybridConfig,
    rng: &mut R,
) -> Vec<NodeId> {
    let tree = problem.from_source();
    let p1 = (config.c1 * rng.random::<f64>()).min(1.0);
    let stage = oplus_combine(&particle.path, &particle.pbest_path, tree, || {
        rng.random_bool(p1)
    });
    let p2 = (config.c2 * rng.random::<f64>()).min(1.0);
    let stage = oplus_combine(&stage, gbest, tree, || rng.random_bool(p2));
    repair_path(&stage, problem).unwrap_or_else(|| particle.path.clone())
}

/// `receiver[..a] + donor[a..b] + receiver[b..]`.
pub fn splice(receiver: &[NodeId], donor: &[NodeId], a: usize, b: usize) -> Vec<NodeId> {
    let mut out = Vec::with_capacity(receiver.len() + b.saturating_sub(a));
    out.extend_from_slice(&receiver[..a]);
    out.extend_from_slice(&donor[a..b]);
    out.extend_from_slice(&receiver[b..]);
    out
}

fn cut_pair<R: Rng>(shared_len: usize, rng: &mut R) -> (usize, usize) {
    // Cuts range over 1..=shared_len-1 so both endpoints stay pinned.
    let x = rng.random_range(1..shared_len);
    let y = rng.random_range(1..shared_len);
    (x.min(y), x.max(y))
}

/// Two-point crossover. Each child draws its own cut pair and takes the
/// segment between the cuts from the other parent. Children are repaired;
/// a child that cannot be repaired is replaced by its receiving parent.
pub fn two_point_crossover<R: Rng>(
    p1: &[NodeId],
    p2: &[NodeId],
    problem: &RouteProblem<'_>,
    rng: &mut R,
) -> (Vec<NodeId>, Vec<NodeId>) {
    if p1.len() < 3 || p2.len() < 3 {
        return (p1.to_vec(), p2.to_vec());
    }
    let shared = p1.len().min(p2.len());
    let (a, b) = cut_pair(shared, rng);
    let c1 = splice(p1, p2, a, b);
    let (a, b) = cut_pair(shared, rng);
    let c2 = splice(p2, p1, a, b);
    (
        repair_path(&c1, problem).unwrap_or_else(|| p1.to_vec()),
        repair_path(&c2, problem).unwrap_or_else(|| p2.to_vec()),
    )
}

/// With probability `rate`, drops one interior node and bridges the gap with
/// the cheapest detour around it. Returns the input when no detour exists.
pub fn mutate<R: Rng>(
    path: &[NodeId],
    problem: &RouteProblem<'_>,
    rng: &mut R,
    rate: f64,
) -> Vec<NodeId> {
    if path.len() < 3 || !rng.random_bool(rate) {
        return path.to_vec();
    }
    let topo = problem.topology();
    let k = rng.random_range(1..path.len() - 1);
    let (u, removed, v) = (path[k - 1], path[k], path[k + 1]);

    // Detour that avoids the rest of the route, so the result is simple.
    let mut blocked = vec![false; topo.node_count()];
    for &n in path {
        blocked[n.0] = true;
    }
    blocked[u.0] = false;
    blocked[v.0] = false;
    if let Some(detour) = ShortestPaths::compute(topo, u, Some(&blocked)).path_to(v) {
        let mut out = path[..k - 1].to_vec();
        out.extend(detour);
        out.extend_from_slice(&path[k + 2..]);
        return out;
    }

    // Otherwise only avoid the dropped node and let loop removal shorten.
    let mut blocked = vec![false; topo.node_count()];
    blocked[removed.0] = true;
    if let Some(detour) = ShortestPaths::compute(topo, u, Some(&blocked)).path_to(v) {
        let mut raw = path[..k - 1].to_vec();
        raw.extend(detour);
        raw.extend_from_slice(&path[k + 2..]);
        let out = remove_loops(&raw);
        if !out.contains(&removed) {
            return out;
        }
    }
    path.to_vec()
}

/// Turns an arbitrary node sequence starting at the source into a valid
/// route: gaps are bridged with min-cost subpaths, loops are excised and a
/// min-cost suffix to the nearest gateway is appended if needed. `None` when
/// the sequence references unknown nodes or cannot be bridged.
pub fn repair_path(raw: &[NodeId], problem: &RouteProblem<'_>) -> Option<Vec<NodeId>> {
    let topo = problem.topology();
    if raw.first() != Some(&problem.source()) || raw.iter().any(|&n| !topo.contains(n)) {
        return None;
    }
    let mut stitched = vec![raw[0]];
    for w in raw.windows(2) {
        let (u, v) = (w[0], w[1]);
        if u == v {
            continue;
        }
        if topo.are_adjacent(u, v) {
            stitched.push(v);
        } else {
            let bridge = problem.stitch(u, v)?;
            stitched.extend_from_slice(&bridge[1..]);
        }
    }
    let mut path = remove_loops(&stitched);
    let last = *path.last().expect("non-empty");
    if !problem.is_gateway(last) {
        let g = problem.nearest_gateway(last)?;
        let suffix = problem.stitch(last, g)?;
        path.extend_from_slice(&suffix[1..]);
        path = remove_loops(&path);
    }
    Some(path)
}

/// Loop-free random walk from the source that stops at the first gateway.
/// Dead ends restart the walk; after repeated failures the min-cost route is
/// used instead.
pub fn random_walk<R: Rng>(problem: &RouteProblem<'_>, rng: &mut R) -> Vec<NodeId> {
    let topo = problem.topology();
    let source = problem.source();
    if problem.is_gateway(source) {
        return vec![source];
    }
    let n = topo.node_count();
    let mut visited = vec![false; n];
    for _ in 0..MAX_WALK_RETRIES {
        visited.iter_mut().for_each(|v| *v = false);
        visited[source.0] = true;
        let mut path = vec![source];
        while path.len() <= n {
            let cur = *path.last().expect("non-empty");
            if problem.is_gateway(cur) {
                return path;
            }
            let options: Vec<NodeId> = topo
                .neighbors(cur)
                .map(|(m, _)| m)
                .filter(|m| !visited[m.0])
                .collect();
            if options.is_empty() {
                break;
            }
            let next = options[rng.random_range(0..options.len())];
            visited[next.0] = true;
            path.push(next);
        }
    }
    problem.greedy_route()
}

/// Builds the initial swarm. Hybrid runs seed particle 0 with the min-cost
/// route to the cheapest gateway.
pub fn init_swarm<R: Rng>(
    problem: &RouteProblem<'_>,
    config: &HybridConfig,
    rng: &mut R,
) -> Vec<Particle> {
    (0..config.swarm_size)
        .map(|i| {
            let path = if i == 0 && config.algorithm == Algorithm::Hybrid {
                problem.greedy_route()
            } else {
                random_walk(problem, rng)
            };
            let f = problem.evaluate(&path);
            Particle::fresh(path, f)
        })
        .collect()
}

/// Partition of swarm indices for one generation.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Split {
    pub elite: Vec<usize>,
    pub pso: Vec<usize>,
    pub ga: Vec<usize>,
}

fn rank(swarm: &[Particle]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..swarm.len()).collect();
    order.sort_by(|&a, &b| {
        swarm[a]
            .fitness
            .total
            .total_cmp(&swarm[b].fitness.total)
            .then_with(|| swarm[a].path.cmp(&swarm[b].path))
            .then(a.cmp(&b))
    });
    order
}

/// Elite = best `elite_count` particles. Of the rest,
/// `Z = round((N - N_elite) * breed_ratio)` are drawn at random for the PSO
/// update and the remainder go to crossover.
pub fn elitism_split<R: Rng>(swarm: &[Particle], config: &HybridConfig, rng: &mut R) -> Split {
    let order = rank(swarm);
    let n_elite = config.elite_count().min(swarm.len());
    let elite = order[..n_elite].to_vec();
    let rest = &order[n_elite..];
    let z = breed_count(rest.len(), config.breed_ratio);
    let mut chosen = vec![false; rest.len()];
    for i in index::sample(rng, rest.len(), z) {
        chosen[i] = true;
    }
    let (mut pso, mut ga) = (Vec::new(), Vec::new());
    for (i, &p) in rest.iter().enumerate() {
        if chosen[i] {
            pso.push(p);
        } else {
            ga.push(p);
        }
    }
    Split { elite, pso, ga }
}

/// `round(non_elite * breed_ratio)`.
pub fn breed_count(non_elite: usize, breed_ratio: f64) -> usize {
    ((non_elite as f64 * breed_ratio).round() as usize).min(non_elite)
}

/// Replaces every particle whose path repeats an earlier one with a fresh
/// random-walk particle. Returns the number of replacements.
pub fn dedupe<R: Rng>(swarm: &mut [Particle], problem: &RouteProblem<'_>, rng: &mut R) -> usize {
    // Replacements avoid every path currently in the swarm, not just earlier ones.
    let mut taken: HashSet<Vec<NodeId>> = swarm.iter().map(|p| p.path.clone()).collect();
    let mut kept: HashSet<Vec<NodeId>> = HashSet::with_capacity(swarm.len());
    let mut replaced = 0;
    for p in swarm.iter_mut() {
        if kept.contains(&p.path) {
            let mut path = random_walk(problem, rng);
            for _ in 0..4 {
                if !taken.contains(&path) {
                    break;
                }
                path = random_walk(problem, rng);
            }
            let f = problem.evaluate(&path);
            *p = Particle::fresh(path, f);
            taken.insert(p.path.clone());
            replaced += 1;
        }
        kept.insert(p.path.clone());
    }
    replaced
}

fn tournament<R: Rng>(swarm: &[Particle], rng: &mut R) -> usize {
    let a = rng.random_range(0..swarm.len());
    let b = rng.random_range(0..swarm.len());
    if swarm[b].fitness.total < swarm[a].fitness.total {
        b
    } else {
        a
    }
}

struct Solver<'p, 'a, R> {
    problem: &'p RouteProblem<'a>,
    config: &'p HybridConfig,
    rng: R,
    counts: OperatorCounts,
}

impl<'p, 'a, R: Rng> Solver<'p, 'a, R> {
    fn oplus(&mut self, particle: &Particle, gbest: &[NodeId]) -> Particle {
        self.counts.oplus += 1;
        let path = oplus_update(particle, gbest, self.problem, self.config, &mut self.rng);
        self.moved(particle, path)
    }

    fn moved(&self, particle: &Particle, path: Vec<NodeId>) -> Particle {
        let f = self.problem.evaluate(&path);
        let mut next = particle.clone();
        next.moved_to(path, f);
        next
    }

    fn breed(&mut self, a: &[NodeId], b: &[NodeId]) -> (Vec<NodeId>, Vec<NodeId>) {
        self.counts.crossover += 1;
        let (c1, c2) = two_point_crossover(a, b, self.problem, &mut self.rng);
        self.counts.mutation += 2;
        let rate = self.config.mutation_rate;
        (
            mutate(&c1, self.problem, &mut self.rng, rate),
            mutate(&c2, self.problem, &mut self.rng, rate),
        )
    }

    fn next_generation(&mut self, swarm: &[Particle], gbest: &[NodeId]) -> Vec<Particle> {
        match self.config.algorithm {
            Algorithm::Hybrid => {
                let split = elitism_split(swarm, self.config, &mut self.rng);
                let mut next: Vec<Particle> =
                    split.elite.iter().map(|&i| swarm[i].clone()).collect();
                for &i in &split.pso {
                    let p = self.oplus(&swarm[i], gbest);
                    next.push(p);
                }
                let mut ga = split.ga.clone();
                ga.shuffle(&mut self.rng);
                for pair in ga.chunks(2) {
                    match *pair {
                        [i, j] => {
                            let (c1, c2) = self.breed(&swarm[i].path, &swarm[j].path);
                            next.push(self.moved(&swarm[i], c1));
                            next.push(self.moved(&swarm[j], c2));
                        }
                        [i] => {
                            let mate = self.rng.random_range(0..swarm.len());
                            let (c1, _) = self.breed(&swarm[i].path, &swarm[mate].path);
                            next.push(self.moved(&swarm[i], c1));
                        }
                        _ => unreachable!("chunks(2) yields one or two items"),
                    }
                }
                next
            }
            Algorithm::Pso => {
                let order = rank(swarm);
                let n_elite = self.config.elite_count().min(swarm.len());
                let mut next: Vec<Particle> =
                    order[..n_elite].iter().map(|&i| swarm[i].clone()).collect();
                for &i in &order[n_elite..] {
                    let p = self.oplus(&swarm[i], gbest);
                    next.push(p);
                }
                next
            }
            Algorithm::Ga => {
                let order = rank(swarm);
                let n_elite = self.config.elite_count().min(swarm.len());
                let mut next: Vec<Particle> =
                    order[..n_elite].iter().map(|&i| swarm[i].clone()).collect();
                while next.len() < swarm.len() {
                    self.counts.tournament += 2;
                    let a = tournament(swarm, &mut self.rng);
                    let b = tournament(swarm, &mut self.rng);
                    let (c1, c2) = self.breed(&swarm[a].path, &swarm[b].path);
                    for child in [c1, c2] {
                        if next.len() < swarm.len() {
                            let f = self.problem.evaluate(&child);
                            next.push(Particle::fresh(child, f));
                        }
                    }
                }
                next
            }
        }
    }
}

fn swarm_best(swarm: &[Particle]) -> &Particle {
    let order = rank(swarm);
    &swarm[order[0]]
}

/// Runs one solver to completion on a prepared problem.
pub fn run_problem(problem: &RouteProblem<'_>, config: &HybridConfig) -> Result<RunResult> {
    run_timed(problem, config, Instant::now(), |_, _| {})
}

/// Like [`run_problem`], calling `observe(iteration, swarm)` once per
/// iteration with the swarm that iteration's best was taken from.
pub fn run_problem_observed<F>(
    problem: &RouteProblem<'_>,
    config: &HybridConfig,
    observe: F,
) -> Result<RunResult>
where
    F: FnMut(usize, &[Particle]),
{
    run_timed(problem, config, Instant::now(), observe)
}

fn run_timed<F>(
    problem: &RouteProblem<'_>,
    config: &HybridConfig,
    start: Instant,
    mut observe: F,
) -> Result<RunResult>
where
    F: FnMut(usize, &[Particle]),
{
    config.validate()?;
    let mut solver = Solver {
        problem,
        config,
        rng: seed::rng(config.seed),
        counts: OperatorCounts::default(),
    };
    let mut swarm = init_swarm(problem, config, &mut solver.rng);
    observe(1, &swarm);
    let first = swarm_best(&swarm);
    let mut best_path = first.path.clone();
    let mut best_fit = first.fitness;
    let mut trace = vec![best_fit.total];
    let mut path_trace = vec![best_path.clone()];
    let mut iterations_to_best = 1;
    let mut time_to_best = start.elapsed();
    let mut stagnant = 0;

    for iter in 2..=config.max_iterations {
        if stagnant >= config.stagnation_window {
            break;
        }
        swarm = solver.next_generation(&swarm, &best_path);
        solver.counts.dedupe_replacements += dedupe(&mut swarm, problem, &mut solver.rng);
        observe(iter, &swarm);
        let cand = swarm_best(&swarm);
        if cand.fitness.total < best_fit.total {
            best_path = cand.path.clone();
            best_fit = cand.fitness;
            iterations_to_best = iter;
            time_to_best = start.elapsed();
            stagnant = 0;
        } else {
            stagnant += 1;
        }
        trace.push(best_fit.total);
        path_trace.push(best_path.clone());
    }

    Ok(RunResult {
        algorithm: config.algorithm,
        seed: config.seed,
        best_path,
        best_fitness: best_fit,
        iterations_executed: trace.len(),
        fitness_trace: trace,
        path_trace,
        iterations_to_best,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
        time_to_best_ms: time_to_best.as_secs_f64() * 1e3,
        operators: solver.counts,
    })
}

/// Finds a route from `source` to any of `gateways`. Timing covers building
/// the shortest-path tables as well as the search.
pub fn run(
    topo: &MeshTopology,
    source: NodeId,
    gateways: &[NodeId],
    req: &QosRequest,
    coeffs: &PenaltyCoeffs,
    config: &HybridConfig,
) -> Result<RunResult> {
    let start = Instant::now();
    config.validate()?;
    let problem = RouteProblem::new(topo, source, gateways, req, coeffs)?;
    run_timed(&problem, config, start, |_, _| {})
}
