//! Path QoS aggregation, constraint penalties and the penalised fitness.
//!
//! The fitness of a route is its summed link cost plus a weighted penalty for
//! every QoS bound it breaks. Bandwidth is a bottleneck constraint (minimum
//! over the path), delay and jitter are additive, and interference is the mean
//! link interference factor compared against `1 - beta`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{self, MeshTopology, NodeId, DEFAULT_PATH_CAP};

/// Application QoS demands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QosRequest {
    /// Required bottleneck bandwidth, Mbps.
    pub bw_req: f64,
    /// End-to-end delay bound, ms.
    pub d_req: f64,
    /// End-to-end jitter bound, ms.
    pub j_req: f64,
    /// Interference threshold; path interference must stay at or below `1 - beta`.
    pub beta: f64,
}

impl Default for QosRequest {
    fn default() -> Self {
        QosRequest {
            bw_req: 2.0,
            d_req: 10.0,
            j_req: 10.0,
            beta: 0.5,
        }
    }
}

impl QosRequest {
    pub fn validate(&self) -> Result<()> {
        let ok = self.bw_req > 0.0
            && self.d_req > 0.0
            && self.j_req > 0.0
            && (0.0..=1.0).contains(&self.beta);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidRequest(format!(
                "need bw_req, d_req, j_req > 0 and beta in [0, 1]; got {self:?}"
            )))
        }
    }

    /// Largest path interference that still satisfies the request.
    pub fn interference_bound(&self) -> f64 {
        1.0 - self.beta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ClampMode {
    /// Each violation term is clamped to [0, 1] and the penalty is their mean.
    Fidelity,
    /// Plain sum of the weighted violation terms.
    #[default]
    Strict,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyCoeffs {
    pub eta1: f64,
    pub eta2: f64,
    pub eta3: f64,
    pub lambda: f64,
    pub clamp_mode: ClampMode,
}

impl PenaltyCoeffs {
    /// Relative-violation normalisers with `lambda = 1`, so that `p(x)` stays in
    /// [0, 1] and fitness values read as `cost + p`.
    pub fn fidelity(req: &QosRequest) -> Self {
        PenaltyCoeffs {
            eta1: 1.0 / req.bw_req,
            eta2: 1.0 / req.d_req,
            eta3: 1.0 / req.j_req,
            lambda: 1.0,
            clamp_mode: ClampMode::Fidelity,
        }
    }

    /// Relative-violation normalisers with `lambda` large enough that any
    /// violation outweighs any cost saving on a route of up to `max_hops` links.
    pub fn strict(req: &QosRequest, max_link_cost: f64, max_hops: usize) -> Self {
        PenaltyCoeffs {
            lambda: 2.0 * max_link_cost * max_hops as f64,
            clamp_mode: ClampMode::Strict,
            ..Self::fidelity(req)
        }
    }

    pub fn for_topology(req: &QosRequest, topo: &MeshTopology, mode: ClampMode) -> Self {
        match mode {
            ClampMode::Fidelity => Self::fidelity(req),
            ClampMode::Strict => Self::strict(
                req,
                topo.max_link_cost(),
                topo.node_count().saturating_sub(1).max(1),
            ),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.eta1, self.eta2, self.eta3, self.lambda];
        if all.iter().all(|c| *c >= 0.0 && c.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidRequest(format!(
                "penalty coefficients must be finite and non-negative: {self:?}"
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathMetrics {
    pub cost: f64,
    /// Bottleneck bandwidth; `+inf` for a single-node path.
    pub min_bw: f64,
    pub total_delay: f64,
    pub total_jitter: f64,
    /// Mean link interference factor.
    pub interference: f64,
    pub hops: usize,
}

/// Aggregates link weights along `path`. The path must be a simple walk over
/// existing links; gateway termination is not required.
pub fn path_metrics(topo: &MeshTopology, path: &[NodeId]) -> Result<PathMetrics> {
    if !graph::is_simple_walk(topo, path) {
        return Err(Error::InvalidPath(format!("{path:?} is not a simple connected walk")));
    }
    Ok(aggregate(topo, path))
}

fn aggregate(topo: &MeshTopology, path: &[NodeId]) -> PathMetrics {
    let mut m = PathMetrics {
        cost: 0.0,
        min_bw: f64::INFINITY,
        total_delay: 0.0,
        total_jitter: 0.0,
        interference: 0.0,
        hops: 0,
    };
    let mut ifactor_sum = 0.0;
    for w in path.windows(2) {
        let l = topo
            .link_between(w[0], w[1])
            .expect("aggregate is only called on validated walks");
        m.cost += l.cost;
        m.min_bw = m.min_bw.min(l.bandwidth);
        m.total_delay += l.delay;
        m.total_jitter += l.jitter;
        ifactor_sum += l.ifactor;
        m.hops += 1;
    }
    if m.hops > 0 {
        m.interference = ifactor_sum / m.hops as f64;
    }
    m
}

/// Weighted violation of each constraint.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Violations {
    pub bandwidth: f64,
    pub delay: f64,
    pub jitter: f64,
    pub interference: f64,
}

impl Violations {
    pub fn as_array(&self) -> [f64; 4] {
        [self.bandwidth, self.delay, self.jitter, self.interference]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Penalty {
    pub value: f64,
    pub terms: Violations,
}

pub fn penalty(metrics: &PathMetrics, req: &QosRequest, coeffs: &PenaltyCoeffs) -> Penalty {
    let mut terms = Violations {
        bandwidth: coeffs.eta1 * (req.bw_req - metrics.min_bw).max(0.0),
        delay: coeffs.eta2 * (metrics.total_delay - req.d_req).max(0.0),
        jitter: coeffs.eta3 * (metrics.total_jitter - req.j_req).max(0.0),
        interference: (metrics.interference - req.interference_bound()).max(0.0),
    };
    let value = match coeffs.clamp_mode {
        ClampMode::Strict => terms.as_array().iter().sum(),
        ClampMode::Fidelity => {
            terms.bandwidth = terms.bandwidth.min(1.0);
            terms.delay = terms.delay.min(1.0);
            terms.jitter = terms.jitter.min(1.0);
            terms.interference = terms.interference.min(1.0);
            terms.as_array().iter().sum::<f64>() / 4.0
        }
    };
    Penalty { value, terms }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitnessBreakdown {
    /// Summed link cost, f(x).
    pub objective: f64,
    /// p(x).
    pub penalty: f64,
    /// F(x) = f(x) + lambda * p(x).
    pub total: f64,
    pub violations: Violations,
    pub feasible: bool,
    /// False when the node sequence was not a usable route; `total` then holds
    /// the infeasible sentinel.
    pub valid: bool,
}

/// Evaluates routes against one topology, request and coefficient set.
#[derive(Debug, Clone)]
pub struct Evaluator<'a> {
    topo: &'a MeshTopology,
    req: QosRequest,
    coeffs: PenaltyCoeffs,
    cost_bound: f64,
    penalty_bound: f64,
}

impl<'a> Evaluator<'a> {
    pub fn new(topo: &'a MeshTopology, req: QosRequest, coeffs: PenaltyCoeffs) -> Self {
        let hops = topo.node_count().saturating_sub(1) as f64;
        let cost_bound = topo.max_link_cost() * hops;
        let penalty_bound = match coeffs.clamp_mode {
            ClampMode::Fidelity => 1.0,
            ClampMode::Strict => {
                let max_delay = topo.links().iter().map(|l| l.delay).fold(0.0, f64::max);
                let max_jitter = topo.links().iter().map(|l| l.jitter).fold(0.0, f64::max);
                coeffs.eta1 * req.bw_req
                    + coeffs.eta2 * max_delay * hops
                    + coeffs.eta3 * max_jitter * hops
                    + 1.0
            }
        };
        Evaluator {
            topo,
            req,
            coeffs,
            cost_bound,
            penalty_bound,
        }
    }

    pub fn topology(&self) -> &'a MeshTopology {
        self.topo
    }

    pub fn request(&self) -> &QosRequest {
        &self.req
    }

    pub fn coeffs(&self) -> &PenaltyCoeffs {
        &self.coeffs
    }

    /// Fitness assigned to unusable node sequences: `lambda * max(4, p_max) +
    /// cost_max + 1`, strictly above any connected route.
    pub fn infeasible_total(&self) -> f64 {
        self.coeffs.lambda * self.penalty_bound.max(4.0) + self.cost_bound + 1.0
    }

    pub fn evaluate(&self, path: &[NodeId]) -> FitnessBreakdown {
        if !graph::is_simple_walk(self.topo, path) {
            return self.invalid();
        }
        let metrics = aggregate(self.topo, path);
        self.from_metrics(&metrics)
    }

    pub fn from_metrics(&self, metrics: &PathMetrics) -> FitnessBreakdown {
        let p = penalty(metrics, &self.req, &self.coeffs);
        FitnessBreakdown {
            objective: metrics.cost,
            penalty: p.value,
            total: metrics.cost + self.coeffs.lambda * p.value,
            violations: p.terms,
            feasible: p.value == 0.0,
            valid: true,
        }
    }

    fn invalid(&self) -> FitnessBreakdown {
        let penalty = self.penalty_bound.max(4.0);
        let objective = self.cost_bound + 1.0;
        FitnessBreakdown {
            objective,
            penalty,
            total: self.infeasible_total(),
            violations: Violations::default(),
            feasible: false,
            valid: false,
        }
    }
}

/// F(x) for a node sequence. Sequences that are not simple connected walks
/// receive the infeasible sentinel instead of an error.
pub fn fitness(
    topo: &MeshTopology,
    path: &[NodeId],
    req: &QosRequest,
    coeffs: &PenaltyCoeffs,
) -> FitnessBreakdown {
    Evaluator::new(topo, *req, *coeffs).evaluate(path)
}

/// Exhaustive minimiser of F over all simple source-to-gateway paths with at
/// most `max_hops` links. Ties go to the lexicographically smaller path.
pub fn oracle_best(
    topo: &MeshTopology,
    source: NodeId,
    gateways: &[NodeId],
    req: &QosRequest,
    coeffs: &PenaltyCoeffs,
    max_hops: usize,
) -> Result<(Vec<NodeId>, FitnessBreakdown)> {
    oracle_best_capped(topo, source, gateways, req, coeffs, max_hops, DEFAULT_PATH_CAP)
}

pub fn oracle_best_capped(
    topo: &MeshTopology,
    source: NodeId,
    gateways: &[NodeId],
    req: &QosRequest,
    coeffs: &PenaltyCoeffs,
    max_hops: usize,
    cap: usize,
) -> Result<(Vec<NodeId>, FitnessBreakdown)> {
    let eval = Evaluator::new(topo, *req, *coeffs);
    let mut best: Option<(Vec<NodeId>, FitnessBreakdown)> = None;
    graph::for_each_simple_path(topo, source, gateways, max_hops, cap, |path| {
        let f = eval.from_metrics(&aggregate(topo, path));
        if best.as_ref().is_none_or(|(_, b)| f.total < b.total) {
            best = Some((path.to_vec(), f));
        }
    })?;
    best.ok_or(Error::Unreachable(source))
}
