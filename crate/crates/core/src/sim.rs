//! Packet-level delivery simulation over a fixed route.
//!
//! Every packet walks the route link by link. Link `l` drops it with
//! probability `loss(l)`; otherwise it adds `delay(l)` plus a jitter sample
//! drawn uniformly from `[0, jitter(l)]`. There is no queueing or
//! retransmission.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{self, MeshTopology, NodeId};
use crate::optim::{self, HybridConfig, RunResult};
use crate::qos::{PenaltyCoeffs, QosRequest};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrafficSpec {
    pub packet_count: usize,
    pub seed: u64,
}

impl Default for TrafficSpec {
    fn default() -> Self {
        TrafficSpec {
            packet_count: 10_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub pdr: f64,
    /// Mean end-to-end delay of delivered packets, ms. `None` if nothing arrived.
    pub avg_delay: Option<f64>,
    pub delivered_count: usize,
    pub packet_count: usize,
}

pub fn simulate_path(topo: &MeshTopology, path: &[NodeId], traffic: &TrafficSpec) -> Result<SimResult> {
    if traffic.packet_count == 0 {
        return Err(Error::InvalidConfig("packet_count must be at least 1".into()));
    }
    if !graph::validate_path(topo, path, false) {
        return Err(Error::InvalidPath(format!("{path:?} is not a simple connected walk")));
    }
    let links: Vec<_> = path
        .windows(2)
        .map(|w| topo.link_between(w[0], w[1]).expect("validated"))
        .collect();
    let mut rng = seed::rng(traffic.seed);
    let mut delivered = 0usize;
    let mut delay_sum = 0.0;
    'packets: for _ in 0..traffic.packet_count {
        let mut delay = 0.0;
        for l in &links {
            if rng.random_bool(l.loss) {
                continue 'packets;
            }
            delay += l.delay + l.jitter * rng.random::<f64>();
        }
        delivered += 1;
        delay_sum += delay;
    }
    Ok(SimResult {
        pdr: delivered as f64 / traffic.packet_count as f64,
        avg_delay: (delivered > 0).then(|| delay_sum / delivered as f64),
        delivered_count: delivered,
        packet_count: traffic.packet_count,
    })
}

/// Solves for a route, then simulates traffic over it.
pub fn evaluate_routing(
    topo: &MeshTopology,
    source: NodeId,
    gateways: &[NodeId],
    req: &QosRequest,
    coeffs: &PenaltyCoeffs,
    config: &HybridConfig,
    traffic: &TrafficSpec,
) -> Result<(RunResult, SimResult)> {
    let run = optim::run(topo, source, gateways, req, coeffs, config)?;
    let sim = simulate_path(topo, &run.best_path, traffic)?;
    Ok((run, sim))
}
