//! Solved-route reports for the `route` command.

use std::fmt::Write as _;

use meshroute::qos::{PenaltyCoeffs, QosRequest};
use meshroute::{MeshTopology, NodeId, RunResult};
use serde::{Deserialize, Serialize};

/// Consecutive iterations that shared the same incumbent route.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub first_iteration: usize,
    pub last_iteration: usize,
    pub path: Vec<NodeId>,
    pub fitness: f64,
}

/// Collapses the per-iteration incumbent history into runs of equal
/// `(path, fitness)`.
pub fn trace_table(run: &RunResult) -> Vec<TraceRow> {
    let mut rows: Vec<TraceRow> = Vec::new();
    for (i, (path, &fitness)) in run.path_trace.iter().zip(&run.fitness_trace).enumerate() {
        let it = i + 1;
        match rows.last_mut() {
            Some(r) if r.path == *path && r.fitness == fitness => r.last_iteration = it,
            _ => rows.push(TraceRow {
                first_iteration: it,
                last_iteration: it,
                path: path.clone(),
                fitness,
            }),
        }
    }
    rows
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteReport {
    pub node_count: usize,
    pub link_count: usize,
    pub gateways: Vec<NodeId>,
    pub source: NodeId,
    pub request: QosRequest,
    pub coeffs: PenaltyCoeffs,
    pub result: RunResult,
    pub table: Vec<TraceRow>,
}

impl RouteReport {
    pub fn new(
        topo: &MeshTopology,
        source: NodeId,
        request: QosRequest,
        coeffs: PenaltyCoeffs,
        result: RunResult,
    ) -> Self {
        RouteReport {
            node_count: topo.node_count(),
            link_count: topo.links().len(),
            gateways: topo.gateways().to_vec(),
            source,
            request,
            coeffs,
            table: trace_table(&result),
            result,
        }
    }

    /// Human-readable report. Wall-clock figures are left out so the text is
    /// reproducible for a fixed seed.
    pub fn render(&self) -> String {
        let r = &self.result;
        let f = &r.best_fitness;
        let v = &f.violations;
        let mut s = String::new();
        let _ = writeln!(
            s,
            "topology: {} nodes, {} links, gateways {}",
            self.node_count,
            self.link_count,
            join(&self.gateways, ", ")
        );
        let _ = writeln!(
            s,
            "algorithm: {} (seed {}), source {}",
            r.algorithm, r.seed, self.source
        );
        let _ = writeln!(s, "best path: {}", join(&r.best_path, " -> "));
        let _ = writeln!(
            s,
            "fitness: {:.4} = cost {:.4} + {:.4} x penalty {:.4} ({:?} mode)",
            f.total, f.objective, self.coeffs.lambda, f.penalty, self.coeffs.clamp_mode
        );
        let _ = writeln!(
            s,
            "violations: bandwidth {:.4}, delay {:.4}, jitter {:.4}, interference {:.4}; feasible: {}",
            v.bandwidth,
            v.delay,
            v.jitter,
            v.interference,
            if f.feasible { "yes" } else { "no" }
        );
        let _ = writeln!(
            s,
            "iterations: {} executed, best first reached at {}",
            r.iterations_executed, r.iterations_to_best
        );
        let _ = writeln!(s);
        let rows: Vec<[String; 3]> = self
            .table
            .iter()
            .map(|t| {
                let span = if t.first_iteration == t.last_iteration {
                    t.first_iteration.to_string()
                } else {
                    format!("{}-{}", t.first_iteration, t.last_iteration)
                };
                [span, join(&t.path, ", "), format!("{:.4}", t.fitness)]
            })
            .collect();
        let head = ["Iteration", "Path taken", "Fitness"];
        let w0 = rows.iter().map(|r| r[0].len()).chain([head[0].len()]).max().unwrap();
        let w1 = rows.iter().map(|r| r[1].len()).chain([head[1].len()]).max().unwrap();
        let _ = writeln!(s, "{:<w0$}  {:<w1$}  {}", head[0], head[1], head[2]);
        for r in rows {
            let _ = writeln!(s, "{:<w0$}  {:<w1$}  {}", r[0], r[1], r[2]);
        }
        s
    }
}

fn join(ids: &[NodeId], sep: &str) -> String {
    ids.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(sep)
}
