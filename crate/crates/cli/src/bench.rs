//! Benchmark sweeps over node counts, algorithms and seeds.
//!
//! A cell is one `(size, algorithm, seed)` triple. Its seed fixes the
//! topology, the source node, the solver stream and the traffic stream, so
//! any row of the output tables can be reproduced with [`replay`]. All
//! algorithms at the same `(size, seed)` see the same topology, source and
//! traffic.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use meshroute::graph::{generate_topology, pick_source, TopologyParams};
use meshroute::qos::{ClampMode, QosRequest};
use meshroute::seed;
use meshroute::sim::{evaluate_routing, SimResult, TrafficSpec};
use meshroute::{Algorithm, HybridConfig, NodeId, RunResult};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::output::{csv_bytes, write_atomic};
use crate::settings::PenaltySettings;

const SOURCE_STREAM: u64 = 1;
const SOLVER_STREAM: u64 = 2;
const TRAFFIC_STREAM: u64 = 3;

pub const FITNESS_TRACE_CSV: &str = "fitness_trace.csv";
pub const CONVERGENCE_CSV: &str = "convergence_time.csv";
pub const PDR_CSV: &str = "pdr.csv";
pub const DELAY_CSV: &str = "delay.csv";
pub const SUMMARY_CSV: &str = "summary.csv";
pub const PLAN_JSON: &str = "plan.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentPlan {
    pub node_sizes: Vec<usize>,
    pub algorithms: Vec<Algorithm>,
    pub seeds_per_cell: usize,
    /// Root of every cell seed.
    pub master_seed: u64,
    pub request: QosRequest,
    /// Defaults to fidelity mode: fitness reads as cost plus a penalty in
    /// [0, 1], the scale the benchmark figures are reported on.
    pub penalty: PenaltySettings,
    /// Solver settings; `algorithm` and `seed` are set per cell.
    pub solver: HybridConfig,
    /// Traffic settings; `seed` is set per cell.
    pub traffic: TrafficSpec,
    /// Generator template; `node_count` and `seed` are set per cell.
    pub topology: TopologyParams,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        ExperimentPlan {
            node_sizes: vec![25, 50, 75, 100, 125],
            algorithms: Algorithm::ALL.to_vec(),
            seeds_per_cell: 30,
            master_seed: 0,
            request: QosRequest::default(),
            penalty: PenaltySettings {
                mode: ClampMode::Fidelity,
                lambda: None,
            },
            solver: HybridConfig::default(),
            traffic: TrafficSpec::default(),
            topology: TopologyParams::default(),
        }
    }
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        if self.node_sizes.is_empty() {
            bail!("plan needs at least one node size");
        }
        if self.algorithms.is_empty() {
            bail!("plan needs at least one algorithm");
        }
        if self.seeds_per_cell < 1 {
            bail!("seeds_per_cell must be at least 1");
        }
        for &n in &self.node_sizes {
            self.topology_params(n, 0).validate()?;
        }
        self.request.validate()?;
        self.solver.validate()?;
        if self.traffic.packet_count == 0 {
            bail!("traffic.packet_count must be at least 1");
        }
        if let Some(l) = self.penalty.lambda {
            if !(l >= 0.0 && l.is_finite()) {
                bail!("penalty.lambda must be finite and non-negative");
            }
        }
        Ok(())
    }

    /// Seed of the `index`-th run at `size`, shared by all algorithms.
    pub fn cell_seed(&self, size: usize, index: usize) -> u64 {
        seed::derive(seed::derive(self.master_seed, size as u64), index as u64)
    }

    fn topology_params(&self, size: usize, seed: u64) -> TopologyParams {
        TopologyParams {
            node_count: size,
            seed,
            ..self.topology.clone()
        }
    }

    /// Every cell in output order: size, then algorithm, then seed index.
    pub fn cells(&self) -> Vec<(usize, Algorithm, u64)> {
        let mut out = Vec::new();
        for &size in &self.node_sizes {
            for &alg in &self.algorithms {
                for i in 0..self.seeds_per_cell {
                    out.push((size, alg, self.cell_seed(size, i)));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub size: usize,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub source: NodeId,
    pub run: RunResult,
    pub sim: SimResult,
}

impl CellResult {
    /// Equality ignoring wall-clock measurements.
    pub fn same_outcome(&self, other: &CellResult) -> bool {
        self.size == other.size
            && self.algorithm == other.algorithm
            && self.seed == other.seed
            && self.source == other.source
            && self.run.same_outcome(&other.run)
            && self.sim == other.sim
    }
}

/// Runs a single cell from scratch.
pub fn replay(plan: &ExperimentPlan, size: usize, algorithm: Algorithm, seed: u64) -> Result<CellResult> {
    let topo = generate_topology(&plan.topology_params(size, seed))?;
    let source = pick_source(&topo, seed::derive(seed, SOURCE_STREAM))
        .ok_or_else(|| anyhow!("every node is a gateway; no source to route from"))?;
    let coeffs = plan.penalty.coeffs(&plan.request, &topo);
    let config = HybridConfig {
        algorithm,
        seed: seed::derive(seed, SOLVER_STREAM),
        ..plan.solver.clone()
    };
    let traffic = TrafficSpec {
        seed: seed::derive(seed, TRAFFIC_STREAM),
        ..plan.traffic
    };
    let (run, sim) = evaluate_routing(
        &topo,
        source,
        topo.gateways(),
        &plan.request,
        &coeffs,
        &config,
        &traffic,
    )?;
    Ok(CellResult {
        size,
        algorithm,
        seed,
        source,
        run,
        sim,
    })
}

/// Runs every cell of the plan on `jobs` worker threads (all cores when
/// `None`). Results come back in [`ExperimentPlan::cells`] order.
pub fn run_plan(plan: &ExperimentPlan, jobs: Option<usize>) -> Result<Vec<CellResult>> {
    plan.validate()?;
    let cells = plan.cells();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        builder = builder.num_threads(j.max(1));
    }
    let pool = builder.build().context("starting worker pool")?;
    pool.install(|| {
        cells
            .par_iter()
            .map(|&(size, alg, seed)| {
                replay(plan, size, alg, seed)
                    .with_context(|| format!("cell size={size} algorithm={alg} seed={seed}"))
            })
            .collect()
    })
}

fn key(r: &CellResult) -> [String; 3] {
    [r.size.to_string(), r.algorithm.to_string(), r.seed.to_string()]
}

fn row(r: &CellResult, rest: impl IntoIterator<Item = String>) -> Vec<String> {
    key(r).into_iter().chain(rest).collect()
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn path_string(path: &[NodeId]) -> String {
    path.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(" ")
}

/// Median of `xs`; the mean of the two middle values for even counts.
pub fn median(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    })
}

pub fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Per `(size, algorithm)` aggregates across seeds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub size: usize,
    pub algorithm: Algorithm,
    pub runs: usize,
    pub feasible_runs: usize,
    pub median_best_fitness: f64,
    pub median_iterations_to_best: f64,
    pub median_iterations_executed: f64,
    pub median_time_to_best_ms: f64,
    pub median_hops: f64,
    pub median_pdr: f64,
    pub mean_pdr: f64,
    /// Over runs that delivered at least one packet.
    pub median_avg_delay_ms: Option<f64>,
    pub mean_avg_delay_ms: Option<f64>,
}

pub fn summarize(results: &[CellResult]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(usize, Algorithm), Vec<&CellResult>> = BTreeMap::new();
    let mut order = Vec::new();
    for r in results {
        let k = (r.size, r.algorithm);
        if !groups.contains_key(&k) {
            order.push(k);
        }
        groups.entry(k).or_default().push(r);
    }
    order
        .into_iter()
        .map(|k| {
            let rs = &groups[&k];
            let col = |f: &dyn Fn(&CellResult) -> f64| rs.iter().map(|r| f(r)).collect::<Vec<_>>();
            let delays: Vec<f64> = rs.iter().filter_map(|r| r.sim.avg_delay).collect();
            let pdr = col(&|r| r.sim.pdr);
            SummaryRow {
                size: k.0,
                algorithm: k.1,
                runs: rs.len(),
                feasible_runs: rs.iter().filter(|r| r.run.best_fitness.feasible).count(),
                median_best_fitness: median(&col(&|r| r.run.best_fitness.total)).unwrap(),
                median_iterations_to_best: median(&col(&|r| r.run.iterations_to_best as f64)).unwrap(),
                median_iterations_executed: median(&col(&|r| r.run.iterations_executed as f64)).unwrap(),
                median_time_to_best_ms: median(&col(&|r| r.run.time_to_best_ms)).unwrap(),
                median_hops: median(&col(&|r| (r.run.best_path.len() - 1) as f64)).unwrap(),
                median_pdr: median(&pdr).unwrap(),
                mean_pdr: mean(&pdr).unwrap(),
                median_avg_delay_ms: median(&delays),
                mean_avg_delay_ms: mean(&delays),
            }
        })
        .collect()
}

/// Writes the CSV bundle and the resolved plan into `dir`. Each file is
/// replaced atomically.
pub fn write_bundle(dir: &Path, plan: &ExperimentPlan, results: &[CellResult]) -> Result<Vec<SummaryRow>> {
    let k = ["size", "algorithm", "seed"];
    let hdr = |rest: &[&'static str]| k.iter().chain(rest).copied().collect::<Vec<&str>>();

    let mut trace = Vec::new();
    for r in results {
        for (i, f) in r.run.fitness_trace.iter().enumerate() {
            trace.push(row(r, [(i + 1).to_string(), f.to_string()]));
        }
    }
    let convergence: Vec<_> = results
        .iter()
        .map(|r| {
            row(
                r,
                [
                    r.run.iterations_to_best.to_string(),
                    r.run.iterations_executed.to_string(),
                    r.run.time_to_best_ms.to_string(),
                    r.run.wall_time_ms.to_string(),
                    r.run.best_fitness.total.to_string(),
                    r.run.best_fitness.feasible.to_string(),
                ],
            )
        })
        .collect();
    let pdr: Vec<_> = results
        .iter()
        .map(|r| {
            row(
                r,
                [
                    r.source.to_string(),
                    r.run.best_path.last().expect("routes are non-empty").to_string(),
                    (r.run.best_path.len() - 1).to_string(),
                    r.sim.packet_count.to_string(),
                    r.sim.delivered_count.to_string(),
                    r.sim.pdr.to_string(),
                ],
            )
        })
        .collect();
    let delay: Vec<_> = results
        .iter()
        .map(|r| {
            row(
                r,
                [
                    (r.run.best_path.len() - 1).to_string(),
                    opt(r.sim.avg_delay),
                    path_string(&r.run.best_path),
                ],
            )
        })
        .collect();
    let summary = summarize(results);
    let summary_rows: Vec<_> = summary
        .iter()
        .map(|s| {
            vec![
                s.size.to_string(),
                s.algorithm.to_string(),
                s.runs.to_string(),
                s.feasible_runs.to_string(),
                s.median_best_fitness.to_string(),
                s.median_iterations_to_best.to_string(),
                s.median_iterations_executed.to_string(),
                s.median_time_to_best_ms.to_string(),
                s.median_hops.to_string(),
                s.median_pdr.to_string(),
                s.mean_pdr.to_string(),
                opt(s.median_avg_delay_ms),
                opt(s.mean_avg_delay_ms),
            ]
        })
        .collect();

    let files: [(&str, Vec<&str>, &[Vec<String>]); 5] = [
        (FITNESS_TRACE_CSV, hdr(&["iteration", "best_fitness"]), &trace),
        (
            CONVERGENCE_CSV,
            hdr(&[
                "iterations_to_best",
                "iterations_executed",
                "time_to_best_ms",
                "wall_time_ms",
                "best_fitness",
                "feasible",
            ]),
            &convergence,
        ),
        (
            PDR_CSV,
            hdr(&["source", "gateway", "hops", "packets", "delivered", "pdr"]),
            &pdr,
        ),
        (DELAY_CSV, hdr(&["hops", "avg_delay_ms", "path"]), &delay),
        (
            SUMMARY_CSV,
            vec![
                "size",
                "algorithm",
                "runs",
                "feasible_runs",
                "median_best_fitness",
                "median_iterations_to_best",
                "median_iterations_executed",
                "median_time_to_best_ms",
                "median_hops",
                "median_pdr",
                "mean_pdr",
                "median_avg_delay_ms",
                "mean_avg_delay_ms",
            ],
            &summary_rows,
        ),
    ];
    for (name, header, rows) in files {
        write_atomic(&dir.join(name), &csv_bytes(&header, rows)?)?;
    }
    let plan_json = serde_json::to_string_pretty(plan)?;
    write_atomic(&dir.join(PLAN_JSON), plan_json.as_bytes())?;
    Ok(summary)
}
