use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use meshroute::graph::{generate_topology, TopologyParams};
use meshroute::qos::ClampMode;
use meshroute::{run, Algorithm, MeshTopology, NodeId};
use meshroute_cli::bench::{run_plan, write_bundle, ExperimentPlan, SummaryRow};
use meshroute_cli::output::write_atomic;
use meshroute_cli::{RouteReport, RouteSettings};
use serde::de::DeserializeOwned;
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "meshroute",
    version,
    about = "QoS-constrained route search for multi-channel multi-radio mesh networks"
)]
struct Cli {
    /// RNG seed (topology seed for `gen`, solver seed for `route`, master seed for `bench`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// JSON settings file; explicit flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random mesh topology and write it as JSON.
    Gen(GenArgs),
    /// Solve for a QoS route on a topology file.
    Route(RouteArgs),
    /// Run a benchmark sweep and write the CSV tables.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Number of nodes (at least 2).
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..))]
    nodes: Option<u32>,
    /// Output file.
    #[arg(long)]
    out: PathBuf,
    /// Transmission range, metres.
    #[arg(long)]
    range: Option<f64>,
    /// Number of gateway nodes.
    #[arg(long)]
    gateways: Option<usize>,
    /// Radios per node.
    #[arg(long)]
    radios: Option<usize>,
    /// Deployment area width, metres (requires --height).
    #[arg(long, requires = "height")]
    width: Option<f64>,
    /// Deployment area height, metres (requires --width).
    #[arg(long, requires = "width")]
    height: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PenaltyMode {
    Strict,
    Fidelity,
}

impl From<PenaltyMode> for ClampMode {
    fn from(m: PenaltyMode) -> Self {
        match m {
            PenaltyMode::Strict => ClampMode::Strict,
            PenaltyMode::Fidelity => ClampMode::Fidelity,
        }
    }
}

#[derive(Args)]
struct QosArgs {
    /// Required bottleneck bandwidth, Mbps.
    #[arg(long)]
    bw_req: Option<f64>,
    /// End-to-end delay bound, ms.
    #[arg(long)]
    delay_req: Option<f64>,
    /// End-to-end jitter bound, ms.
    #[arg(long)]
    jitter_req: Option<f64>,
    /// Interference threshold in [0, 1]; path interference must stay at or below 1 - beta.
    #[arg(long)]
    beta: Option<f64>,
    /// Penalty aggregation.
    #[arg(long, value_enum)]
    penalty_mode: Option<PenaltyMode>,
    /// Fixed penalty weight instead of the mode's default.
    #[arg(long)]
    lambda: Option<f64>,
    /// Particles per swarm.
    #[arg(long)]
    swarm_size: Option<usize>,
    /// Iteration limit.
    #[arg(long)]
    iterations: Option<usize>,
}

impl QosArgs {
    fn apply(&self, s: &mut RouteSettings) {
        let r = &mut s.request;
        set(&mut r.bw_req, self.bw_req);
        set(&mut r.d_req, self.delay_req);
        set(&mut r.j_req, self.jitter_req);
        set(&mut r.beta, self.beta);
        set(&mut s.penalty.mode, self.penalty_mode.map(Into::into));
        if self.lambda.is_some() {
            s.penalty.lambda = self.lambda;
        }
        set(&mut s.solver.swarm_size, self.swarm_size);
        set(&mut s.solver.max_iterations, self.iterations);
    }
}

#[derive(Args)]
struct RouteArgs {
    /// Topology JSON file written by `gen`.
    topology: PathBuf,
    /// Source node id.
    #[arg(long)]
    source: usize,
    /// Solver: pso, ga or hybrid.
    #[arg(long)]
    algorithm: Option<Algorithm>,
    #[command(flatten)]
    qos: QosArgs,
}

#[derive(Args)]
struct BenchArgs {
    /// Output directory for the CSV tables.
    #[arg(long)]
    out: PathBuf,
    /// Comma-separated node counts.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    /// Comma-separated solvers.
    #[arg(long, value_delimiter = ',')]
    algorithms: Option<Vec<Algorithm>>,
    /// Seeds per (size, algorithm) cell.
    #[arg(long)]
    seeds: Option<usize>,
    /// Packets simulated per run.
    #[arg(long)]
    packets: Option<usize>,
    /// Penalty aggregation.
    #[arg(long, value_enum)]
    penalty_mode: Option<PenaltyMode>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn read_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))
        }
    }
}

fn print_json<T: Serialize>(v: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn cmd_gen(cli: &Cli, a: &GenArgs) -> Result<()> {
    let mut p: TopologyParams = read_config(cli.config.as_deref())?;
    if a.nodes.is_none() && cli.config.is_none() {
        anyhow::bail!("--nodes is required unless --config supplies node_count");
    }
    set(&mut p.node_count, a.nodes.map(|n| n as usize));
    set(&mut p.seed, cli.seed);
    set(&mut p.transmission_range, a.range);
    set(&mut p.gateway_count, a.gateways);
    set(&mut p.radios_per_node, a.radios);
    if let (Some(w), Some(h)) = (a.width, a.height) {
        p.area = Some((w, h));
    }
    let topo = generate_topology(&p)?;
    write_atomic(&a.out, topo.to_json().as_bytes())?;
    let synthetic = topo.links().iter().filter(|l| l.synthetic).count();
    if cli.json {
        print_json(&serde_json::json!({
            "out": a.out,
            "nodes": topo.node_count(),
            "links": topo.links().len(),
            "synthetic_links": synthetic,
            "gateways": topo.gateways(),
        }))
    } else {
        println!(
            "wrote {}: {} nodes, {} links ({} synthetic), {} gateways",
            a.out.display(),
            topo.node_count(),
            topo.links().len(),
            synthetic,
            topo.gateways().len()
        );
        Ok(())
    }
}

fn cmd_route(cli: &Cli, a: &RouteArgs) -> Result<()> {
    let mut s: RouteSettings = read_config(cli.config.as_deref())?;
    a.qos.apply(&mut s);
    set(&mut s.solver.algorithm, a.algorithm);
    set(&mut s.solver.seed, cli.seed);
    let text = fs::read_to_string(&a.topology)
        .with_context(|| format!("reading {}", a.topology.display()))?;
    let topo = MeshTopology::from_json(&text)
        .with_context(|| format!("loading topology {}", a.topology.display()))?;
    let coeffs = s.penalty.coeffs(&s.request, &topo);
    let source = NodeId(a.source);
    let result = run(&topo, source, topo.gateways(), &s.request, &coeffs, &s.solver)?;
    let report = RouteReport::new(&topo, source, s.request, coeffs, result);
    if cli.json {
        print_json(&report)
    } else {
        print!("{}", report.render());
        Ok(())
    }
}

fn cmd_bench(cli: &Cli, a: &BenchArgs) -> Result<()> {
    let mut plan: ExperimentPlan = read_config(cli.config.as_deref())?;
    set(&mut plan.node_sizes, a.sizes.clone());
    set(&mut plan.algorithms, a.algorithms.clone());
    set(&mut plan.seeds_per_cell, a.seeds);
    set(&mut plan.traffic.packet_count, a.packets);
    set(&mut plan.penalty.mode, a.penalty_mode.map(Into::into));
    set(&mut plan.master_seed, cli.seed);
    plan.validate()?;
    let results = run_plan(&plan, a.jobs)?;
    let summary = write_bundle(&a.out, &plan, &results)
        .with_context(|| format!("writing results to {}", a.out.display()))?;
    if cli.json {
        print_json(&summary)
    } else {
        print_summary(&a.out, &summary);
        Ok(())
    }
}

fn print_summary(dir: &Path, rows: &[SummaryRow]) {
    println!("wrote {}", dir.display());
    println!(
        "{:>5}  {:<7} {:>4}  {:>12}  {:>8}  {:>10}  {:>7}  {:>9}",
        "size", "algo", "runs", "median F", "med it", "med ms", "mean PDR", "mean delay"
    );
    for r in rows {
        println!(
            "{:>5}  {:<7} {:>4}  {:>12.4}  {:>8}  {:>10.3}  {:>7.4}  {:>9}",
            r.size,
            r.algorithm.to_string(),
            r.runs,
            r.median_best_fitness,
            r.median_iterations_to_best,
            r.median_time_to_best_ms,
            r.mean_pdr,
            r.mean_avg_delay_ms
                .map(|d| format!("{d:.3}"))
                .unwrap_or_else(|| "-".into())
        );
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Gen(a) => cmd_gen(&cli, a),
        Command::Route(a) => cmd_route(&cli, a),
        Command::Bench(a) => cmd_bench(&cli, a),
    }
}
