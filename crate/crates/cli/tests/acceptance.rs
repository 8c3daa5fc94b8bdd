//! End-to-end acceptance checks. Every criterion prints one PASS/FAIL line;
//! the test fails if any criterion fails.
//!
//! Everything runs inside a single test so that the timing-based criterion is
//! not disturbed by other tests executing concurrently.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use meshroute::continuous::{pso_step_with, run_continuous, ContinuousConfig, RealParticle};
use meshroute::graph::{
    enumerate_simple_paths, generate_topology, pick_source, LinkWeights, NodeId, ShortestPaths,
    TopologyBuilder, TopologyParams,
};
use meshroute::optim::{oplus, splice};
use meshroute::qos::{oracle_best, path_metrics, penalty, ClampMode, PathMetrics, PenaltyCoeffs, QosRequest};
use meshroute::seed;
use meshroute::sim::{simulate_path, TrafficSpec};
use meshroute::{run, Algorithm, HybridConfig};
use meshroute_cli::bench::{median, run_plan, CellResult, ExperimentPlan};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

struct Outcome {
    pass: bool,
    detail: String,
}

fn within(budget: Duration, start: Instant, pass: bool, detail: String) -> Outcome {
    let took = start.elapsed();
    let in_time = took <= budget;
    Outcome {
        pass: pass && in_time,
        detail: format!(
            "{detail}; {:.2} s of {:.0} s budget{}",
            took.as_secs_f64(),
            budget.as_secs_f64(),
            if in_time { "" } else { " (over budget)" }
        ),
    }
}

fn ids(v: &[usize]) -> Vec<NodeId> {
    v.iter().map(|&i| NodeId(i)).collect()
}

fn worked_examples() -> Outcome {
    let start = Instant::now();
    // From node 1: cost(7)=1 < cost(2)=3, cost(5)=2 < cost(4)=6, cost(9)=3 < cost(10)=7.
    let mut b = TopologyBuilder::new(14);
    for (u, v, c) in [
        (1, 2, 3.0),
        (2, 4, 3.0),
        (4, 9, 3.0),
        (9, 13, 3.0),
        (1, 7, 1.0),
        (7, 5, 1.0),
        (5, 10, 5.0),
        (10, 13, 1.0),
        (5, 9, 1.0),
    ] {
        b = b.link_with(u, v, LinkWeights::cost(c));
    }
    let t = b.gateways(&[13]).build().unwrap();
    let tree = ShortestPaths::compute(&t, NodeId(1), None);
    let pa = oplus(&ids(&[1, 2, 4, 9, 13]), &ids(&[1, 7, 5, 10, 13]), &tree);
    let p1 = ids(&[1, 7, 5, 8, 12, 15, 21, 24, 25]);
    let p2 = ids(&[1, 7, 5, 10, 17, 19, 22, 25]);
    let c1 = splice(&p1, &p2, 3, 4);
    let c2 = splice(&p2, &p1, 3, 7);
    let ok = pa == ids(&[1, 7, 5, 9, 13])
        && c1 == ids(&[1, 7, 5, 10, 12, 15, 21, 24, 25])
        && c2 == ids(&[1, 7, 5, 8, 12, 15, 21, 25]);
    within(
        Duration::from_secs(1),
        start,
        ok,
        format!("oplus -> {pa:?}, crossover children {c1:?} / {c2:?}"),
    )
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let req = QosRequest::default();
    let mut wins: BTreeMap<Algorithm, usize> = BTreeMap::new();
    for s in 0..20u64 {
        let n = 10 + (s % 5) as usize;
        let tseed = seed::derive(0xACCE, s);
        let t = generate_topology(&TopologyParams::new(n, tseed)).unwrap();
        let src = pick_source(&t, seed::derive(tseed, 1)).unwrap();
        let c = PenaltyCoeffs::for_topology(&req, &t, ClampMode::Strict);
        let (_, best) = oracle_best(&t, src, t.gateways(), &req, &c, n - 1).unwrap();
        for alg in Algorithm::ALL {
            let r = run(&t, src, t.gateways(), &req, &c, &HybridConfig::new(alg, s)).unwrap();
            if (r.best_fitness.total - best.total).abs() <= 1e-9 * best.total.abs().max(1.0) {
                *wins.entry(alg).or_default() += 1;
            }
        }
    }
    let w = |a| wins.get(&a).copied().unwrap_or(0);
    let ok = w(Algorithm::Hybrid) >= 18 && w(Algorithm::Pso) >= 12 && w(Algorithm::Ga) >= 12;
    within(
        Duration::from_secs(60),
        start,
        ok,
        format!(
            "oracle matched: hybrid {}/20 (need 18), pso {}/20, ga {}/20 (need 12)",
            w(Algorithm::Hybrid),
            w(Algorithm::Pso),
            w(Algorithm::Ga)
        ),
    )
}

fn by_cell(results: &[CellResult], size: usize, alg: Algorithm) -> Vec<&CellResult> {
    results.iter().filter(|r| r.size == size && r.algorithm == alg).collect()
}

fn median_of(results: &[CellResult], size: usize, alg: Algorithm, f: impl Fn(&CellResult) -> f64) -> f64 {
    let xs: Vec<f64> = by_cell(results, size, alg).into_iter().map(f).collect();
    median(&xs).unwrap()
}

fn convergence_dominance() -> Outcome {
    let start = Instant::now();
    let plan = ExperimentPlan {
        node_sizes: vec![50],
        seeds_per_cell: 30,
        ..Default::default()
    };
    let results = run_plan(&plan, Some(1)).unwrap();
    let m = |a| median_of(&results, 50, a, |r| r.run.iterations_to_best as f64);
    let (h, p, g) = (m(Algorithm::Hybrid), m(Algorithm::Pso), m(Algorithm::Ga));
    within(
        Duration::from_secs(300),
        start,
        h <= p && h <= g,
        format!("median iterations-to-best at 50 nodes: hybrid {h}, pso {p}, ga {g}"),
    )
}

fn sweep() -> Vec<CellResult> {
    let plan = ExperimentPlan {
        seeds_per_cell: 10,
        ..Default::default()
    };
    run_plan(&plan, Some(1)).unwrap()
}

const SIZES: [usize; 5] = [25, 50, 75, 100, 125];

fn scaling(results: &[CellResult], start: Instant) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for alg in Algorithm::ALL {
        let meds: Vec<f64> = SIZES
            .iter()
            .map(|&n| median_of(results, n, alg, |r| r.run.time_to_best_ms))
            .collect();
        let rising = meds.windows(2).all(|w| w[0] <= w[1]);
        ok &= rising;
        parts.push(format!(
            "{alg} [{}]{}",
            meds.iter().map(|m| format!("{m:.3}")).collect::<Vec<_>>().join(", "),
            if rising { "" } else { " not monotone" }
        ));
    }
    let at = |a| median_of(results, 125, a, |r| r.run.time_to_best_ms);
    let (h, p, g) = (at(Algorithm::Hybrid), at(Algorithm::Pso), at(Algorithm::Ga));
    ok &= h <= p && h <= g;
    within(
        Duration::from_secs(900),
        start,
        ok,
        format!(
            "median time-to-best ms by size: {}; at 125 nodes hybrid {h:.3} vs pso {p:.3}, ga {g:.3}",
            parts.join("; ")
        ),
    )
}

fn mean_of(results: &[CellResult], size: usize, alg: Algorithm, f: impl Fn(&CellResult) -> Option<f64>) -> f64 {
    let xs: Vec<f64> = by_cell(results, size, alg).into_iter().filter_map(f).collect();
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn delivery_dominance(results: &[CellResult]) -> Outcome {
    let mut ok = true;
    let mut losses = Vec::new();
    for &n in &SIZES {
        let pdr = |a| mean_of(results, n, a, |r| Some(r.sim.pdr));
        let delay = |a| mean_of(results, n, a, |r| r.sim.avg_delay);
        for base in [Algorithm::Pso, Algorithm::Ga] {
            if pdr(Algorithm::Hybrid) < pdr(base) {
                ok = false;
                losses.push(format!(
                    "PDR at {n}: hybrid {:.4} < {base} {:.4}",
                    pdr(Algorithm::Hybrid),
                    pdr(base)
                ));
            }
            if delay(Algorithm::Hybrid) > delay(base) {
                ok = false;
                losses.push(format!(
                    "delay at {n}: hybrid {:.3} > {base} {:.3}",
                    delay(Algorithm::Hybrid),
                    delay(base)
                ));
            }
        }
    }
    let h100 = mean_of(results, 100, Algorithm::Hybrid, |r| Some(r.sim.pdr));
    ok &= h100 >= 0.85;
    Outcome {
        pass: ok,
        detail: format!(
            "hybrid mean PDR at 100 nodes {h100:.4} (need 0.85); {}",
            if losses.is_empty() {
                "hybrid at least as good as both baselines everywhere".to_string()
            } else {
                losses.join("; ")
            }
        ),
    }
}

fn penalty_invariants() -> Outcome {
    let start = Instant::now();
    let strategy = (5usize..11, any::<u64>(), any::<usize>(), 0.5..12.0f64, 1.0..15.0f64, 1.0..15.0f64, 0.0..=1.0f64, 0.0..3.0f64);
    let mut runner = TestRunner::new(Config {
        cases: 1000,
        failure_persistence: None,
        ..Config::default()
    });
    let result = runner.run(&strategy, |(n, tseed, pick, bw, d, j, beta, bump)| {
        let t = generate_topology(&TopologyParams::new(n, tseed)).unwrap();
        let src = pick_source(&t, tseed).unwrap();
        let paths = enumerate_simple_paths(&t, src, t.gateways(), n - 1, 100_000).unwrap();
        let path = &paths[pick % paths.len()];
        let req = QosRequest { bw_req: bw, d_req: d, j_req: j, beta };
        let m = path_metrics(&t, path).unwrap();
        let holds = m.min_bw >= bw && m.total_delay <= d && m.total_jitter <= j && m.interference <= 1.0 - beta;
        for mode in [ClampMode::Strict, ClampMode::Fidelity] {
            let c = PenaltyCoeffs::for_topology(&req, &t, mode);
            let p = penalty(&m, &req, &c).value;
            prop_assert_eq!(p == 0.0, holds);
            if mode == ClampMode::Fidelity {
                prop_assert!((0.0..=1.0).contains(&p));
            }
            let f = |x: &PathMetrics| x.cost + c.lambda * penalty(x, &req, &c).value;
            let worse = [
                PathMetrics { min_bw: (m.min_bw - bump).max(0.0), ..m },
                PathMetrics { total_delay: m.total_delay + bump, ..m },
                PathMetrics { total_jitter: m.total_jitter + bump, ..m },
                PathMetrics { interference: (m.interference + bump / 3.0).min(1.0), ..m },
            ];
            for w in &worse {
                prop_assert!(f(w) >= f(&m));
            }
        }
        Ok(())
    });
    within(
        Duration::from_secs(10),
        start,
        result.is_ok(),
        match result {
            Ok(()) => "1000 (path, request) pairs: zero penalty iff feasible, fidelity p in [0,1], F monotone".into(),
            Err(e) => format!("counterexample: {e}"),
        },
    )
}

fn simulation_calibration() -> Outcome {
    let start = Instant::now();
    let packets = 100_000;
    let mut worst: f64 = 0.0;
    let mut fails = 0;
    for s in 0..50u64 {
        let n = 10 + (s % 6) as usize * 20;
        let tseed = seed::derive(0x51A, s);
        let t = generate_topology(&TopologyParams::new(n, tseed)).unwrap();
        let src = pick_source(&t, tseed).unwrap();
        let gw = t.gateways()[(s as usize) % t.gateways().len()];
        let path = meshroute::graph::shortest_path(&t, src, gw).unwrap();
        let expect: f64 = path
            .windows(2)
            .map(|w| 1.0 - t.link_between(w[0], w[1]).unwrap().loss)
            .product();
        let r = simulate_path(&t, &path, &TrafficSpec { packet_count: packets, seed: s }).unwrap();
        let sigma = (expect * (1.0 - expect) / packets as f64).sqrt();
        let z = if sigma > 0.0 { (r.pdr - expect).abs() / sigma } else { 0.0 };
        worst = worst.max(z);
        if z > 3.0 {
            fails += 1;
        }
    }
    within(
        Duration::from_secs(30),
        start,
        fails == 0,
        format!("50 paths at 1e5 packets: {fails} outside 3 sigma, largest deviation {worst:.2} sigma"),
    )
}

fn continuous_sanity() -> Outcome {
    let start = Instant::now();
    let mut cfg = ContinuousConfig::new(vec![(-100.0, 100.0); 2], 0);
    let mut ok = true;

    cfg.w = 1.0;
    cfg.c1 = 0.0;
    cfg.c2 = 0.0;
    let mut p = RealParticle::new(vec![0.0, 0.0], vec![1.0, 0.0], 0.0);
    pso_step_with(&mut p, &[0.0, 0.0], &cfg, &[0.3], &[0.6]);
    ok &= p.velocity == vec![1.0, 0.0] && p.position == vec![1.0, 0.0];

    cfg.w = 0.7;
    cfg.c1 = 1.5;
    cfg.c2 = 1.5;
    let mut p = RealParticle::new(vec![3.0, -2.0], vec![0.5, 0.25], 0.0);
    pso_step_with(&mut p, &[3.0, -2.0], &cfg, &[0.4], &[0.9]);
    ok &= p.velocity == vec![0.7 * 0.5, 0.7 * 0.25];

    let mut one = ContinuousConfig::new(vec![(-100.0, 100.0)], 0);
    one.w = 0.5;
    one.c1 = 1.0;
    one.c2 = 0.0;
    let mut p = RealParticle::new(vec![0.0], vec![2.0], 0.0);
    p.pbest_position = vec![4.0];
    pso_step_with(&mut p, &[0.0], &one, &[1.0], &[0.5]);
    ok &= p.velocity == vec![5.0] && p.position == vec![5.0];
    let arithmetic = ok;

    let mut reached = 0;
    let mut worst: f64 = 0.0;
    for s in 0..10 {
        let cfg = ContinuousConfig::new(vec![(-10.0, 10.0)], s);
        let r = run_continuous(|x| x[0] * x[0], &cfg).unwrap();
        worst = worst.max(r.best_value);
        if r.best_value < 1e-6 {
            reached += 1;
        }
    }
    ok &= reached == 10;
    within(
        Duration::from_secs(10),
        start,
        ok,
        format!(
            "hand-worked steps {}; x^2 below 1e-6 in {reached}/10 seeds (worst {worst:.2e})",
            if arithmetic { "exact" } else { "MISMATCH" }
        ),
    )
}

fn cli(args: &[&str]) -> std::process::Output {
    let out = Command::new(env!("CARGO_BIN_EXE_meshroute"))
        .args(args)
        .output()
        .expect("running meshroute binary");
    assert!(
        out.status.success(),
        "meshroute {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// CSV text with the named columns removed.
fn without_columns(path: &Path, drop: &[&str]) -> String {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().clone();
    let keep: Vec<usize> = (0..header.len()).filter(|&i| !drop.contains(&&header[i])).collect();
    let mut out = keep.iter().map(|&i| header[i].to_string()).collect::<Vec<_>>().join(",");
    for rec in r.records() {
        let rec = rec.unwrap();
        out.push('\n');
        out += &keep.iter().map(|&i| rec[i].to_string()).collect::<Vec<_>>().join(",");
    }
    out
}

fn strip_wall_time(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Object(m) => {
            m.remove("wall_time_ms");
            m.remove("time_to_best_ms");
            m.values_mut().for_each(strip_wall_time);
        }
        serde_json::Value::Array(a) => a.iter_mut().for_each(strip_wall_time),
        _ => {}
    }
}

fn determinism() -> Outcome {
    let start = Instant::now();
    let mut checks: Vec<(&str, bool)> = Vec::new();

    let params = TopologyParams::new(40, 11);
    let t1 = generate_topology(&params).unwrap();
    let t2 = generate_topology(&params).unwrap();
    checks.push(("generate_topology", t1 == t2 && t1.to_json() == t2.to_json()));

    let req = QosRequest::default();
    let c = PenaltyCoeffs::for_topology(&req, &t1, ClampMode::Strict);
    let src = pick_source(&t1, 5).unwrap();
    let solvers = Algorithm::ALL.iter().all(|&alg| {
        let cfg = HybridConfig::new(alg, 9);
        let a = run(&t1, src, t1.gateways(), &req, &c, &cfg).unwrap();
        let b = run(&t1, src, t1.gateways(), &req, &c, &cfg).unwrap();
        a.same_outcome(&b)
    });
    checks.push(("solvers", solvers));

    let (op, _) = oracle_best(&t2, src, t2.gateways(), &req, &c, 6).unwrap();
    let traffic = TrafficSpec { packet_count: 5000, seed: 3 };
    checks.push((
        "simulator",
        simulate_path(&t1, &op, &traffic).unwrap() == simulate_path(&t1, &op, &traffic).unwrap(),
    ));

    let cc = ContinuousConfig::new(vec![(-5.0, 5.0); 3], 4);
    let f = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
    checks.push(("continuous", run_continuous(f, &cc).unwrap() == run_continuous(f, &cc).unwrap()));

    let plan = ExperimentPlan {
        node_sizes: vec![25, 50],
        seeds_per_cell: 3,
        ..Default::default()
    };
    let a = run_plan(&plan, None).unwrap();
    let b = run_plan(&plan, Some(1)).unwrap();
    checks.push((
        "bench cells",
        a.len() == b.len() && a.iter().zip(&b).all(|(x, y)| x.same_outcome(y)),
    ));

    let dir = tempfile::tempdir().unwrap();
    let d = |name: &str| dir.path().join(name);
    let s = |p: &Path| p.to_str().unwrap().to_string();
    cli(&["gen", "--nodes", "25", "--seed", "42", "--out", &s(&d("a.json"))]);
    cli(&["gen", "--nodes", "25", "--seed", "42", "--out", &s(&d("b.json"))]);
    checks.push((
        "cli gen",
        std::fs::read(d("a.json")).unwrap() == std::fs::read(d("b.json")).unwrap(),
    ));

    let route = |json: bool| {
        let topo = s(&d("a.json"));
        let mut args = vec!["route", topo.as_str(), "--source", "0", "--algorithm", "hybrid", "--seed", "7"];
        if json {
            args.push("--json");
        }
        cli(&args).stdout
    };
    let text_same = route(false) == route(false);
    let parse = |bytes: Vec<u8>| {
        let mut v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
        strip_wall_time(&mut v);
        v
    };
    checks.push(("cli route", text_same && parse(route(true)) == parse(route(true))));

    for out in ["r1", "r2"] {
        cli(&["bench", "--out", &s(&d(out)), "--sizes", "25", "--seeds", "2", "--seed", "3"]);
    }
    let wall = ["time_to_best_ms", "wall_time_ms", "median_time_to_best_ms"];
    let bench_same = ["fitness_trace.csv", "convergence_time.csv", "pdr.csv", "delay.csv", "summary.csv"]
        .iter()
        .all(|f| without_columns(&d("r1").join(f), &wall) == without_columns(&d("r2").join(f), &wall));
    checks.push(("cli bench", bench_same));

    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    Outcome {
        pass: failed.is_empty(),
        detail: format!(
            "{} entry points repeated with equal seeds{}; {:.2} s",
            checks.len(),
            if failed.is_empty() {
                " gave identical output".to_string()
            } else {
                format!(", differing: {}", failed.join(", "))
            },
            start.elapsed().as_secs_f64()
        ),
    }
}

#[test]
fn acceptance_criteria() {
    let mut outcomes: Vec<(u32, &str, Outcome)> = vec![
        (1, "worked-example regression", worked_examples()),
        (2, "oracle equivalence", oracle_equivalence()),
        (3, "convergence dominance", convergence_dominance()),
    ];
    let start = Instant::now();
    let results = sweep();
    outcomes.push((4, "scaling", scaling(&results, start)));
    outcomes.push((5, "PDR/delay dominance", delivery_dominance(&results)));
    outcomes.push((6, "penalty invariants", penalty_invariants()));
    outcomes.push((7, "simulation calibration", simulation_calibration()));
    outcomes.push((8, "continuous sanity", continuous_sanity()));
    outcomes.push((9, "determinism", determinism()));

    for (id, name, o) in &outcomes {
        println!(
            "criterion {id} {} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    let failed: Vec<u32> = outcomes.iter().filter(|o| !o.2.pass).map(|o| o.0).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
