//! Python bindings: topologies, route search, the exhaustive oracle and the
//! packet simulator. Structured results come back as plain dicts.

use meshroute::graph::{self, generate_topology, MeshTopology, NodeId, TopologyParams};
use meshroute::qos::{self, ClampMode, PenaltyCoeffs, QosRequest};
use meshroute::sim::{simulate_path, TrafficSpec};
use meshroute::{Algorithm, HybridConfig};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyAny;
use serde::Serialize;

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(err)?;
    py.import("json")?.call_method1("loads", (text,))
}

fn ids(path: &[usize]) -> Vec<NodeId> {
    path.iter().map(|&n| NodeId(n)).collect()
}

fn plain(path: &[NodeId]) -> Vec<usize> {
    path.iter().map(|n| n.0).collect()
}

/// An immutable mesh topology.
#[pyclass(name = "Topology", module = "meshroute", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyTopology {
    inner: MeshTopology,
}

#[pymethods]
impl PyTopology {
    /// Random geometric topology with `nodes` nodes. Unset options keep the
    /// generator defaults.
    #[staticmethod]
    #[pyo3(signature = (nodes, seed=0, gateways=None, range=None, radios=None, ifactor_aggregate=None))]
    fn generate(
        nodes: usize,
        seed: u64,
        gateways: Option<usize>,
        range: Option<f64>,
        radios: Option<usize>,
        ifactor_aggregate: Option<&str>,
    ) -> PyResult<Self> {
        let mut p = TopologyParams::new(nodes, seed);
        if let Some(g) = gateways {
            p.gateway_count = g;
        }
        if let Some(r) = range {
            p.transmission_range = r;
        }
        if let Some(r) = radios {
            p.radios_per_node = r;
        }
        if let Some(a) = ifactor_aggregate {
            p.ifactor_aggregate =
                serde_json::from_value(serde_json::Value::String(a.into())).map_err(err)?;
        }
        Ok(PyTopology {
            inner: generate_topology(&p).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyTopology {
            inner: MeshTopology::from_json(text).map_err(err)?,
        })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn node_count(&self) -> usize {
        self.inner.node_count()
    }

    #[getter]
    fn link_count(&self) -> usize {
        self.inner.links().len()
    }

    #[getter]
    fn gateways(&self) -> Vec<usize> {
        plain(self.inner.gateways())
    }

    /// Links as dicts with endpoints, channel and weights.
    fn links<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.links())
    }

    fn neighbors(&self, node: usize) -> Vec<usize> {
        self.inner.neighbors(NodeId(node)).map(|(n, _)| n.0).collect()
    }

    fn is_connected(&self) -> bool {
        self.inner.is_connected()
    }

    /// True if `path` is a simple walk over existing links (and, with
    /// `require_gateway`, ends at a gateway).
    #[pyo3(signature = (path, require_gateway=true))]
    fn validate_path(&self, path: Vec<usize>, require_gateway: bool) -> bool {
        graph::validate_path(&self.inner, &ids(&path), require_gateway)
    }

    /// Least total link cost between two nodes, or None if disconnected.
    fn shortest_path_cost(&self, source: usize, target: usize) -> PyResult<Option<f64>> {
        graph::shortest_path_cost(&self.inner, NodeId(source), NodeId(target)).map_err(err)
    }

    /// Cost, bottleneck bandwidth, total delay and jitter, mean interference
    /// and hop count of a path.
    fn path_metrics<'py>(&self, py: Python<'py>, path: Vec<usize>) -> PyResult<Bound<'py, PyAny>> {
        let m = qos::path_metrics(&self.inner, &ids(&path)).map_err(err)?;
        to_py(py, &m)
    }

    fn __repr__(&self) -> String {
        format!(
            "Topology(nodes={}, links={}, gateways={:?})",
            self.inner.node_count(),
            self.inner.links().len(),
            plain(self.inner.gateways())
        )
    }
}

fn parse_mode(mode: &str) -> PyResult<ClampMode> {
    match mode {
        "strict" => Ok(ClampMode::Strict),
        "fidelity" => Ok(ClampMode::Fidelity),
        other => Err(PyValueError::new_err(format!(
            "penalty_mode must be 'strict' or 'fidelity', got {other:?}"
        ))),
    }
}

fn problem(
    topo: &MeshTopology,
    bw_req: f64,
    delay_req: f64,
    jitter_req: f64,
    beta: f64,
    penalty_mode: &str,
    lam: Option<f64>,
) -> PyResult<(QosRequest, PenaltyCoeffs)> {
    let req = QosRequest {
        bw_req,
        d_req: delay_req,
        j_req: jitter_req,
        beta,
    };
    req.validate().map_err(err)?;
    let mut coeffs = PenaltyCoeffs::for_topology(&req, topo, parse_mode(penalty_mode)?);
    if let Some(l) = lam {
        coeffs.lambda = l;
    }
    coeffs.validate().map_err(err)?;
    Ok((req, coeffs))
}

/// Searches for a QoS route from `source` to any gateway. Returns the run
/// record: best path, fitness breakdown, per-iteration traces and timings.
#[pyfunction]
#[pyo3(signature = (
    topology, source, algorithm="hybrid", seed=0, bw_req=2.0, delay_req=10.0,
    jitter_req=10.0, beta=0.5, penalty_mode="strict", lam=None,
    swarm_size=None, iterations=None
))]
#[allow(clippy::too_many_arguments)]
fn route<'py>(
    py: Python<'py>,
    topology: &PyTopology,
    source: usize,
    algorithm: &str,
    seed: u64,
    bw_req: f64,
    delay_req: f64,
    jitter_req: f64,
    beta: f64,
    penalty_mode: &str,
    lam: Option<f64>,
    swarm_size: Option<usize>,
    iterations: Option<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    let topo = &topology.inner;
    let (req, coeffs) = problem(topo, bw_req, delay_req, jitter_req, beta, penalty_mode, lam)?;
    let alg: Algorithm = algorithm.parse().map_err(err)?;
    let mut config = HybridConfig::new(alg, seed);
    if let Some(n) = swarm_size {
        config.swarm_size = n;
    }
    if let Some(n) = iterations {
        config.max_iterations = n;
    }
    let result = py
        .detach(|| meshroute::run(topo, NodeId(source), topo.gateways(), &req, &coeffs, &config))
        .map_err(err)?;
    to_py(py, &result)
}

/// Exhaustive minimum-fitness route with at most `max_hops` links (default
/// n - 1). Returns `(path, fitness_breakdown)`.
#[pyfunction]
#[pyo3(signature = (
    topology, source, bw_req=2.0, delay_req=10.0, jitter_req=10.0, beta=0.5,
    penalty_mode="strict", lam=None, max_hops=None
))]
#[allow(clippy::too_many_arguments)]
fn oracle<'py>(
    py: Python<'py>,
    topology: &PyTopology,
    source: usize,
    bw_req: f64,
    delay_req: f64,
    jitter_req: f64,
    beta: f64,
    penalty_mode: &str,
    lam: Option<f64>,
    max_hops: Option<usize>,
) -> PyResult<(Vec<usize>, Bound<'py, PyAny>)> {
    let topo = &topology.inner;
    let (req, coeffs) = problem(topo, bw_req, delay_req, jitter_req, beta, penalty_mode, lam)?;
    let hops = max_hops.unwrap_or(topo.node_count().saturating_sub(1));
    let (path, best) = py
        .detach(|| qos::oracle_best(topo, NodeId(source), topo.gateways(), &req, &coeffs, hops))
        .map_err(err)?;
    Ok((plain(&path), to_py(py, &best)?))
}

/// Sends `packets` packets along `path` with independent per-link loss.
#[pyfunction]
#[pyo3(signature = (topology, path, packets=10_000, seed=0))]
fn simulate<'py>(
    py: Python<'py>,
    topology: &PyTopology,
    path: Vec<usize>,
    packets: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let traffic = TrafficSpec {
        packet_count: packets,
        seed,
    };
    let r = simulate_path(&topology.inner, &ids(&path), &traffic).map_err(err)?;
    to_py(py, &r)
}

/// Overlap between two channels `separation` apart.
#[pyfunction]
fn interference_factor(separation: u32) -> f64 {
    graph::interference_factor(separation)
}

#[pymodule]
#[pyo3(name = "meshroute")]
pub fn meshroute_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTopology>()?;
    m.add_function(wrap_pyfunction!(route, m)?)?;
    m.add_function(wrap_pyfunction!(oracle, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(interference_factor, m)?)?;
    Ok(())
}
