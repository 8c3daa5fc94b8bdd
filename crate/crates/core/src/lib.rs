//! QoS-constrained, interference-aware route search for multi-channel
//! multi-radio wireless mesh networks.
//!
//! The crate is organised bottom-up:
//!
//! * [`graph`] holds the mesh topology model, the random-geometric generator,
//!   shortest-path helpers and an exhaustive simple-path enumerator.
//! * [`qos`] aggregates per-link weights along a path and turns QoS
//!   violations into a penalised fitness value.
//! * [`optim`] contains the discrete path-domain solvers: the hybrid
//!   PSO-GA and the pure PSO and pure GA baselines.
//! * [`continuous`] is the real-valued PSO / VPAC breeding-swarm loop used as
//!   a sanity reference for the hybrid scheme.
//! * [`sim`] pushes packets through a chosen route to estimate delivery ratio
//!   and end-to-end delay.

pub mod continuous;
pub mod error;
pub mod graph;
pub mod optim;
pub mod qos;
pub mod seed;
pub mod sim;

pub use error::{Error, Result};
pub use graph::{
    enumerate_simple_paths, generate_topology, interference_factor, pick_source, shortest_path_cost,
    validate_path, IfactorAggregate, InterferenceTable, Link, MeshTopology, Node, NodeId, TopologyParams,
};
pub use optim::{run, Algorithm, HybridConfig, Particle, RunResult};
pub use qos::{
    fitness, oracle_best, path_metrics, penalty, ClampMode, FitnessBreakdown, PathMetrics,
    PenaltyCoeffs, QosRequest,
};
pub use sim::{evaluate_routing, simulate_path, SimResult, TrafficSpec};
