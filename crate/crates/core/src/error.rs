use thiserror::Error;

use crate::graph::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid topology parameters: {0}")]
    InvalidParams(String),

    #[error("invalid topology: {0}")]
    InvalidTopology(String),

    #[error("node {0} does not exist in the topology")]
    UnknownNode(NodeId),

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("path enumeration exceeded the cap of {cap} paths")]
    PathCapExceeded { cap: usize },

    #[error("no gateway is reachable from node {0}")]
    Unreachable(NodeId),

    #[error("invalid QoS request: {0}")]
    InvalidRequest(String),

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
}
