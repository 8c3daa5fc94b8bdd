use meshroute::qos::{ClampMode, PenaltyCoeffs, QosRequest};
use meshroute::{HybridConfig, MeshTopology};
use serde::{Deserialize, Serialize};

/// Penalty mode plus an optional fixed `lambda`. The normalisers are derived
/// from the request; `lambda` defaults to the mode's rule for the topology.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PenaltySettings {
    pub mode: ClampMode,
    pub lambda: Option<f64>,
}

impl PenaltySettings {
    pub fn coeffs(&self, req: &QosRequest, topo: &MeshTopology) -> PenaltyCoeffs {
        let mut c = PenaltyCoeffs::for_topology(req, topo, self.mode);
        if let Some(l) = self.lambda {
            c.lambda = l;
        }
        c
    }
}

/// Everything `route` needs besides the topology and the source.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RouteSettings {
    pub request: QosRequest,
    pub penalty: PenaltySettings,
    pub solver: HybridConfig,
}
