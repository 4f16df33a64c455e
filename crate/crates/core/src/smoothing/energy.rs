use serde::{Deserialize, Serialize};

use crate::solver::Trajectory;

/// The energy functional `||v(t)||^2_{H^4} + 1/4 int_0^t ||dy v||^2_{H^4}` along a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyCertificate {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub sup: f64,
    /// `sup / eps^2`.
    pub b0: f64,
}

/// Read the functional off the node records and scale it by `eps^2`.
pub fn energy_certificate(traj: &Trajectory, eps: f64) -> EnergyCertificate {
    let times: Vec<f64> = traj.nodes.iter().map(|r| r.t).collect();
    let values: Vec<f64> = traj.nodes.iter().map(|r| r.energy).collect();
    let sup = values.iter().copied().fold(0.0, f64::max);
    EnergyCertificate {
        times,
        values,
        sup,
        b0: if eps > 0.0 { sup / (eps * eps) } else { 0.0 },
    }
}
