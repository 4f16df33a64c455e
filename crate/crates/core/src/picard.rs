//! Picard iteration: solve the linearized equation with the previous iterate
//! as coefficient until successive differences fall below a tolerance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, SobolevIndex};
use crate::solver::{integrate, linearized_step, NodeCoefficient, SolveConfig, Trajectory};
use crate::stats::line_fit;

/// Size of one successive difference `zeta^n = v^{n+1} - v^n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZetaRecord {
    pub n: usize,
    /// `sup_t ||zeta(t)||^2_{H^4}` over solver nodes.
    pub zeta_sup: f64,
    /// `int_0^T ||dy zeta||^2_{H^4}` (trapezoidal).
    pub zeta_dissip: f64,
    /// `zeta_sup + zeta_dissip / 8`.
    pub measure: f64,
    /// `measure(n) / measure(n - 1)`; absent for the first difference.
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct PicardRun {
    /// The last iterate, i.e. the constructed solution.
    pub limit: Trajectory,
    pub zeta: Vec<ZetaRecord>,
    /// Energy functional sup of each computed iterate `v^1, v^2, ...`.
    pub iterate_energy: Vec<f64>,
    pub converged: bool,
    /// Number of linearized solves performed.
    pub iterations: usize,
    pub tol: f64,
}

impl PicardRun {
    pub fn ratios(&self) -> Vec<f64> {
        self.zeta.iter().filter_map(|z| z.ratio).collect()
    }
}

/// Iterate `dt v^n + y dx v^n - (1 + v^{n-1})^2 dy^2 v^n = 0` from the
/// time-constant extension `v^0(t) = v0`.
///
/// Iterates are kept at solver nodes only, two at a time.
pub fn picard_solve(v0: &Field, config: &SolveConfig, n_max: usize, tol: f64) -> Result<PicardRun> {
    config.validate()?;
    if n_max < 2 {
        return Err(Error::InvalidArgument(format!("n_max = {n_max} must be at least 2")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tol = {tol} must be positive")));
    }
    let grid = v0.grid().clone();
    let steps = config.steps();
    let times: Vec<f64> = (0..=steps).map(|n| config.node_time(n)).collect();
    let physical = v0.to_physical();
    let mut prev = NodeCoefficient::time_constant(&grid, &physical, &times)?;
    let v0 = v0.clone().with_time(0.0);
    let opts = config.step_options();

    let mut zeta: Vec<ZetaRecord> = Vec::new();
    let mut iterate_energy = Vec::new();
    let mut above_one = 0;
    let mut limit = None;
    let mut converged = false;
    let mut iterations = 0;

    for n in 1..=n_max {
        let mut nodes = Vec::with_capacity(times.len());
        let mut sup = 0.0_f64;
        let mut dissip = 0.0;
        let mut last_d: Option<(f64, f64)> = None;
        let traj = integrate(
            &v0,
            config,
            |v, dt| linearized_step(v, &prev, dt, &opts),
            |k, field| {
                let z = field.sub(&prev.fields()[k]).expect("same grid");
                sup = sup.max(z.sobolev_norm_sq(SobolevIndex::H4));
                let d = z.dy_sobolev_norm_sq(SobolevIndex::H4);
                if let Some((t0, d0)) = last_d {
                    dissip += 0.5 * (field.t() - t0) * (d0 + d);
                }
                last_d = Some((field.t(), d));
                nodes.push(field.clone());
            },
        )?;
        iterations = n;
        iterate_energy.push(traj.energy_sup());
        let measure = sup + dissip / 8.0;
        let ratio = zeta.last().map(|z: &ZetaRecord| {
            if z.measure > 0.0 {
                measure / z.measure
            } else {
                0.0
            }
        });
        log::info!("picard iteration {n}: zeta measure {measure:.3e}");
        zeta.push(ZetaRecord {
            n: n - 1,
            zeta_sup: sup,
            zeta_dissip: dissip,
            measure,
            ratio,
        });
        prev = NodeCoefficient::new(nodes);
        limit = Some(traj);
        if measure < tol {
            converged = true;
            break;
        }
        match ratio {
            Some(r) if r >= 1.0 => {
                above_one += 1;
                if above_one >= 3 {
                    return Err(Error::NonContraction {
                        iteration: n,
                        ratio: r,
                    });
                }
            }
            _ => above_one = 0,
        }
    }
    Ok(PicardRun {
        limit: limit.expect("n_max >= 2 iterations ran"),
        zeta,
        iterate_energy,
        converged,
        iterations,
        tol,
    })
}

/// Summary of a Picard run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    pub zeta: Vec<ZetaRecord>,
    /// Geometric ratio fitted by least squares on `log measure`; 0 for a zero run.
    pub fitted_ratio: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Geometric rate of a sequence from a least-squares line through its logarithms.
///
/// Returns 0 when the sequence reaches zero or when fewer than two positive
/// terms exist.
pub fn fitted_ratio(measures: &[f64]) -> f64 {
    if measures.contains(&0.0) || measures.len() < 2 {
        return 0.0;
    }
    let pts: Vec<(f64, f64)> = measures
        .iter()
        .enumerate()
        .map(|(n, m)| (n as f64, m.ln()))
        .collect();
    line_fit(&pts).map_or(0.0, |(_, s)| s.exp())
}

pub fn contraction_report(run: &PicardRun) -> ContractionReport {
    let measures: Vec<f64> = run.zeta.iter().map(|z| z.measure).collect();
    ContractionReport {
        zeta: run.zeta.clone(),
        fitted_ratio: fitted_ratio(&measures),
        converged: run.converged,
        iterations: run.iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_sequence_gives_its_ratio() {
        assert!((fitted_ratio(&[1.0, 0.25, 0.0625]) - 0.25).abs() < 1e-12);
        assert_eq!(fitted_ratio(&[0.0]), 0.0);
        assert_eq!(fitted_ratio(&[3.0, 0.0]), 0.0);
    }
}
