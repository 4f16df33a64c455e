//! Analyticity radius from the exponential decay rate of Fourier coefficients.
//!
//! Along each axis the envelope `E(k)` is the largest coefficient modulus over
//! all transverse modes whose physical frequency falls in the bin of `|k|`.
//! The model `log E = c - rho |k| - p log <k>` is fitted by least squares over
//! the middle decade (in `log |k|`) of resolved bins, where resolved means
//! `E > 1e-13 max E`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::field::Field;
use crate::solver::Trajectory;
use crate::stats::{least_squares, line_fit};

const FLOOR: f64 = 1e-14;
const RESOLVED: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Radii {
    pub rho_x: f64,
    pub rho_y: f64,
}

/// Envelope along one physical axis: `(|k|, E)` per occupied bin, `k > 0`.
fn envelope(f: &Field, axis_x: bool) -> Vec<(f64, f64)> {
    let grid = f.grid();
    let (nx, ny) = grid.shape();
    let step = if axis_x {
        std::f64::consts::PI / grid.lx()
    } else {
        std::f64::consts::PI / grid.ly()
    };
    let mut bins: Vec<f64> = Vec::new();
    for i in 0..nx {
        for j in 0..ny {
            if !grid.survives_dealias(i, j) {
                continue;
            }
            let k = if axis_x { grid.kx()[i] } else { f.sigma(i, j) };
            let b = (k.abs() / step).round() as usize;
            if b >= bins.len() {
                bins.resize(b + 1, 0.0);
            }
            bins[b] = bins[b].max(f.coeffs()[[i, j]].norm());
        }
    }
    bins.iter()
        .enumerate()
        .skip(1)
        .filter(|(_, e)| **e > 0.0)
        .map(|(b, e)| (b as f64 * step, *e))
        .collect()
}

/// Decay rate along one axis, clamped at zero.
fn decay_rate(points: &[(f64, f64)]) -> f64 {
    let peak = points.iter().fold(0.0_f64, |m, p| m.max(p.1));
    let resolved: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|p| p.1 > RESOLVED * peak)
        .collect();
    if resolved.len() < 2 {
        return 0.0;
    }
    let lo = resolved.iter().fold(f64::INFINITY, |m, p| m.min(p.0)).ln();
    let hi = resolved.iter().fold(0.0_f64, |m, p| m.max(p.0)).ln();
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * std::f64::consts::LN_10;
    let window: Vec<(f64, f64)> = resolved
        .into_iter()
        .filter(|p| (p.0.ln() - mid).abs() <= half)
        .collect();
    let rho = if window.len() >= 4 {
        let design = DMatrix::from_fn(window.len(), 3, |r, c| match c {
            0 => 1.0,
            1 => -window[r].0,
            _ => -(1.0 + window[r].0 * window[r].0).sqrt().ln(),
        });
        let rhs = DVector::from_iterator(window.len(), window.iter().map(|p| p.1.ln()));
        least_squares(&design, &rhs).map_or(0.0, |b| b[1])
    } else {
        let pts: Vec<(f64, f64)> = window.iter().map(|p| (p.0, p.1.ln())).collect();
        line_fit(&pts).map_or(0.0, |(_, s)| -s)
    };
    if rho.is_finite() {
        rho.max(0.0)
    } else {
        0.0
    }
}

/// Fitted decay rates along the physical `kx` and `ky - t kx` axes. A field
/// with every coefficient below `1e-14` has infinite radii.
pub fn analyticity_radius(f: &Field) -> Radii {
    if f.max_abs() < FLOOR {
        return Radii {
            rho_x: f64::INFINITY,
            rho_y: f64::INFINITY,
        };
    }
    Radii {
        rho_x: decay_rate(&envelope(f, true)),
        rho_y: decay_rate(&envelope(f, false)),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusRow {
    pub t: f64,
    pub rho_x: f64,
    pub rho_y: f64,
}

/// Radii at every stored time of `traj`.
pub fn radius_series(traj: &Trajectory) -> Vec<RadiusRow> {
    let exec = traj.fields.first().map(|f| f.grid().exec()).unwrap_or_default();
    exec.map(&traj.fields, |f| {
        let r = analyticity_radius(f);
        RadiusRow {
            t: f.t(),
            rho_x: r.rho_x,
            rho_y: r.rho_y,
        }
    })
}
