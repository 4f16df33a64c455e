//! The weighted system
//!
//! ```text
//! dt v = -W y dx (W v) + W (1 + g)^2 dy^2 (W v),   W = <delta*ytilde>^-1,
//! ```
//!
//! solved with fourth-order centred differences in physical coordinates and
//! zero values outside the box.

use std::sync::Arc;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{weight_multiply, BracketPower, Field, SobolevIndex};
use crate::grid::{Grid, GridSpec};
use crate::oracle::{cfl_bound, relative_l2};
use crate::stats::loglog_slope;

/// Width of the boundary ring watched for leakage.
const RING: usize = 2;
/// Largest tolerated `|v|` on the boundary ring.
pub const BOUNDARY_TOLERANCE: f64 = 1e-10;

fn at(u: &Array2<f64>, i: isize, j: isize) -> f64 {
    let (nx, ny) = u.dim();
    if i < 0 || j < 0 || i >= nx as isize || j >= ny as isize {
        0.0
    } else {
        u[[i as usize, j as usize]]
    }
}

/// Fourth-order centred `d/dx`.
pub fn dx4(grid: &Grid, u: &Array2<f64>) -> Array2<f64> {
    let h = grid.dx();
    Array2::from_shape_fn(u.dim(), |(i, j)| {
        let (i, j) = (i as isize, j as isize);
        (-at(u, i + 2, j) + 8.0 * at(u, i + 1, j) - 8.0 * at(u, i - 1, j) + at(u, i - 2, j)) / (12.0 * h)
    })
}

/// Fourth-order centred `d^2/dy^2`.
pub fn dyy4(grid: &Grid, u: &Array2<f64>) -> Array2<f64> {
    let h = grid.dy();
    Array2::from_shape_fn(u.dim(), |(i, j)| {
        let (i, j) = (i as isize, j as isize);
        (-at(u, i, j + 2) + 16.0 * at(u, i, j + 1) - 30.0 * at(u, i, j) + 16.0 * at(u, i, j - 1)
            - at(u, i, j - 2))
            / (12.0 * h * h)
    })
}

/// `-y dx v + (1 + g)^2 dy^2 v` with the same stencils as [`modified_rhs`].
pub fn unweighted_rhs(grid: &Grid, v: &Array2<f64>, g: Option<&Array2<f64>>) -> Result<Array2<f64>> {
    grid.check_shape(v.dim())?;
    let ddx = dx4(grid, v);
    let ddy = dyy4(grid, v);
    Ok(combine(grid, &ddx, &ddy, g))
}

fn combine(grid: &Grid, ddx: &Array2<f64>, ddy: &Array2<f64>, g: Option<&Array2<f64>>) -> Array2<f64> {
    Array2::from_shape_fn(ddx.dim(), |(i, j)| {
        let a = g.map_or(1.0, |g| (1.0 + g[[i, j]]) * (1.0 + g[[i, j]]));
        -grid.y(j) * ddx[[i, j]] + a * ddy[[i, j]]
    })
}

/// Right-hand side of the weighted system. At `delta = 0` the weight is
/// exactly one and the result equals [`unweighted_rhs`] bit for bit.
pub fn modified_rhs(
    grid: &Grid,
    v: &Array2<f64>,
    g: Option<&Array2<f64>>,
    delta: f64,
) -> Result<Array2<f64>> {
    let u = weight_multiply(grid, v, delta, BracketPower::Minus)?;
    let inner = unweighted_rhs(grid, &u, g)?;
    weight_multiply(grid, &inner, delta, BracketPower::Minus)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModifiedConfig {
    pub grid: GridSpec,
    pub t_final: f64,
    /// Fraction of the explicit stability bound used as time step.
    pub safety: f64,
    pub save_every: usize,
}

impl ModifiedConfig {
    pub fn new(grid: GridSpec, t_final: f64) -> Self {
        ModifiedConfig {
            grid,
            t_final,
            safety: 0.5,
            save_every: 1,
        }
    }
}

/// A time-dependent physical coefficient `g(t)` for the weighted system.
pub type PhysicalCoefficient<'a> = &'a (dyn Fn(f64) -> Array2<f64> + Sync);

#[derive(Clone, Debug)]
pub struct DeltaRun {
    pub delta: f64,
    pub grid: Arc<Grid>,
    pub dt: f64,
    pub times: Vec<f64>,
    pub samples: Vec<Array2<f64>>,
    /// `sup_t ||v||^2_{H^4} + 1/4 int_0^t ||dy (W v)||^2_{H^4}`.
    pub bound_functional: f64,
}

fn boundary_sup(v: &Array2<f64>) -> f64 {
    let (nx, ny) = v.dim();
    let mut m = 0.0_f64;
    for ((i, j), x) in v.indexed_iter() {
        if i < RING || j < RING || i >= nx - RING || j >= ny - RING {
            m = m.max(x.abs());
        }
    }
    m
}

fn norms(grid: &Arc<Grid>, v: &Array2<f64>, delta: f64) -> Result<(f64, f64)> {
    let h4 = Field::to_spectral(grid, v)?.sobolev_norm_sq(SobolevIndex::H4);
    let u = weight_multiply(grid, v, delta, BracketPower::Minus)?;
    let d = Field::to_spectral(grid, &u)?.dy_sobolev_norm_sq(SobolevIndex::H4);
    Ok((h4, d))
}

/// Solve the weighted system from `<delta*ytilde>^-1 v0` with explicit midpoint RK2.
pub fn solve_modified(
    v0: &Array2<f64>,
    g: Option<PhysicalCoefficient<'_>>,
    delta: f64,
    config: &ModifiedConfig,
) -> Result<DeltaRun> {
    let grid = config.grid.build()?;
    grid.check_shape(v0.dim())?;
    if !(config.t_final > 0.0) || !(config.safety > 0.0 && config.safety <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "modified run needs t_final > 0 and safety in (0, 1], got {} and {}",
            config.t_final, config.safety
        )));
    }
    let mut v = weight_multiply(&grid, v0, delta, BracketPower::Minus)?;
    let bound = cfl_bound(&grid, &v, g.is_some()) * config.safety;
    let steps = (config.t_final / bound).ceil().max(1.0) as usize;
    let dt = config.t_final / steps as f64;

    let (h4, d) = norms(&grid, &v, delta)?;
    let mut functional = h4;
    let mut integral = 0.0;
    let mut last_d = d;
    let mut times = vec![0.0];
    let mut samples = vec![v.clone()];
    for n in 1..=steps {
        let t = (n - 1) as f64 * dt;
        let g0 = g.map(|g| g(t));
        let gh = g.map(|g| g(t + 0.5 * dt));
        let k1 = modified_rhs(&grid, &v, g0.as_ref(), delta)?;
        let mut half = v.clone();
        half.scaled_add(0.5 * dt, &k1);
        let k2 = modified_rhs(&grid, &half, gh.as_ref(), delta)?;
        v.scaled_add(dt, &k2);

        let tn = n as f64 * dt;
        let leak = boundary_sup(&v);
        if leak > BOUNDARY_TOLERANCE || !leak.is_finite() {
            return Err(Error::BoundaryLeak { t: tn, value: leak });
        }
        let (h4, d) = norms(&grid, &v, delta)?;
        integral += 0.5 * dt * (last_d + d);
        last_d = d;
        functional = functional.max(h4 + 0.25 * integral);
        if n % config.save_every == 0 || n == steps {
            times.push(tn);
            samples.push(v.clone());
        }
    }
    Ok(DeltaRun {
        delta,
        grid,
        dt,
        times,
        samples,
        bound_functional: functional,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaRow {
    pub delta: f64,
    pub bound_functional: f64,
    /// `sup_t ||v_delta - v||_2 / ||v||_2` against the unweighted run.
    pub distance_to_limit: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaSweep {
    pub rows: Vec<DeltaRow>,
    /// `max bound / ||v0||^2_{H^4}` across the sweep.
    pub b0: f64,
    /// `max bound / min bound`.
    pub uniformity: f64,
    /// Log-log slope of distance against delta.
    pub slope: f64,
}

fn distance(run: &DeltaRun, limit: &DeltaRun) -> f64 {
    let mut worst = 0.0_f64;
    for (t, v) in run.times.iter().zip(&run.samples) {
        if let Some(k) = limit.times.iter().position(|s| (s - t).abs() < 1e-12) {
            worst = worst.max(relative_l2(v, &limit.samples[k]));
        }
    }
    worst
}

/// Solve for each `delta` and compare with the `delta = 0` run on the same
/// grid and time step.
pub fn delta_sweep(v0: &Array2<f64>, deltas: &[f64], config: &ModifiedConfig) -> Result<DeltaSweep> {
    if deltas.len() < 3 || deltas.windows(2).any(|w| w[1] >= w[0]) || deltas.iter().any(|&d| !(d > 0.0)) {
        return Err(Error::InvalidArgument(
            "delta sweep needs at least three positive, decreasing values".into(),
        ));
    }
    let grid = config.grid.build()?;
    let limit = solve_modified(v0, None, 0.0, config)?;
    let exec = grid.exec();
    let runs = exec.map(deltas, |&d| solve_modified(v0, None, d, config));
    let mut rows = Vec::with_capacity(deltas.len());
    for run in runs {
        let run = run?;
        rows.push(DeltaRow {
            delta: run.delta,
            bound_functional: run.bound_functional,
            distance_to_limit: distance(&run, &limit),
        });
    }
    let v0_norm = Field::to_spectral(&grid, v0)?.sobolev_norm_sq(SobolevIndex::H4);
    let bounds: Vec<f64> = rows.iter().map(|r| r.bound_functional).collect();
    let max = bounds.iter().copied().fold(0.0, f64::max);
    let min = bounds.iter().copied().fold(f64::INFINITY, f64::min);
    let b0 = if v0_norm > 0.0 { max / v0_norm } else { 0.0 };
    let uniformity = if max == 0.0 { 1.0 } else { max / min };
    let xs: Vec<f64> = rows.iter().map(|r| r.delta).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.distance_to_limit).collect();
    Ok(DeltaSweep {
        rows,
        b0,
        uniformity,
        slope: loglog_slope(&xs, &ys),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencils_are_fourth_order_exact_on_cubics() {
        let grid = Grid::new(16, 16, 8.0, 8.0).unwrap();
        let u = grid.sample(|x, y| x * x * x + y * y * y);
        let dx = dx4(&grid, &u);
        let dyy = dyy4(&grid, &u);
        let (i, j) = (7, 9);
        assert!((dx[[i, j]] - 3.0 * grid.x(i).powi(2)).abs() < 1e-12);
        assert!((dyy[[i, j]] - 6.0 * grid.y(j)).abs() < 1e-12);
    }

    #[test]
    fn zero_delta_is_bitwise_unweighted() {
        let grid = Grid::new(16, 16, 4.0, 4.0).unwrap();
        let v = grid.sample(|x, y| (-(x * x + y * y)).exp());
        let a = modified_rhs(&grid, &v, None, 0.0).unwrap();
        let b = unweighted_rhs(&grid, &v, None).unwrap();
        assert!(a.iter().zip(&b).all(|(p, q)| p.to_bits() == q.to_bits()));
    }
}
