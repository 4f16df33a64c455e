//! Finite-difference reference solver in physical coordinates.
//!
//! First-order upwind in `x` for `y dx`, second-order centred in `y` for the
//! diffusion, explicit Euler in time, zero values outside the box. It shares
//! nothing with the spectral path except the grid geometry.

use std::sync::Arc;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridSpec};
use crate::solver::{Scheme, SolveConfig};
use crate::stats::loglog_slope;

/// Physical sample arrays at the saved times of an oracle run.
#[derive(Clone, Debug)]
pub struct OracleTrajectory {
    pub grid: Arc<Grid>,
    pub times: Vec<f64>,
    pub samples: Vec<Array2<f64>>,
}

impl OracleTrajectory {
    pub fn last(&self) -> &Array2<f64> {
        self.samples.last().expect("initial state is always stored")
    }
}

fn diffusion(v: f64, nonlinear: bool) -> f64 {
    if nonlinear {
        (1.0 + v) * (1.0 + v)
    } else {
        1.0
    }
}

/// Largest stable explicit step for the current state.
pub fn cfl_bound(grid: &Grid, v: &Array2<f64>, nonlinear: bool) -> f64 {
    let ymax = (0..grid.ny()).fold(0.0_f64, |m, j| m.max(grid.y(j).abs()));
    let amax = v.iter().fold(0.0_f64, |m, &x| m.max(diffusion(x, nonlinear)));
    let transport = grid.dx() / ymax;
    let dy = grid.dy();
    transport.min(dy * dy / (2.0 * amax))
}

fn euler_step(grid: &Grid, v: &Array2<f64>, dt: f64, nonlinear: bool) -> Array2<f64> {
    let (nx, ny) = grid.shape();
    let (dx, dy) = (grid.dx(), grid.dy());
    let at = |i: isize, j: isize| -> f64 {
        if i < 0 || j < 0 || i >= nx as isize || j >= ny as isize {
            0.0
        } else {
            v[[i as usize, j as usize]]
        }
    };
    let rows = grid.exec().map_range(nx, |i| {
        let ii = i as isize;
        (0..ny)
            .map(|j| {
                let jj = j as isize;
                let y = grid.y(j);
                let c = v[[i, j]];
                let dxv = if y > 0.0 {
                    (c - at(ii - 1, jj)) / dx
                } else {
                    (at(ii + 1, jj) - c) / dx
                };
                let dyy = (at(ii, jj + 1) - 2.0 * c + at(ii, jj - 1)) / (dy * dy);
                c + dt * (-y * dxv + diffusion(c, nonlinear) * dyy)
            })
            .collect::<Vec<f64>>()
    });
    Array2::from_shape_vec((nx, ny), rows.concat()).expect("row lengths match")
}

/// Run the reference solver from physical samples `v0`.
///
/// Uses `config.dt` as is and refuses it if it violates the explicit
/// stability bound. The full nonlinear coefficient is used for the
/// nonlinear scheme, the unit coefficient otherwise.
pub fn fd_oracle_solve(v0: &Array2<f64>, config: &SolveConfig) -> Result<OracleTrajectory> {
    config.validate()?;
    let grid = config.grid.build()?;
    grid.check_shape(v0.dim())?;
    let nonlinear = config.scheme == Scheme::ImexNonlinear;
    let steps = config.steps();
    let dt = config.t_final / steps as f64;
    let mut v = v0.clone();
    let mut times = vec![0.0];
    let mut samples = vec![v.clone()];
    for n in 1..=steps {
        let bound = cfl_bound(&grid, &v, nonlinear);
        if dt > bound {
            return Err(Error::Cfl { dt, bound });
        }
        v = euler_step(&grid, &v, dt, nonlinear);
        if n % config.save_every == 0 || n == steps {
            times.push(config.node_time(n));
            samples.push(v.clone());
        }
    }
    Ok(OracleTrajectory {
        grid,
        times,
        samples,
    })
}

/// `||a - b||_2 / ||b||_2` over samples (0 when both vanish).
pub fn relative_l2(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in a.iter().zip(b) {
        num += (x - y) * (x - y);
        den += y * y;
    }
    if num == 0.0 {
        0.0
    } else {
        (num / den).sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    T,
}

/// Successive-difference convergence study on nested refinements.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub axis: Axis,
    /// Mesh parameter (dx, dy or dt) of each run, coarse to fine.
    pub spacing: Vec<f64>,
    /// `||u_h - u_{h/2}||_2` restricted to the coarsest grid, scaled by the cell area.
    pub differences: Vec<f64>,
    pub slope: f64,
}

/// Samples of `fine` at the points of a grid coarser by `(rx, ry)`.
fn restrict(fine: &Array2<f64>, rx: usize, ry: usize) -> Array2<f64> {
    let (nx, ny) = fine.dim();
    Array2::from_shape_fn((nx / rx, ny / ry), |(i, j)| fine[[i * rx, j * ry]])
}

fn l2(a: &Array2<f64>, b: &Array2<f64>, cell: f64) -> f64 {
    (a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() * cell).sqrt()
}

/// Refine `base` three times along `axis` (each refinement halves the mesh
/// parameter) and fit the order from successive differences.
///
/// Refining `y` keeps `dt / dy^2` fixed so the time error follows the
/// spatial one.
pub fn self_convergence(
    init: impl Fn(f64, f64) -> f64,
    base: &SolveConfig,
    axis: Axis,
) -> Result<ConvergenceStudy> {
    let mut finals = Vec::new();
    let mut spacing = Vec::new();
    for level in 0..3u32 {
        let f = 1usize << level;
        let mut cfg = base.clone();
        let GridSpec { nx, ny, .. } = base.grid;
        match axis {
            Axis::X => cfg.grid.nx = nx * f,
            Axis::Y => {
                cfg.grid.ny = ny * f;
                cfg.dt = base.dt / (f * f) as f64;
            }
            Axis::T => cfg.dt = base.dt / f as f64,
        }
        cfg.save_every = usize::MAX;
        let grid = cfg.grid.build()?;
        spacing.push(match axis {
            Axis::X => grid.dx(),
            Axis::Y => grid.dy(),
            Axis::T => cfg.dt,
        });
        let run = fd_oracle_solve(&grid.sample(&init), &cfg)?;
        finals.push(run.last().clone());
    }
    let coarse = base.grid.build()?;
    let cell = coarse.dx() * coarse.dy();
    let step = |level: usize| -> (usize, usize) {
        let f = 1usize << level;
        match axis {
            Axis::X => (f, 1),
            Axis::Y => (1, f),
            Axis::T => (1, 1),
        }
    };
    let on_coarse: Vec<Array2<f64>> = finals
        .iter()
        .enumerate()
        .map(|(lvl, a)| {
            let (rx, ry) = step(lvl);
            restrict(a, rx, ry)
        })
        .collect();
    let differences = vec![
        l2(&on_coarse[0], &on_coarse[1], cell),
        l2(&on_coarse[1], &on_coarse[2], cell),
    ];
    let slope = loglog_slope(&spacing[..2], &differences);
    Ok(ConvergenceStudy {
        axis,
        spacing,
        differences,
        slope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_stays_zero() {
        let cfg = SolveConfig::new(GridSpec::new(16, 16, 4.0, 4.0), 0.01, 1e-3, Scheme::ImexNonlinear);
        let grid = cfg.grid.build().unwrap();
        let run = fd_oracle_solve(&grid.zeros_real(), &cfg).unwrap();
        assert!(run.last().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn cfl_violation_is_rejected_up_front() {
        let cfg = SolveConfig::new(GridSpec::new(16, 16, 4.0, 4.0), 1.0, 0.5, Scheme::ExactKolmogorov);
        let grid = cfg.grid.build().unwrap();
        let err = fd_oracle_solve(&grid.zeros_real(), &cfg).unwrap_err();
        assert!(matches!(err, Error::Cfl { .. }));
    }

    #[test]
    fn restriction_picks_nested_points() {
        let a = Array2::from_shape_fn((4, 4), |(i, j)| (10 * i + j) as f64);
        let r = restrict(&a, 2, 1);
        assert_eq!(r.dim(), (2, 4));
        assert_eq!(r[[1, 3]], 23.0);
    }
}
