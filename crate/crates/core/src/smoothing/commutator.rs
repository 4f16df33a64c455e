//! Numerical check of `[dt + y dx, H^k] = k eta t^(eta-1) dy H^(k-1)`.
//!
//! The multiplication by `y` is not periodic, so operators acting on it are
//! tracked in the affine form `c0 + y c1` with periodic `c0`, `c1`, using
//! `H(y g) = y H g + t^eta g`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::Grid;
use crate::smoothing::hfield::{apply_h_power_at, VectorFieldSpec};

/// A smooth space-time function with a closed-form time derivative.
pub trait SpaceTimeFunction: Sync {
    fn value(&self, t: f64, x: f64, y: f64) -> f64;
    fn time_derivative(&self, t: f64, x: f64, y: f64) -> f64;
}

/// `exp(-t) sin(a x) cos(b y)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayingMode {
    pub a: f64,
    pub b: f64,
}

impl Default for DecayingMode {
    fn default() -> Self {
        DecayingMode { a: 1.0, b: 1.0 }
    }
}

impl SpaceTimeFunction for DecayingMode {
    fn value(&self, t: f64, x: f64, y: f64) -> f64 {
        (-t).exp() * (self.a * x).sin() * (self.b * y).cos()
    }

    fn time_derivative(&self, t: f64, x: f64, y: f64) -> f64 {
        -self.value(t, x, y)
    }
}

fn snapshot(grid: &Arc<Grid>, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
    Field::to_spectral(grid, &grid.sample(f))
}

fn l2(f: &Field) -> f64 {
    f.sobolev_norm(crate::field::SobolevIndex::L2)
}

/// Relative `L^2` discrepancy between the two sides of the commutator
/// identity at time `t`, with the time derivative of `H^k f` taken by a
/// central difference of width `2 dt`.
pub fn commutator_residual(
    grid: &Arc<Grid>,
    spec: VectorFieldSpec,
    test: &dyn SpaceTimeFunction,
    t: f64,
    dt: f64,
) -> Result<f64> {
    let spec = VectorFieldSpec::new(spec.eta, spec.k)?;
    if !(t > dt && dt > 0.0) {
        return Err(Error::InvalidArgument(format!("need t > dt > 0, got t = {t}, dt = {dt}")));
    }
    if spec.k == 0 {
        return Ok(0.0);
    }
    let k = spec.k;
    let eta = spec.eta;
    let lower = spec.with_k(k - 1)?;

    let f_now = snapshot(grid, |x, y| test.value(t, x, y))?;
    let f_plus = snapshot(grid, |x, y| test.value(t + dt, x, y))?;
    let f_minus = snapshot(grid, |x, y| test.value(t - dt, x, y))?;
    let f_t = snapshot(grid, |x, y| test.time_derivative(t, x, y))?;

    // dt (H^k f) by central difference, weights moving with time.
    let hk_plus = apply_h_power_at(&f_plus, spec, t + dt)?;
    let hk_minus = apply_h_power_at(&f_minus, spec, t - dt)?;
    let dt_hk = hk_plus.sub(&hk_minus)?.scaled(0.5 / dt);

    // H^k (dt f) exactly.
    let hk_ft = apply_h_power_at(&f_t, spec, t)?;

    // y dx H^k f - H^k (y dx f) = y (dx H^k f - H^k dx f) - k t^eta H^(k-1) dx f.
    let dx_f = f_now.derivative(1, 0)?;
    let affine_y = apply_h_power_at(&f_now, spec, t)?
        .derivative(1, 0)?
        .sub(&apply_h_power_at(&dx_f, spec, t)?)?;
    let affine_0 = apply_h_power_at(&dx_f, lower, t)?.scaled(k as f64 * t.powf(eta));

    let lhs = dt_hk.sub(&hk_ft)?.sub(&affine_0)?;
    let rhs = apply_h_power_at(&f_now, lower, t)?
        .derivative(0, 1)?
        .scaled(k as f64 * eta * t.powf(eta - 1.0));

    let den = l2(&rhs);
    let num = l2(&lhs.sub(&rhs)?) + grid.ly() * l2(&affine_y);
    Ok(if den == 0.0 { num } else { num / den })
}

/// Residual of one `(eta, k)` pair at two difference widths.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CommutatorRow {
    pub k: usize,
    pub eta: f64,
    pub dt: f64,
    pub residual: f64,
    /// Residual at width `2 dt`.
    pub coarse: f64,
    /// `log2(coarse / residual)`; about 2 for a second-order difference.
    pub order: f64,
}

/// The commutator residual of [`DecayingMode::default`] on the box
/// `[-pi, pi)^2` (32 x 32) for every `eta` in `etas` and `k = 1..=k_max`.
pub fn commutator_table(etas: &[f64], k_max: usize, t: f64, dt: f64) -> Result<Vec<CommutatorRow>> {
    let grid = Grid::shared(32, 32, std::f64::consts::PI, std::f64::consts::PI)?;
    let test = DecayingMode::default();
    let mut rows = Vec::new();
    for &eta in etas {
        for k in 1..=k_max {
            let spec = VectorFieldSpec::new(eta, k)?;
            let residual = commutator_residual(&grid, spec, &test, t, dt)?;
            let coarse = commutator_residual(&grid, spec, &test, t, 2.0 * dt)?;
            rows.push(CommutatorRow {
                k,
                eta,
                dt,
                residual,
                coarse,
                order: (coarse / residual).log2(),
            });
        }
    }
    Ok(rows)
}
