//! Single time steps: the exact Kolmogorov propagator and a Lawson-type
//! IMEX midpoint step for variable diffusion coefficients.

use ndarray::Array2;

use crate::field::Field;
use crate::solver::coefficient::Coefficient;

/// Integrated symbol of `-d_y^2` along a sheared characteristic over `[a, b]`:
/// `int_a^b (ky - s kx)^2 ds`.
///
/// Written around the midpoint so no large terms cancel.
pub fn kolmogorov_symbol(kx: f64, ky: f64, a: f64, b: f64) -> f64 {
    let h = b - a;
    let m = 0.5 * (a + b);
    let s = ky - m * kx;
    h * (s * s + kx * kx * h * h / 12.0)
}

/// Multiply every mode by `exp(-abar * Phi(k; t, t_to))` and move the field to `t_to`.
pub(crate) fn propagate(f: &Field, abar: f64, t_to: f64) -> Field {
    let grid = f.grid().clone();
    let (_, ny) = grid.shape();
    let kx = grid.kx();
    let ky = grid.ky();
    let t0 = f.t();
    let mut coeffs = f.coeffs().clone();
    let slice = coeffs.as_slice_mut().expect("standard layout");
    grid.exec().for_each_chunk_mut(slice, ny, |i, row| {
        for (j, c) in row.iter_mut().enumerate() {
            let phi = kolmogorov_symbol(kx[i], ky[j], t0, t_to);
            *c *= (-(abar * phi)).exp();
        }
    });
    Field::from_coeffs(&grid, t_to, coeffs).expect("shape preserved")
}

/// Advance `v` by `dt` under `dt v + y dx v - dy^2 v = 0`. Exact for every mode.
pub fn exact_kolmogorov_step(v: &Field, dt: f64) -> Field {
    propagate(v, 1.0, v.t() + dt)
}

/// Knobs shared by the variable-coefficient steps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepOptions {
    pub dealias: bool,
    /// Largest tolerated `H^4` tail fraction after a step.
    pub tail_guard: f64,
    /// Width of the outer band the tail fraction is measured on.
    pub tail_band: f64,
    /// Largest tolerated relative `H^4` growth in one step.
    pub max_growth: f64,
}

impl Default for StepOptions {
    fn default() -> Self {
        StepOptions {
            dealias: true,
            tail_guard: 1e-8,
            tail_band: 1.0 / 3.0,
            max_growth: 0.1,
        }
    }
}

/// Why a step was refused. The caller should retry with half the step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Rejection {
    /// `H^4` grew by more than the allowed factor.
    Growth { ratio: f64 },
    /// Too much energy sits next to the resolution limit.
    Tail { mass: f64 },
    /// A NaN or infinity appeared.
    NonFinite,
}

impl std::fmt::Display for Rejection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Rejection::Growth { ratio } => write!(f, "H^4 norm grew by factor {ratio:.4}"),
            Rejection::Tail { mass } => write!(f, "spectral tail mass {mass:e} above guard"),
            Rejection::NonFinite => f.write_str("non-finite coefficients"),
        }
    }
}

fn mean(a: &Array2<f64>) -> f64 {
    a.iter().sum::<f64>() / a.len() as f64
}

/// `dealias(FFT[(a - abar) * IFFT(-sigma^2 w)])` in the sheared frame.
fn fluctuation(w: &Field, a: &Array2<f64>, abar: f64, dealias: bool) -> Field {
    let d2 = w.derivative(0, 2).expect("order 2 below cap");
    let mut s = d2.to_sheared_samples();
    s.zip_mut_with(a, |v, ai| *v *= ai - abar);
    let mut out = Field::from_sheared_samples(w.grid(), &s, w.t()).expect("shape preserved");
    if dealias {
        out.dealias();
    }
    out
}

/// One Lawson midpoint step for `dt w = a(t, w) dy^2 w` in the sheared frame.
///
/// `coefficient(s, w)` returns samples of `a` at stage time `s` for stage state
/// `w`, or `None` when `a == 1` everywhere. The constant part `abar` is the
/// mean of `a` at the start of the step and is treated exactly.
pub(crate) fn lawson_step<F>(v: &Field, dt: f64, dealias: bool, mut coefficient: F) -> Field
where
    F: FnMut(f64, &Field) -> Option<Array2<f64>>,
{
    let t = v.t();
    let Some(a0) = coefficient(t, v) else {
        return exact_kolmogorov_step(v, dt);
    };
    let abar = mean(&a0);
    let half = t + 0.5 * dt;
    let end = t + dt;

    let k1 = fluctuation(v, &a0, abar, dealias);
    let stage = v.axpy(0.5 * dt, &k1).expect("same grid");
    let w_half = propagate(&stage, abar, half);

    let a_half = coefficient(half, &w_half).unwrap_or_else(|| Array2::from_elem(a0.dim(), 1.0));
    let k2 = fluctuation(&w_half, &a_half, abar, dealias);

    let free = propagate(v, abar, end);
    let forced = propagate(&k2, abar, end);
    free.axpy(dt, &forced).expect("same grid")
}

fn screen(before: &Field, after: Field, opts: &StepOptions) -> Result<Field, Rejection> {
    if after.coeffs().iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
        return Err(Rejection::NonFinite);
    }
    let n0 = before.sobolev_norm_sq(Default::default()).sqrt();
    let n1 = after.sobolev_norm_sq(Default::default()).sqrt();
    if n1 > (1.0 + opts.max_growth) * n0 && n1 > 0.0 {
        let ratio = if n0 > 0.0 { n1 / n0 } else { f64::INFINITY };
        return Err(Rejection::Growth { ratio });
    }
    let mass = after.tail_mass(opts.tail_band);
    if mass > opts.tail_guard {
        return Err(Rejection::Tail { mass });
    }
    Ok(after)
}

/// One step of `dt v + y dx v - (1 + g)^2 dy^2 v = 0` with `g` frozen.
pub fn linearized_step(
    v: &Field,
    g: &dyn Coefficient,
    dt: f64,
    opts: &StepOptions,
) -> Result<Field, Rejection> {
    let next = lawson_step(v, dt, opts.dealias, |s, _| {
        g.samples_at(s).map(|mut gs| {
            gs.mapv_inplace(|x| (1.0 + x) * (1.0 + x));
            gs
        })
    });
    screen(v, next, opts)
}

/// One step of the full equation `dt v + y dx v - (1 + v)^2 dy^2 v = 0`.
pub fn nonlinear_step(v: &Field, dt: f64, opts: &StepOptions) -> Result<Field, Rejection> {
    let next = lawson_step(v, dt, opts.dealias, |_, w| {
        let mut a = w.to_sheared_samples();
        a.mapv_inplace(|x| (1.0 + x) * (1.0 + x));
        Some(a)
    });
    screen(v, next, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::solver::coefficient::ZeroCoefficient;

    #[test]
    fn symbol_matches_quadrature() {
        let (kx, ky, a, b) = (3.0, -2.0, 0.4, 1.1);
        let n = 20_000;
        let h = (b - a) / n as f64;
        let mut q = 0.0;
        for m in 0..n {
            let s = a + (m as f64 + 0.5) * h;
            q += (ky - s * kx) * (ky - s * kx) * h;
        }
        let exact = kolmogorov_symbol(kx, ky, a, b);
        assert!((q - exact).abs() < 1e-7 * exact, "{q} vs {exact}");
    }

    #[test]
    fn zero_coefficient_reduces_to_exact_step() {
        let grid = Grid::shared(16, 16, std::f64::consts::PI, std::f64::consts::PI).unwrap();
        let v = Field::to_spectral(&grid, &grid.sample(|x, y| 1e-3 * (x.cos() + (2.0 * y).sin())))
            .unwrap();
        let exact = exact_kolmogorov_step(&v, 0.01);
        let lin = linearized_step(&v, &ZeroCoefficient, 0.01, &StepOptions::default()).unwrap();
        assert_eq!(exact.coeffs(), lin.coeffs());
    }
}
