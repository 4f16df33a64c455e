//! Sources for the frozen coefficient `g` of the linearized equation.

use std::sync::Arc;

use ndarray::Array2;

use crate::error::Result;
use crate::field::Field;
use crate::grid::Grid;

/// A time-dependent coefficient `g(t)` evaluated on sheared-frame samples.
pub trait Coefficient: Sync {
    /// Samples of `g` at time `t`; `None` means `g` vanishes identically.
    fn samples_at(&self, t: f64) -> Option<Array2<f64>>;
}

/// `g = 0`.
#[derive(Clone, Copy, Debug, Default)]
pub struct ZeroCoefficient;

impl Coefficient for ZeroCoefficient {
    fn samples_at(&self, _t: f64) -> Option<Array2<f64>> {
        None
    }
}

/// Spatially and temporally constant `g = c`.
#[derive(Clone, Debug)]
pub struct ConstantCoefficient {
    shape: (usize, usize),
    value: f64,
}

impl ConstantCoefficient {
    pub fn new(grid: &Grid, value: f64) -> Self {
        ConstantCoefficient {
            shape: grid.shape(),
            value,
        }
    }
}

impl Coefficient for ConstantCoefficient {
    fn samples_at(&self, _t: f64) -> Option<Array2<f64>> {
        Some(Array2::from_elem(self.shape, self.value))
    }
}

/// `g` known at a set of time nodes, linearly interpolated in between.
///
/// Interpolation acts on sheared-frame coefficients, which is the same as
/// interpolating along the free-streaming characteristics.
#[derive(Clone, Debug)]
pub struct NodeCoefficient {
    times: Vec<f64>,
    fields: Vec<Field>,
}

impl NodeCoefficient {
    pub fn new(fields: Vec<Field>) -> Self {
        assert!(!fields.is_empty());
        let times: Vec<f64> = fields.iter().map(Field::t).collect();
        assert!(times.windows(2).all(|w| w[1] > w[0]), "times must increase");
        NodeCoefficient { times, fields }
    }

    /// The time-constant physical extension `g(t, x, y) = v0(x, y)` sampled at `times`.
    pub fn time_constant(grid: &Arc<Grid>, physical: &Array2<f64>, times: &[f64]) -> Result<Self> {
        let fields = times
            .iter()
            .map(|&t| Field::from_physical(grid, physical, t))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(fields))
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn fields(&self) -> &[Field] {
        &self.fields
    }

    /// Interpolated coefficients at `t`, clamped to the stored window.
    pub fn field_at(&self, t: f64) -> Field {
        let n = self.times.len();
        if n == 1 || t <= self.times[0] {
            return self.fields[0].clone().with_time(t);
        }
        if t >= self.times[n - 1] {
            return self.fields[n - 1].clone().with_time(t);
        }
        let hi = self.times.partition_point(|&s| s < t);
        if self.times[hi] == t {
            return self.fields[hi].clone();
        }
        let lo = hi - 1;
        let w = (t - self.times[lo]) / (self.times[hi] - self.times[lo]);
        let diff = self.fields[hi].sub(&self.fields[lo]).expect("same grid");
        self.fields[lo].axpy(w, &diff).expect("same grid").with_time(t)
    }
}

impl Coefficient for NodeCoefficient {
    fn samples_at(&self, t: f64) -> Option<Array2<f64>> {
        Some(self.field_at(t).to_sheared_samples())
    }
}

/// `g` given in closed form in physical coordinates.
pub struct AnalyticCoefficient<F> {
    grid: Arc<Grid>,
    g: F,
}

impl<F> AnalyticCoefficient<F>
where
    F: Fn(f64, f64, f64) -> f64 + Sync,
{
    /// `g(t, x, y)` sampled on `grid`.
    pub fn new(grid: &Arc<Grid>, g: F) -> Self {
        AnalyticCoefficient {
            grid: grid.clone(),
            g,
        }
    }
}

impl<F> Coefficient for AnalyticCoefficient<F>
where
    F: Fn(f64, f64, f64) -> f64 + Sync,
{
    fn samples_at(&self, t: f64) -> Option<Array2<f64>> {
        let physical = self.grid.sample(|x, y| (self.g)(t, x, y));
        let f = Field::from_physical(&self.grid, &physical, t).expect("shape from grid");
        Some(f.to_sheared_samples())
    }
}
