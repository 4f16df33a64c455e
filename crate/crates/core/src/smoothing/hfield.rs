//! The vector field `H_eta = t^(eta+1)/(eta+1) dx + t^eta dy` and its powers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{i_pow, Field, MAX_DERIVATIVE_ORDER};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VectorFieldSpec {
    pub eta: f64,
    pub k: usize,
}

impl VectorFieldSpec {
    pub fn new(eta: f64, k: usize) -> Result<Self> {
        if !(eta > 1.0) || !eta.is_finite() {
            return Err(Error::InvalidArgument(format!("eta = {eta} must exceed 1")));
        }
        if k > MAX_DERIVATIVE_ORDER {
            return Err(Error::OrderCap {
                order: k,
                cap: MAX_DERIVATIVE_ORDER,
            });
        }
        Ok(VectorFieldSpec { eta, k })
    }

    pub fn with_k(self, k: usize) -> Result<Self> {
        Self::new(self.eta, k)
    }
}

/// Real symbol of `-i H_eta` at weight time `t` for the physical frequency `(kx, sigma)`.
pub fn h_symbol(eta: f64, t: f64, kx: f64, sigma: f64) -> f64 {
    t.powf(eta + 1.0) / (eta + 1.0) * kx + t.powf(eta) * sigma
}

/// `H_eta^k f` with weights taken at the field's own time.
pub fn apply_h_power(f: &Field, spec: VectorFieldSpec) -> Result<Field> {
    apply_h_power_at(f, spec, f.t())
}

/// `H_eta^k f` with the weights `t^(eta+1)/(eta+1)` and `t^eta` evaluated at
/// `t_weight` instead of `f.t()`.
pub fn apply_h_power_at(f: &Field, spec: VectorFieldSpec, t_weight: f64) -> Result<Field> {
    let spec = VectorFieldSpec::new(spec.eta, spec.k)?;
    if spec.k == 0 {
        return Ok(f.clone());
    }
    if t_weight == 0.0 {
        return Ok(Field::zeros(f.grid(), f.t()));
    }
    let a = t_weight.powf(spec.eta + 1.0) / (spec.eta + 1.0);
    let b = t_weight.powf(spec.eta);
    let phase = i_pow(spec.k);
    let k = spec.k as i32;
    Ok(f.apply_multiplier(|kx, s| phase * (a * kx + b * s).powi(k)))
}
