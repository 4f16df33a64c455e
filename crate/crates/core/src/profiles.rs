//! Built-in families of initial data, each scaled to a prescribed `H^4` size.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, SobolevIndex};
use crate::grid::Grid;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Profile {
    Zero,
    /// `exp(-x^2 / (2 sx^2) - y^2 / (2 sy^2))`.
    Gaussian { sigma_x: f64, sigma_y: f64 },
    /// Spectral coefficients `(1 + |k|^2)^-3` with seeded random phases,
    /// cut off at half the resolved radius.
    AlgebraicTail,
}

impl Profile {
    pub fn gaussian(sigma: f64) -> Profile {
        Profile::Gaussian {
            sigma_x: sigma,
            sigma_y: sigma,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Profile::Zero => "zero",
            Profile::Gaussian { .. } => "gaussian",
            Profile::AlgebraicTail => "algebraic-tail",
        }
    }

    /// Initial field at `t = 0` with `||v0||_{H^4} = eps` (zero for [`Profile::Zero`]).
    pub fn build(&self, grid: &Arc<Grid>, eps: f64, seed: u64) -> Result<Field> {
        let raw = match *self {
            Profile::Zero => return Ok(Field::zeros(grid, 0.0)),
            Profile::Gaussian { sigma_x, sigma_y } => {
                if !(sigma_x > 0.0 && sigma_y > 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "gaussian widths must be positive, got ({sigma_x}, {sigma_y})"
                    )));
                }
                let samples = grid.sample(|x, y| {
                    (-(x * x) / (2.0 * sigma_x * sigma_x) - y * y / (2.0 * sigma_y * sigma_y)).exp()
                });
                Field::to_spectral(grid, &samples)?
            }
            Profile::AlgebraicTail => algebraic_tail(grid, seed),
        };
        let norm = raw.sobolev_norm(SobolevIndex::H4);
        Ok(raw.scaled(eps / norm))
    }
}

fn algebraic_tail(grid: &Arc<Grid>, seed: u64) -> Field {
    let (nx, ny) = grid.shape();
    let cut = 0.5 * grid.resolved_radius();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs = grid.zeros_complex();
    for i in 0..nx {
        for j in 0..ny {
            let (pi, pj) = ((nx - i) % nx, (ny - j) % ny);
            if grid.is_nyquist(i, j) || (pi, pj) < (i, j) {
                continue;
            }
            let (kx, ky) = (grid.kx()[i], grid.ky()[j]);
            let k2 = kx * kx + ky * ky;
            if k2.sqrt() >= cut {
                continue;
            }
            let amp = (1.0 + k2).powi(-3);
            let c = if (pi, pj) == (i, j) {
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                Complex64::new(sign * amp, 0.0)
            } else {
                Complex64::from_polar(amp, rng.random_range(0.0..std::f64::consts::TAU))
            };
            coeffs[[i, j]] = c;
            coeffs[[pi, pj]] = c.conj();
        }
    }
    Field::from_coeffs(grid, 0.0, coeffs).expect("shape from grid")
}
