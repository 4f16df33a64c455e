//! One time slice of the solution, stored as spectral coefficients in sheared
//! coordinates `x' = x - t*y`.
//!
//! The coefficient `w(kx, ky)` of a field at time `t` multiplies the physical
//! plane wave with frequency `(kx, ky - t*kx)`. Norms and derivatives go
//! through that map; the transport term `y d/dx` never appears explicitly.

use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Highest total derivative order any spectral operator accepts.
pub const MAX_DERIVATIVE_ORDER: usize = 16;

/// Order of the Sobolev norm, capped at 8.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct SobolevIndex(u32);

impl SobolevIndex {
    pub const L2: SobolevIndex = SobolevIndex(0);
    pub const H4: SobolevIndex = SobolevIndex(4);

    pub fn new(s: u32) -> Result<Self> {
        if s > 8 {
            return Err(Error::SobolevCap(s));
        }
        Ok(SobolevIndex(s))
    }

    pub fn get(self) -> u32 {
        self.0
    }
}

impl Default for SobolevIndex {
    fn default() -> Self {
        SobolevIndex::H4
    }
}

#[derive(Clone, Debug)]
pub struct Field {
    grid: Arc<Grid>,
    t: f64,
    coeffs: Array2<Complex64>,
}

/// `i^m` without rounding.
pub(crate) fn i_pow(m: usize) -> Complex64 {
    match m % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

impl Field {
    pub fn zeros(grid: &Arc<Grid>, t: f64) -> Field {
        Field {
            grid: grid.clone(),
            t,
            coeffs: grid.zeros_complex(),
        }
    }

    pub fn from_coeffs(grid: &Arc<Grid>, t: f64, coeffs: Array2<Complex64>) -> Result<Field> {
        grid.check_shape(coeffs.dim())?;
        Ok(Field {
            grid: grid.clone(),
            t,
            coeffs,
        })
    }

    /// Forward transform of physical samples at `t = 0`, where the sheared
    /// and physical frames coincide.
    pub fn to_spectral(grid: &Arc<Grid>, samples: &Array2<f64>) -> Result<Field> {
        Self::from_physical(grid, samples, 0.0)
    }

    /// Field at time `t` from physical-frame samples `v(x_i, y_j)`.
    pub fn from_physical(grid: &Arc<Grid>, samples: &Array2<f64>, t: f64) -> Result<Field> {
        grid.check_shape(samples.dim())?;
        let mut data = samples.mapv(|v| Complex64::new(v, 0.0));
        grid.fft_x(&mut data, false);
        if t != 0.0 {
            shear_phase(grid, &mut data, t);
        }
        grid.fft_y(&mut data, false);
        let norm = 1.0 / (grid.nx() * grid.ny()) as f64;
        data.mapv_inplace(|c| c * norm);
        Ok(Field {
            grid: grid.clone(),
            t,
            coeffs: data,
        })
    }

    /// Field at time `t` from samples taken in the sheared frame.
    pub fn from_sheared_samples(grid: &Arc<Grid>, samples: &Array2<f64>, t: f64) -> Result<Field> {
        grid.check_shape(samples.dim())?;
        let mut data = samples.mapv(|v| Complex64::new(v, 0.0));
        grid.forward(&mut data);
        Ok(Field {
            grid: grid.clone(),
            t,
            coeffs: data,
        })
    }

    /// Physical-frame samples `v(x_i, y_j)`.
    pub fn to_physical(&self) -> Array2<f64> {
        let mut data = self.coeffs.clone();
        self.grid.fft_y(&mut data, true);
        if self.t != 0.0 {
            shear_phase(&self.grid, &mut data, -self.t);
        }
        self.grid.fft_x(&mut data, true);
        data.mapv(|c| c.re)
    }

    /// Samples in the sheared frame, where pointwise products are taken.
    pub fn to_sheared_samples(&self) -> Array2<f64> {
        let mut data = self.coeffs.clone();
        self.grid.inverse(&mut data);
        data.mapv(|c| c.re)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn coeffs(&self) -> &Array2<Complex64> {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut Array2<Complex64> {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Array2<Complex64> {
        self.coeffs
    }

    pub fn with_time(mut self, t: f64) -> Field {
        self.t = t;
        self
    }

    /// Physical y-frequency of coefficient `(i, j)`.
    #[inline]
    pub fn sigma(&self, i: usize, j: usize) -> f64 {
        self.grid.ky()[j] - self.t * self.grid.kx()[i]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    pub fn same_grid(&self, other: &Field) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Multiply every coefficient by `m(kx, sigma)`; Nyquist planes are zeroed.
    pub fn apply_multiplier(&self, m: impl Fn(f64, f64) -> Complex64 + Sync + Send) -> Field {
        let grid = &self.grid;
        let (nx, ny) = grid.shape();
        let kx = grid.kx();
        let ky = grid.ky();
        let t = self.t;
        let mut out = self.coeffs.clone();
        let slice = out.as_slice_mut().expect("standard layout");
        grid.exec().for_each_chunk_mut(slice, ny, |i, row| {
            if i == nx / 2 {
                row.fill(Complex64::new(0.0, 0.0));
                return;
            }
            for (j, c) in row.iter_mut().enumerate() {
                if j == ny / 2 {
                    *c = Complex64::new(0.0, 0.0);
                } else {
                    *c *= m(kx[i], ky[j] - t * kx[i]);
                }
            }
        });
        Field {
            grid: self.grid.clone(),
            t,
            coeffs: out,
        }
    }

    /// Physical-coordinate derivative `d^l/dx^l d^n/dy^n`.
    pub fn derivative(&self, l: usize, n: usize) -> Result<Field> {
        if l + n > MAX_DERIVATIVE_ORDER {
            return Err(Error::OrderCap {
                order: l + n,
                cap: MAX_DERIVATIVE_ORDER,
            });
        }
        if l == 0 && n == 0 {
            return Ok(self.clone());
        }
        let phase = i_pow(l + n);
        Ok(self.apply_multiplier(|kx, s| phase * (kx.powi(l as i32) * s.powi(n as i32))))
    }

    /// Sum over modes of `weight(kx, sigma) * |c|^2`, reduced row by row.
    pub(crate) fn weighted_energy(&self, weight: impl Fn(f64, f64) -> f64 + Sync + Send) -> f64 {
        let grid = &self.grid;
        let ny = grid.ny();
        let kx = grid.kx();
        let ky = grid.ky();
        let t = self.t;
        let slice = self.coeffs.as_slice().expect("standard layout");
        grid.exec().sum_chunks(slice, ny, |i, row| {
            let mut acc = 0.0;
            for (j, c) in row.iter().enumerate() {
                let s = ky[j] - t * kx[i];
                acc += weight(kx[i], s) * c.norm_sqr();
            }
            acc
        })
    }

    /// `||v||_{H^s}^2` with the box-area factor.
    pub fn sobolev_norm_sq(&self, s: SobolevIndex) -> f64 {
        let p = s.get() as i32;
        self.grid.area() * self.weighted_energy(|kx, sg| (1.0 + kx * kx + sg * sg).powi(p))
    }

    pub fn sobolev_norm(&self, s: SobolevIndex) -> f64 {
        self.sobolev_norm_sq(s).sqrt()
    }

    /// `||d/dy v||_{H^s}^2`, the dissipation density of the energy functional.
    pub fn dy_sobolev_norm_sq(&self, s: SobolevIndex) -> f64 {
        let p = s.get() as i32;
        self.grid.area()
            * self.weighted_energy(|kx, sg| sg * sg * (1.0 + kx * kx + sg * sg).powi(p))
    }

    /// Fraction of `H^s` energy carried by modes in the outer `band` of the
    /// resolved region or beyond it. The region is the ellipse with semi-axes
    /// `kmax_x`, `kmax_y`, which is the resolved disc on square grids.
    pub fn tail_mass_weighted(&self, band: f64, s: SobolevIndex) -> f64 {
        let p = s.get() as i32;
        let r0 = 1.0 - band;
        let r0sq = r0 * r0;
        let (ax, ay) = (1.0 / self.grid.kmax_x(), 1.0 / self.grid.kmax_y());
        let total = self.weighted_energy(|kx, sg| (1.0 + kx * kx + sg * sg).powi(p));
        if total == 0.0 {
            return 0.0;
        }
        let tail = self.weighted_energy(|kx, sg| {
            let (u, v) = (kx * ax, sg * ay);
            if u * u + v * v >= r0sq {
                (1.0 + kx * kx + sg * sg).powi(p)
            } else {
                0.0
            }
        });
        tail / total
    }

    pub fn tail_mass(&self, band: f64) -> f64 {
        self.tail_mass_weighted(band, SobolevIndex::H4)
    }

    /// Zero every mode outside the 2/3-rule box.
    pub fn dealias(&mut self) {
        let grid = self.grid.clone();
        let ny = grid.ny();
        let slice = self.coeffs.as_slice_mut().expect("standard layout");
        grid.exec().for_each_chunk_mut(slice, ny, |i, row| {
            for (j, c) in row.iter_mut().enumerate() {
                if !grid.survives_dealias(i, j) {
                    *c = Complex64::new(0.0, 0.0);
                }
            }
        });
    }

    pub fn scaled(&self, a: f64) -> Field {
        Field {
            grid: self.grid.clone(),
            t: self.t,
            coeffs: self.coeffs.mapv(|c| c * a),
        }
    }

    /// `self + a * other`, keeping `self.t`.
    pub fn axpy(&self, a: f64, other: &Field) -> Result<Field> {
        self.same_grid(other)?;
        let mut coeffs = self.coeffs.clone();
        coeffs.zip_mut_with(&other.coeffs, |c, o| *c += *o * a);
        Ok(Field {
            grid: self.grid.clone(),
            t: self.t,
            coeffs,
        })
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.axpy(-1.0, other)
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    /// Coefficient `(i, j)` of the Hermitian partner `-k`.
    pub fn partner(&self, i: usize, j: usize) -> Complex64 {
        let (nx, ny) = self.grid.shape();
        self.coeffs[[(nx - i) % nx, (ny - j) % ny]]
    }
}

/// Multiply a `(kx, y)` mixed representation by `exp(i kx t y)`.
fn shear_phase(grid: &Grid, data: &mut Array2<Complex64>, t: f64) {
    let ny = grid.ny();
    let kx = grid.kx();
    let ys: Vec<f64> = (0..ny).map(|j| grid.y(j)).collect();
    let slice = data.as_slice_mut().expect("standard layout");
    grid.exec().for_each_chunk_mut(slice, ny, |i, row| {
        let k = kx[i];
        for (c, y) in row.iter_mut().zip(&ys) {
            *c *= Complex64::from_polar(1.0, k * t * y);
        }
    });
}

/// Power of the weight `<delta*ytilde> = (1 + delta^2 (x^2 + y^2))^(1/2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BracketPower {
    /// `<delta*ytilde>^{-1}`
    Minus,
    /// `<delta*ytilde>^{+1}`
    Plus,
}

/// Pointwise multiplication of physical samples by `<delta*ytilde>^{+-1}`.
pub fn weight_multiply(
    grid: &Grid,
    samples: &Array2<f64>,
    delta: f64,
    power: BracketPower,
) -> Result<Array2<f64>> {
    grid.check_shape(samples.dim())?;
    if delta.is_nan() || delta < 0.0 {
        return Err(Error::InvalidArgument(format!("delta = {delta} must be >= 0")));
    }
    let d2 = delta * delta;
    let mut out = samples.clone();
    for ((i, j), v) in out.indexed_iter_mut() {
        let (x, y) = (grid.x(i), grid.y(j));
        let bracket = (1.0 + d2 * (x * x + y * y)).sqrt();
        *v = match power {
            BracketPower::Minus => *v / bracket,
            BracketPower::Plus => *v * bracket,
        };
    }
    Ok(out)
}

/// The weight itself as an array.
pub fn bracket_weight(grid: &Grid, delta: f64, power: BracketPower) -> Array2<f64> {
    let ones = Array2::from_elem(grid.shape(), 1.0);
    weight_multiply(grid, &ones, delta, power).expect("shape matches")
}
