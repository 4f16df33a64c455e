//! Periodic grid for the truncated box `[-lx, lx) x [-ly, ly)` and its FFT plans.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;

/// Serializable description of a grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Self {
        GridSpec { nx, ny, lx, ly }
    }

    pub fn build(&self) -> Result<Arc<Grid>> {
        Grid::shared(self.nx, self.ny, self.lx, self.ly)
    }
}

#[derive(Clone)]
struct Plans {
    fwd_x: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
}

/// Spectral grid. Arrays are indexed `[i, j]` with `i` along x and `j` along y,
/// stored row-major (y contiguous).
#[derive(Clone)]
pub struct Grid {
    nx: usize,
    ny: usize,
    lx: f64,
    ly: f64,
    kx: Vec<f64>,
    ky: Vec<f64>,
    exec: Exec,
    plans: Plans,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("nx", &self.nx)
            .field("ny", &self.ny)
            .field("lx", &self.lx)
            .field("ly", &self.ly)
            .field("exec", &self.exec)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.spec() == other.spec()
    }
}

/// Wavenumbers `pi * m / l` in FFT order: `0, 1, ..., n/2 - 1, -n/2, ..., -1`.
pub fn wavenumbers(n: usize, l: f64) -> Vec<f64> {
    let half = n / 2;
    (0..n)
        .map(|i| {
            let m = if i < half { i as f64 } else { i as f64 - n as f64 };
            PI * m / l
        })
        .collect()
}

impl Grid {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Grid> {
        Self::with_exec(nx, ny, lx, ly, Exec::default())
    }

    pub fn with_exec(nx: usize, ny: usize, lx: f64, ly: f64, exec: Exec) -> Result<Grid> {
        for (name, n) in [("nx", nx), ("ny", ny)] {
            if n < 8 || n % 2 != 0 {
                return Err(Error::InvalidGrid(format!(
                    "{name} = {n} must be even and at least 8"
                )));
            }
        }
        for (name, l) in [("lx", lx), ("ly", ly)] {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::InvalidGrid(format!("{name} = {l} must be positive")));
            }
        }
        let mut planner = FftPlanner::new();
        let plans = Plans {
            fwd_x: planner.plan_fft_forward(nx),
            inv_x: planner.plan_fft_inverse(nx),
            fwd_y: planner.plan_fft_forward(ny),
            inv_y: planner.plan_fft_inverse(ny),
        };
        Ok(Grid {
            nx,
            ny,
            lx,
            ly,
            kx: wavenumbers(nx, lx),
            ky: wavenumbers(ny, ly),
            exec,
            plans,
        })
    }

    /// Same as [`Grid::new`], wrapped for sharing between fields.
    pub fn shared(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Arc<Grid>> {
        Self::new(nx, ny, lx, ly).map(Arc::new)
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec::new(self.nx, self.ny, self.lx, self.ly)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn lx(&self) -> f64 {
        self.lx
    }

    pub fn ly(&self) -> f64 {
        self.ly
    }

    pub fn kx(&self) -> &[f64] {
        &self.kx
    }

    pub fn ky(&self) -> &[f64] {
        &self.ky
    }

    pub fn exec(&self) -> Exec {
        self.exec
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.lx / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        2.0 * self.ly / self.ny as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        -self.lx + i as f64 * self.dx()
    }

    pub fn y(&self, j: usize) -> f64 {
        -self.ly + j as f64 * self.dy()
    }

    pub fn area(&self) -> f64 {
        4.0 * self.lx * self.ly
    }

    pub fn kmax_x(&self) -> f64 {
        PI * (self.nx / 2) as f64 / self.lx
    }

    pub fn kmax_y(&self) -> f64 {
        PI * (self.ny / 2) as f64 / self.ly
    }

    /// Radius of the resolved disc used by the tail guard.
    pub fn resolved_radius(&self) -> f64 {
        self.kmax_x().min(self.kmax_y())
    }

    /// Index is on a Nyquist plane along either axis.
    pub fn is_nyquist(&self, i: usize, j: usize) -> bool {
        i == self.nx / 2 || j == self.ny / 2
    }

    /// Index survives the 2/3 rule: `|m| <= n/3` on both axes.
    pub fn survives_dealias(&self, i: usize, j: usize) -> bool {
        fn keep(idx: usize, n: usize) -> bool {
            let m = if idx < n / 2 { idx } else { n - idx };
            m <= n / 3
        }
        keep(i, self.nx) && keep(j, self.ny)
    }

    pub fn zeros_real(&self) -> Array2<f64> {
        Array2::zeros((self.nx, self.ny))
    }

    pub fn zeros_complex(&self) -> Array2<Complex64> {
        Array2::zeros((self.nx, self.ny))
    }

    /// Samples of `f(x, y)` at the grid points.
    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> Array2<f64> {
        Array2::from_shape_fn((self.nx, self.ny), |(i, j)| f(self.x(i), self.y(j)))
    }

    pub(crate) fn check_shape(&self, got: (usize, usize)) -> Result<()> {
        if got != self.shape() {
            return Err(Error::DimensionMismatch {
                expected: self.shape(),
                got,
            });
        }
        Ok(())
    }

    /// FFT along y (contiguous rows), unnormalized.
    pub(crate) fn fft_y(&self, data: &mut Array2<Complex64>, inverse: bool) {
        let plan = if inverse {
            &self.plans.inv_y
        } else {
            &self.plans.fwd_y
        };
        let ny = self.ny;
        let rows_per_chunk = chunk_rows(self.nx);
        let slice = data.as_slice_mut().expect("standard layout");
        self.exec
            .for_each_chunk_mut(slice, rows_per_chunk * ny, |_, chunk| plan.process(chunk));
    }

    /// FFT along x, unnormalized. Works on a transposed copy so every
    /// transform runs on contiguous memory.
    pub(crate) fn fft_x(&self, data: &mut Array2<Complex64>, inverse: bool) {
        let plan = if inverse {
            &self.plans.inv_x
        } else {
            &self.plans.fwd_x
        };
        let (nx, ny) = self.shape();
        let mut t = transpose(data, self.exec);
        let slice = t.as_slice_mut().expect("standard layout");
        self.exec
            .for_each_chunk_mut(slice, chunk_rows(ny) * nx, |_, chunk| plan.process(chunk));
        let back = transpose(&t, self.exec);
        debug_assert_eq!(back.dim(), (nx, ny));
        *data = back;
    }

    /// Mean-preserving forward transform: `coeff(0)` is the sample mean.
    pub(crate) fn forward(&self, data: &mut Array2<Complex64>) {
        self.fft_y(data, false);
        self.fft_x(data, false);
        let norm = 1.0 / (self.nx * self.ny) as f64;
        data.mapv_inplace(|c| c * norm);
    }

    pub(crate) fn inverse(&self, data: &mut Array2<Complex64>) {
        self.fft_y(data, true);
        self.fft_x(data, true);
    }
}

fn chunk_rows(rows: usize) -> usize {
    rows.div_ceil(16).max(1)
}

fn transpose(a: &Array2<Complex64>, exec: Exec) -> Array2<Complex64> {
    let (r, c) = a.dim();
    let src = a.as_slice().expect("standard layout");
    let mut out = vec![Complex64::new(0.0, 0.0); r * c];
    let rows_per_chunk = chunk_rows(c);
    exec.for_each_chunk_mut(&mut out, rows_per_chunk * r, |ci, chunk| {
        let first = ci * rows_per_chunk;
        for (local, row) in chunk.chunks_mut(r).enumerate() {
            let jj = first + local;
            for (ii, v) in row.iter_mut().enumerate() {
                *v = src[ii * c + jj];
            }
        }
    });
    Array2::from_shape_vec((c, r), out).expect("shape")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_box_gives_integer_wavenumbers() {
        let g = Grid::new(8, 8, PI, PI).unwrap();
        let expected = [0.0, 1.0, 2.0, 3.0, -4.0, -3.0, -2.0, -1.0];
        for (k, e) in g.kx().iter().zip(expected) {
            assert!((k - e).abs() < 1e-15);
        }
        assert_eq!(g.kx()[0], 0.0);
        assert_eq!(g.ky()[0], 0.0);
        assert!((g.kmax_x() - 4.0).abs() < 1e-15);
    }

    #[test]
    fn doubled_box_halves_spacing() {
        let g = Grid::new(8, 8, 2.0 * PI, 2.0 * PI).unwrap();
        assert!((g.kx()[1] - 0.5).abs() < 1e-15);
        assert!((g.ky()[7] + 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_odd_or_tiny_sizes() {
        assert!(Grid::new(7, 8, PI, PI).is_err());
        assert!(Grid::new(6, 8, PI, PI).is_err());
        assert!(Grid::new(8, 8, 0.0, PI).is_err());
    }

    #[test]
    fn dealias_keeps_two_thirds() {
        let g = Grid::new(12, 12, PI, PI).unwrap();
        let kept = (0..12).filter(|&i| g.survives_dealias(i, 0)).count();
        // |m| <= 4 out of m in -6..=5
        assert_eq!(kept, 9);
    }
}
