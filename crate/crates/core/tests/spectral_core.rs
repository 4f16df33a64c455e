use std::f64::consts::PI;
use std::sync::Arc;

use approx::assert_relative_eq;
use kplab::field::{bracket_weight, weight_multiply, BracketPower};
use kplab::{Error, Field, Grid, SobolevIndex};
use ndarray::Array2;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn grid(nx: usize, ny: usize, lx: f64, ly: f64) -> Arc<Grid> {
    Grid::shared(nx, ny, lx, ly).unwrap()
}

fn noise(g: &Grid, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array2::from_shape_fn(g.shape(), |_| rng.random_range(-1.0..1.0))
}

fn sup_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Periodic fourth-order centred first derivative along one axis.
fn fd4_first(u: &Array2<f64>, h: f64, along_x: bool) -> Array2<f64> {
    let (nx, ny) = u.dim();
    Array2::from_shape_fn((nx, ny), |(i, j)| {
        let at = |s: isize| {
            if along_x {
                u[[(i as isize + s).rem_euclid(nx as isize) as usize, j]]
            } else {
                u[[i, (j as isize + s).rem_euclid(ny as isize) as usize]]
            }
        };
        (-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2)) / (12.0 * h)
    })
}

#[test]
fn constant_field_has_only_the_mean() {
    let g = grid(8, 8, PI, PI);
    let f = Field::to_spectral(&g, &Array2::from_elem(g.shape(), 2.5)).unwrap();
    for ((i, j), c) in f.coeffs().indexed_iter() {
        if (i, j) == (0, 0) {
            assert_relative_eq!(c.re, 2.5, epsilon = 1e-15);
        } else {
            assert!(c.norm() < 1e-15);
        }
    }
}

#[test]
fn cosine_has_two_half_coefficients() {
    let g = grid(16, 16, PI, PI);
    let f = Field::to_spectral(&g, &g.sample(|x, _| x.cos())).unwrap();
    let big: Vec<_> = f
        .coeffs()
        .indexed_iter()
        .filter(|(_, c)| c.norm() > 1e-12)
        .map(|((i, j), c)| ((g.kx()[i], g.ky()[j]), c.norm()))
        .collect();
    assert_eq!(big.len(), 2);
    for ((kx, ky), m) in big {
        assert_eq!(ky, 0.0);
        assert_relative_eq!(kx.abs(), 1.0);
        assert_relative_eq!(m, 0.5, epsilon = 1e-14);
    }
}

#[test]
fn cosine_h4_norm_is_32_pi_squared() {
    // Two modes of squared modulus 1/4, weight (1 + 1)^4, box area 4 pi^2.
    let g = grid(16, 16, PI, PI);
    let f = Field::to_spectral(&g, &g.sample(|x, _| x.cos())).unwrap();
    assert_relative_eq!(f.sobolev_norm_sq(SobolevIndex::H4), 32.0 * PI * PI, max_relative = 1e-13);
    assert_eq!(Field::zeros(&g, 0.0).sobolev_norm(SobolevIndex::H4), 0.0);
}

#[test]
fn sobolev_index_is_capped_at_eight() {
    assert!(SobolevIndex::new(8).is_ok());
    assert!(matches!(SobolevIndex::new(9), Err(Error::SobolevCap(9))));
}

#[test]
fn dimension_mismatch_is_reported() {
    let g = grid(8, 16, PI, PI);
    let err = Field::to_spectral(&g, &Array2::zeros((16, 8))).unwrap_err();
    assert!(matches!(err, Error::DimensionMismatch { .. }));
}

#[test]
fn sheared_round_trip_at_positive_time() {
    let g = grid(32, 32, 4.0 * PI, 4.0 * PI);
    let samples = g.sample(|x, y| (-(x * x + y * y) / 4.0).exp());
    let f = Field::from_physical(&g, &samples, 0.7).unwrap();
    assert!(sup_diff(&f.to_physical(), &samples) < 1e-12);
}

#[test]
fn shear_derivative_multiplier_is_minus_two_i() {
    // Single sheared mode w = cos(x'), so v(x, y) = cos(x - 2y) at t = 2.
    // Coefficients are taken relative to the corner x = -pi, hence the sign.
    let g = grid(64, 64, PI, PI);
    let mut c = g.zeros_complex();
    c[[1, 0]] = Complex64::new(-0.5, 0.0);
    c[[63, 0]] = Complex64::new(-0.5, 0.0);
    let f = Field::from_coeffs(&g, 2.0, c).unwrap();
    let d = f.derivative(0, 1).unwrap();
    let ratio = d.coeffs()[[1, 0]] / f.coeffs()[[1, 0]];
    assert_relative_eq!(ratio.re, 0.0);
    assert_relative_eq!(ratio.im, -2.0, epsilon = 1e-15);

    // Chain rule against finite differences of the physical samples.
    let v = f.to_physical();
    let gap = sup_diff(&v, &g.sample(|x, y| (x - 2.0 * y).cos()));
    assert!(gap < 1e-12, "reconstruction gap {gap}");
    let fd = fd4_first(&v, g.dy(), false);
    let err = sup_diff(&d.to_physical(), &fd);
    assert!(err < 2e-4, "spectral vs FD: {err}");
}

#[test]
fn zero_order_derivative_is_identity() {
    let g = grid(16, 16, PI, PI);
    let f = Field::to_spectral(&g, &noise(&g, 3)).unwrap();
    assert_eq!(f.derivative(0, 0).unwrap().coeffs(), f.coeffs());
    assert!(matches!(f.derivative(9, 8), Err(Error::OrderCap { order: 17, .. })));
}

#[test]
fn derivative_matches_fourth_order_differences_at_t0() {
    let f = |x: f64, y: f64| (x.sin() * (2.0 * y).cos()).exp();
    let mut errs = Vec::new();
    for n in [32, 64] {
        let g = grid(n, n, PI, PI);
        let s = g.sample(f);
        let spec = Field::to_spectral(&g, &s).unwrap().derivative(1, 0).unwrap().to_physical();
        errs.push(sup_diff(&spec, &fd4_first(&s, g.dx(), true)));
    }
    let order = (errs[0] / errs[1]).log2();
    assert!((3.6..=4.4).contains(&order), "errors {errs:?}, order {order}");
}

#[test]
fn derivative_at_positive_time_matches_differences_of_reconstruction() {
    let g = grid(64, 64, 4.0 * PI, 4.0 * PI);
    let s = g.sample(|x, y| (-(x * x + y * y) / 2.0).exp());
    let f = Field::from_physical(&g, &s, 0.4).unwrap();
    let phys = f.to_physical();
    for (l, n) in [(1, 0), (0, 1)] {
        let d = f.derivative(l, n).unwrap().to_physical();
        let h = if l == 1 { g.dx() } else { g.dy() };
        let fd = fd4_first(&phys, h, l == 1);
        assert!(sup_diff(&d, &fd) < 5e-3, "({l}, {n})");
    }
}

#[test]
fn tail_mass_examples() {
    let g = grid(64, 64, PI, PI);
    let mut c = g.zeros_complex();
    c[[1, 0]] = Complex64::new(0.5, 0.0);
    c[[63, 0]] = Complex64::new(0.5, 0.0);
    let f = Field::from_coeffs(&g, 0.0, c).unwrap();
    assert_eq!(f.tail_mass(0.25), 0.0);
    assert_eq!(Field::zeros(&g, 0.0).tail_mass(0.25), 0.0);
}

#[test]
fn white_noise_tail_is_the_band_area_fraction() {
    // Modes outside the ellipse of normalized radius 0.75 inside the square
    // [-1, 1]^2 cover 1 - pi (0.75)^2 / 4 of it.
    let g = grid(128, 128, PI, PI);
    let f = Field::to_spectral(&g, &noise(&g, 11)).unwrap();
    let measured = f.tail_mass_weighted(0.25, SobolevIndex::L2);
    let mut count = 0usize;
    for i in 0..128 {
        for j in 0..128 {
            let (u, v) = (g.kx()[i] / g.kmax_x(), g.ky()[j] / g.kmax_y());
            if u * u + v * v >= 0.75 * 0.75 {
                count += 1;
            }
        }
    }
    let counted = count as f64 / (128.0 * 128.0);
    let area = 1.0 - PI * 0.75 * 0.75 / 4.0;
    assert!((counted - area).abs() < 0.01, "{counted} vs {area}");
    assert!((measured - counted).abs() < 0.02, "{measured} vs {counted}");
}

#[test]
fn weight_examples() {
    let g = Grid::new(8, 8, 2.0, 2.0).unwrap();
    let s = noise(&g, 5);
    assert_eq!(weight_multiply(&g, &s, 0.0, BracketPower::Minus).unwrap(), s);
    let down = weight_multiply(&g, &s, 0.3, BracketPower::Minus).unwrap();
    let back = weight_multiply(&g, &down, 0.3, BracketPower::Plus).unwrap();
    assert!(sup_diff(&back, &s) < 1e-14);
    // Grid point 6 on x is 1.0 and point 4 on y is 0.0.
    assert_eq!((g.x(6), g.y(4)), (1.0, 0.0));
    let w = bracket_weight(&g, 1.0, BracketPower::Minus);
    assert_relative_eq!(w[[6, 4]], 1.0 / 2f64.sqrt(), epsilon = 1e-15);
    assert!(weight_multiply(&g, &s, -1.0, BracketPower::Minus).is_err());
}

fn grid_sizes() -> impl Strategy<Value = (usize, usize)> {
    (prop::sample::select(vec![8usize, 16, 32]), prop::sample::select(vec![8usize, 12, 24]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn round_trip_is_identity((nx, ny) in grid_sizes(), lx in 0.5..10.0f64, ly in 0.5..10.0f64,
                              t in 0.0..2.0f64, seed in any::<u64>()) {
        let g = grid(nx, ny, lx, ly);
        let s = noise(&g, seed);
        let f = Field::from_physical(&g, &s, t).unwrap();
        prop_assert!(sup_diff(&f.to_physical(), &s) < 1e-12);
    }

    #[test]
    fn parseval_at_order_zero((nx, ny) in grid_sizes(), lx in 0.5..10.0f64, ly in 0.5..10.0f64,
                              t in 0.0..2.0f64, seed in any::<u64>()) {
        let g = grid(nx, ny, lx, ly);
        let s = noise(&g, seed);
        let f = Field::from_physical(&g, &s, t).unwrap();
        let l2 = (s.iter().map(|v| v * v).sum::<f64>() * g.dx() * g.dy()).sqrt();
        let spectral = f.sobolev_norm(SobolevIndex::L2);
        prop_assert!((spectral - l2).abs() <= 1e-10 * l2);
    }

    #[test]
    fn derivatives_compose(l1 in 0usize..4, n1 in 0usize..4, l2 in 0usize..4, n2 in 0usize..4,
                           t in 0.0..1.5f64, seed in any::<u64>()) {
        let g = grid(16, 16, 2.0, 3.0);
        let f = Field::from_physical(&g, &noise(&g, seed), t).unwrap();
        let twice = f.derivative(l1, n1).unwrap().derivative(l2, n2).unwrap();
        let once = f.derivative(l1 + l2, n1 + n2).unwrap();
        let scale = once.max_abs().max(1e-300);
        prop_assert!(twice.sub(&once).unwrap().max_abs() <= 1e-14 * scale);
    }

    #[test]
    fn inverse_weight_is_bounded_and_radially_decreasing(delta in 0.0..2.0f64, lx in 0.5..6.0f64) {
        let g = Grid::new(16, 16, lx, lx).unwrap();
        let w = bracket_weight(&g, delta, BracketPower::Minus);
        let mut pts: Vec<(f64, f64)> = w
            .indexed_iter()
            .map(|((i, j), v)| (g.x(i).hypot(g.y(j)), *v))
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        prop_assert!(pts.iter().all(|p| p.1 <= 1.0));
        for pair in pts.windows(2) {
            prop_assert!(pair[1].1 <= pair[0].1 + 1e-15);
        }
    }
}
