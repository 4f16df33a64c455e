use kplab::modified::{delta_sweep, modified_rhs, solve_modified, unweighted_rhs, ModifiedConfig};
use kplab::{Error, Grid, GridSpec};
use ndarray::Array2;

fn sup(a: &Array2<f64>) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `-W y dx (W v) + W dy^2 (W v)` for `v = exp(-(x^2 + y^2))`, written out by hand.
fn weighted_operator(delta: f64, x: f64, y: f64) -> f64 {
    let d2 = delta * delta;
    let w = (1.0 + d2 * (x * x + y * y)).powf(-0.5);
    let w3 = w * w * w;
    let w5 = w3 * w * w;
    let v = (-(x * x + y * y)).exp();
    let (vx, vy, vyy) = (-2.0 * x * v, -2.0 * y * v, (4.0 * y * y - 2.0) * v);
    let (wx, wy) = (-d2 * x * w3, -d2 * y * w3);
    let wyy = -d2 * w3 + 3.0 * d2 * d2 * y * y * w5;
    let ux = vx * w + v * wx;
    let uyy = vyy * w + 2.0 * vy * wy + v * wyy;
    -w * y * ux + w * uyy
}

#[test]
fn zero_input_gives_zero_rhs() {
    let grid = Grid::new(16, 16, 4.0, 4.0).unwrap();
    let z = grid.zeros_real();
    let g = grid.sample(|x, y| 0.1 * (x + y).sin());
    assert_eq!(sup(&modified_rhs(&grid, &z, Some(&g), 0.3).unwrap()), 0.0);
    assert_eq!(sup(&unweighted_rhs(&grid, &z, None).unwrap()), 0.0);
}

#[test]
fn weighted_operator_converges_at_fourth_order() {
    let delta = 0.1;
    let errs: Vec<f64> = [64, 128]
        .iter()
        .map(|&n| {
            let grid = Grid::new(n, n, 8.0, 8.0).unwrap();
            let v = grid.sample(|x, y| (-(x * x + y * y)).exp());
            let rhs = modified_rhs(&grid, &v, None, delta).unwrap();
            let exact = grid.sample(|x, y| weighted_operator(delta, x, y));
            sup(&(rhs - exact))
        })
        .collect();
    let order = (errs[0] / errs[1]).log2();
    assert!((order - 4.0).abs() < 0.3, "order {order} from {errs:?}");
}

#[test]
fn unit_coefficient_matches_no_coefficient() {
    let grid = Grid::new(32, 32, 6.0, 6.0).unwrap();
    let v = grid.sample(|x, y| (-(x * x + 2.0 * y * y)).exp());
    let zero = grid.zeros_real();
    let a = modified_rhs(&grid, &v, Some(&zero), 0.2).unwrap();
    let b = modified_rhs(&grid, &v, None, 0.2).unwrap();
    assert_eq!(a, b);
}

#[test]
fn zero_sweep_has_zero_distances() {
    let spec = GridSpec::new(32, 32, 8.0, 8.0);
    let cfg = ModifiedConfig::new(spec, 0.05);
    let sweep = delta_sweep(&spec.build().unwrap().zeros_real(), &[0.4, 0.2, 0.1], &cfg).unwrap();
    assert!(sweep.rows.iter().all(|r| r.distance_to_limit == 0.0 && r.bound_functional == 0.0));
    assert_eq!(sweep.b0, 0.0);
    assert_eq!(sweep.uniformity, 1.0);
}

#[test]
fn sweep_needs_decreasing_positive_deltas() {
    let spec = GridSpec::new(16, 16, 8.0, 8.0);
    let cfg = ModifiedConfig::new(spec, 0.05);
    let v0 = spec.build().unwrap().zeros_real();
    for bad in [&[0.1, 0.2, 0.05][..], &[0.2, 0.1][..], &[0.2, 0.1, 0.0][..]] {
        assert!(matches!(delta_sweep(&v0, bad, &cfg), Err(Error::InvalidArgument(_))));
    }
}

#[test]
fn mass_at_the_edge_is_reported_as_a_leak() {
    let spec = GridSpec::new(32, 32, 4.0, 4.0);
    let grid = spec.build().unwrap();
    let v0 = grid.sample(|x, y| 1e-3 * (-(x * x + y * y) / 8.0).exp());
    let err = solve_modified(&v0, None, 0.0, &ModifiedConfig::new(spec, 0.05)).unwrap_err();
    assert!(matches!(err, Error::BoundaryLeak { value, .. } if value > 1e-10));
}

#[test]
fn weighted_runs_approach_the_unweighted_run() {
    let spec = GridSpec::new(64, 64, 12.0, 12.0);
    let grid = spec.build().unwrap();
    let v0 = grid.sample(|x, y| 1e-3 * (-(x * x + y * y)).exp());
    let sweep = delta_sweep(&v0, &[0.2, 0.1, 0.05], &ModifiedConfig::new(spec, 0.1)).unwrap();
    let d: Vec<f64> = sweep.rows.iter().map(|r| r.distance_to_limit).collect();
    assert!(d.windows(2).all(|w| w[1] < w[0]), "{d:?}");
    assert!(sweep.slope >= 0.8, "slope {}", sweep.slope);
}
