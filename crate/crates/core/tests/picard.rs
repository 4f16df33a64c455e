use std::f64::consts::PI;

use kplab::picard::{contraction_report, fitted_ratio, picard_solve};
use kplab::solver::solve_nonlinear;
use kplab::{Error, Field, GridSpec, Profile, Scheme, SolveConfig};

fn config() -> SolveConfig {
    SolveConfig::new(GridSpec::new(64, 64, 4.0 * PI, 4.0 * PI), 0.2, 0.02, Scheme::ImexNonlinear)
}

fn datum(eps: f64) -> Field {
    let grid = config().grid.build().unwrap();
    Profile::gaussian(2.0).build(&grid, eps, 0).unwrap()
}

#[test]
fn zero_datum_converges_at_once() {
    let grid = config().grid.build().unwrap();
    let run = picard_solve(&Field::zeros(&grid, 0.0), &config(), 5, 1e-30).unwrap();
    assert!(run.converged);
    assert_eq!(run.iterations, 1);
    assert_eq!(run.zeta[0].measure, 0.0);
    assert!(run.limit.is_identically_zero());
    assert_eq!(contraction_report(&run).fitted_ratio, 0.0);
}

#[test]
fn small_datum_contracts_to_the_direct_solution() {
    let v0 = datum(1e-3);
    let run = picard_solve(&v0, &config(), 12, 1e-26).unwrap();
    assert!(run.converged, "{:?}", run.zeta);
    let ratios = run.ratios();
    assert!(!ratios.is_empty());
    assert!(ratios.iter().all(|&r| r < 0.9), "{ratios:?}");

    let direct = solve_nonlinear(&v0, &config()).unwrap();
    let gap = run.limit.last().sub(direct.last()).unwrap().max_abs();
    assert!(gap < 1e-6 * direct.last().max_abs(), "gap {gap}");

    for z in &run.zeta {
        assert!((z.measure - (z.zeta_sup + z.zeta_dissip / 8.0)).abs() <= 1e-15 * z.measure);
    }
}

#[test]
fn contraction_strengthens_as_the_datum_shrinks() {
    let ratios: Vec<f64> = [4e-3, 2e-3, 1e-3]
        .iter()
        .map(|&eps| {
            let run = picard_solve(&datum(eps), &config(), 6, 1e-300).unwrap();
            contraction_report(&run).fitted_ratio
        })
        .collect();
    assert!(ratios.windows(2).all(|w| w[1] <= w[0]), "{ratios:?}");
    assert!(ratios[0] < 1.0);
}

#[test]
fn fitted_ratio_of_a_geometric_sequence() {
    let seq: Vec<f64> = (0..6).map(|n| 3.0 * 0.1f64.powi(n)).collect();
    assert!((fitted_ratio(&seq) - 0.1).abs() < 1e-12);
    assert_eq!(fitted_ratio(&[2.0]), 0.0);
}

#[test]
fn bad_arguments_are_refused() {
    let v0 = datum(1e-3);
    assert!(matches!(picard_solve(&v0, &config(), 1, 1e-10), Err(Error::InvalidArgument(_))));
    assert!(matches!(picard_solve(&v0, &config(), 4, 0.0), Err(Error::InvalidArgument(_))));
}
