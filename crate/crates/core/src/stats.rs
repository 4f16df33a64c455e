//! Small fitting and summary helpers shared by the diagnostics.

use nalgebra::{DMatrix, DVector};

/// Least-squares solution of `design * beta = rhs`.
pub fn least_squares(design: &DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    design.clone().svd(true, true).solve(rhs, 1e-14).ok()
}

/// Least-squares slope of `log y` against `log x`; pairs with a non-positive
/// entry are skipped. NaN when fewer than two usable pairs remain.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    line_fit(&pts).map_or(f64::NAN, |(_, s)| s)
}

/// `(intercept, slope)` of the least-squares line through `pts`.
pub fn line_fit(pts: &[(f64, f64)]) -> Option<(f64, f64)> {
    if pts.len() < 2 {
        return None;
    }
    let design = DMatrix::from_fn(pts.len(), 2, |r, c| if c == 0 { 1.0 } else { pts[r].0 });
    let rhs = DVector::from_iterator(pts.len(), pts.iter().map(|p| p.1));
    least_squares(&design, &rhs).map(|b| (b[0], b[1]))
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// `max / median`; 1 for an all-zero list.
pub fn spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let med = median(values);
    if max == 0.0 && med == 0.0 {
        1.0
    } else {
        max / med
    }
}

/// `ln(n!)`.
pub fn ln_factorial(n: u64) -> f64 {
    statrs::function::factorial::ln_factorial(n)
}

/// `ln C(n, k)`.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    statrs::function::factorial::ln_binomial(n, k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let x = [1.0, 2.0, 4.0, 8.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powi(2)).collect();
        assert!((loglog_slope(&x, &y) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn median_and_spread() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(spread(&[0.0, 0.0]), 1.0);
        assert_eq!(spread(&[1.0, 2.0, 4.0]), 2.0);
    }

    #[test]
    fn log_factorials() {
        assert!((ln_factorial(5) - 120f64.ln()).abs() < 1e-12);
        assert!((ln_factorial(30).exp() / 2.652_528_598_121_910_6e32 - 1.0).abs() < 1e-10);
        assert!((ln_binomial(6, 2) - 15f64.ln()).abs() < 1e-12);
    }
}
