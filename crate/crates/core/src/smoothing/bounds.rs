//! Factorial bounds: the constant `A` of the vector-field powers and the
//! constant `L` of the weighted mixed-derivative table.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, SobolevIndex, MAX_DERIVATIVE_ORDER};
use crate::smoothing::hfield::{apply_h_power, h_symbol, VectorFieldSpec};
use crate::solver::Trajectory;
use crate::stats::{ln_factorial, spread};

/// Per-`k` measurements behind [`fit_a`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HBoundRow {
    pub k: usize,
    /// `sup_t ||H^k v||^2_{H^4} + 1/4 int_0^t ||dy H^k v||^2_{H^4}` over stored times.
    pub m_k: f64,
    /// `(sqrt(M_k) (k+1)^2 / k!)^(1/(k-1))`, defined for `k >= 2`.
    pub a_k: Option<f64>,
    /// Largest `H^4` tail fraction of `H^k v` over stored times.
    pub tail: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HBoundFit {
    pub eta: f64,
    pub rows: Vec<HBoundRow>,
    /// `max_k A(k)`; 0 for a zero trajectory.
    pub a: f64,
    /// `max / median` of `A(k)` over `k >= 2`.
    pub spread: f64,
    /// Every `H^k v` stayed within the tail guard.
    pub resolved: bool,
    pub admissible: bool,
}

fn ln_a(m_k: f64, k: usize) -> f64 {
    (0.5 * m_k.ln() + 2.0 * ((k + 1) as f64).ln() - ln_factorial(k as u64)) / (k - 1) as f64
}

/// Measure `M_k` for `k = 0..=k_max` on the stored fields of `traj` and fit `A`.
pub fn fit_a(traj: &Trajectory, eta: f64, k_max: usize) -> Result<HBoundFit> {
    if k_max < 2 {
        return Err(Error::InvalidArgument(format!("k_max = {k_max} must be at least 2")));
    }
    VectorFieldSpec::new(eta, k_max)?;
    let guard = traj.config.tail_guard;
    let band = traj.config.tail_band;
    let exec = traj.fields.first().map(|f| f.grid().exec()).unwrap_or_default();
    let ks: Vec<usize> = (0..=k_max).collect();
    let rows = exec.map(&ks, |&k| -> Result<HBoundRow> {
        let spec = VectorFieldSpec::new(eta, k)?;
        let mut sup = 0.0_f64;
        let mut integral = 0.0;
        let mut tail = 0.0_f64;
        let mut last: Option<(f64, f64)> = None;
        for f in &traj.fields {
            let h = apply_h_power(f, spec)?;
            let d = h.dy_sobolev_norm_sq(SobolevIndex::H4);
            if let Some((t0, d0)) = last {
                integral += 0.5 * (f.t() - t0) * (d0 + d);
            }
            last = Some((f.t(), d));
            sup = sup.max(h.sobolev_norm_sq(SobolevIndex::H4) + 0.25 * integral);
            tail = tail.max(h.tail_mass(band));
        }
        let a_k = (k >= 2).then(|| if sup > 0.0 { ln_a(sup, k).exp() } else { 0.0 });
        Ok(HBoundRow {
            k,
            m_k: sup,
            a_k,
            tail,
        })
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let estimates: Vec<f64> = rows.iter().filter_map(|r| r.a_k).collect();
    let a = estimates.iter().copied().fold(0.0, f64::max);
    let spread = spread(&estimates);
    let resolved = rows.iter().all(|r| r.tail <= guard);
    Ok(HBoundFit {
        eta,
        rows,
        a,
        spread,
        resolved,
        admissible: a.is_finite() && spread < 2.0 && resolved,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivativeRow {
    pub l: usize,
    pub n: usize,
    /// `sup_t t^((eta+1) l + eta n) ||dx^l dy^n v||_{H^4}` from direct derivatives.
    pub w: f64,
    /// The same quantity assembled from the vector fields `t^(eta/2) H_(eta/2)` and `H_eta`.
    pub w_combination: f64,
    /// `(W / (l! n!))^(1/(l+n+1))`, defined for `l + n >= 1`.
    pub l_ln: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivativeTable {
    pub eta: f64,
    pub rows: Vec<DerivativeRow>,
    /// Largest relative gap between the two evaluation paths.
    pub path_gap: f64,
}

/// `W(l, n)` over stored times in `(0, T]`, computed directly and through the
/// decomposition of `t^(eta+1) dx` and `t^eta dy` into `P = t^(eta/2) H_(eta/2)`
/// and `Q = H_eta`:
///
/// ```text
/// t^(eta+1) dx = (eta+2)(eta+1)/eta (P - Q)
/// t^eta dy     = (2 eta + 2)/eta Q - (eta+2)/eta P
/// ```
pub fn mixed_derivative_table(
    traj: &Trajectory,
    eta: f64,
    l_max: usize,
    n_max: usize,
) -> Result<DerivativeTable> {
    if !(eta > 2.0) {
        return Err(Error::InvalidArgument(format!("eta = {eta} must exceed 2")));
    }
    if l_max + n_max > MAX_DERIVATIVE_ORDER {
        return Err(Error::OrderCap {
            order: l_max + n_max,
            cap: MAX_DERIVATIVE_ORDER,
        });
    }
    let pairs: Vec<(usize, usize)> = (0..=l_max)
        .flat_map(|l| (0..=n_max).map(move |n| (l, n)))
        .collect();
    let fields: Vec<&Field> = traj.fields.iter().filter(|f| f.t() > 0.0).collect();
    let exec = traj.fields.first().map(|f| f.grid().exec()).unwrap_or_default();
    let rows = exec.map(&pairs, |&(l, n)| -> Result<DerivativeRow> {
        let mut w = 0.0_f64;
        let mut w2 = 0.0_f64;
        for f in &fields {
            let t = f.t();
            let weight = t.powf((eta + 1.0) * l as f64 + eta * n as f64);
            let direct = f.derivative(l, n)?.sobolev_norm(SobolevIndex::H4) * weight;
            w = w.max(direct);
            w2 = w2.max(combination_path(f, eta, l, n).sobolev_norm(SobolevIndex::H4));
        }
        let l_ln = l_estimate(w, l, n);
        Ok(DerivativeRow {
            l,
            n,
            w,
            w_combination: w2,
            l_ln,
        })
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let path_gap = rows.iter().fold(0.0_f64, |m, r| {
        let scale = r.w.max(r.w_combination);
        if scale == 0.0 {
            m
        } else {
            m.max((r.w - r.w_combination).abs() / scale)
        }
    });
    Ok(DerivativeTable { eta, rows, path_gap })
}

/// `(W / (l! n!))^(1/(l+n+1))` in log space; `None` for `l = n = 0`.
pub fn l_estimate(w: f64, l: usize, n: usize) -> Option<f64> {
    (l + n >= 1).then(|| {
        if w > 0.0 {
            ((w.ln() - ln_factorial(l as u64) - ln_factorial(n as u64)) / (l + n + 1) as f64).exp()
        } else {
            0.0
        }
    })
}

fn combination_path(f: &Field, eta: f64, l: usize, n: usize) -> Field {
    if l == 0 && n == 0 {
        return f.clone();
    }
    let t = f.t();
    let half = t.powf(eta / 2.0);
    let cx = (eta + 2.0) * (eta + 1.0) / eta;
    let cq = (2.0 * eta + 2.0) / eta;
    let cp = (eta + 2.0) / eta;
    let i = Complex64::new(0.0, 1.0);
    f.apply_multiplier(|kx, s| {
        let p = i * half * h_symbol(eta / 2.0, t, kx, s);
        let q = i * h_symbol(eta, t, kx, s);
        let x = (p - q) * cx;
        let y = q * cq - p * cp;
        x.powi(l as i32) * y.powi(n as i32)
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LFit {
    pub l: f64,
    pub spread: f64,
    pub admissible: bool,
}

/// `L = max (W(l,n) / (l! n!))^(1/(l+n+1))` over `l + n >= 1`.
pub fn fit_l(table: &DerivativeTable) -> LFit {
    let estimates: Vec<f64> = table.rows.iter().filter_map(|r| l_estimate(r.w, r.l, r.n)).collect();
    let l = estimates.iter().copied().fold(0.0, f64::max);
    let spread = spread(&estimates);
    LFit {
        l,
        spread,
        admissible: l.is_finite() && spread < 2.0,
    }
}
