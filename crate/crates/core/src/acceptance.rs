//! The acceptance matrix: each criterion as a function returning a [`Verdict`].

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::field::{Field, SobolevIndex};
use crate::grid::GridSpec;
use crate::modified::{delta_sweep, modified_rhs, unweighted_rhs, ModifiedConfig};
use crate::oracle::{fd_oracle_solve, relative_l2, self_convergence, Axis};
use crate::picard::picard_solve;
use crate::profiles::Profile;
use crate::smoothing::{
    commutator_table, energy_certificate, fit_a, fit_l, mixed_derivative_table, radius_series, CommutatorRow,
};
use crate::solver::{
    exact_kolmogorov_step, integrate, solve_exact, solve_linearized, solve_nonlinear,
    AnalyticCoefficient, Scheme, SolveConfig, Trajectory,
};
use crate::stats::loglog_slope;
use crate::verdict::{Check, Verdict};

/// Sizes and parameters of the acceptance runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rig {
    pub grid: GridSpec,
    pub t_final: f64,
    pub dt: f64,
    pub eta: f64,
    pub save_every: usize,
    pub seed: u64,
    pub sigma: f64,
    pub eps: f64,
    pub picard_n_max: usize,
    pub picard_tol: f64,
    pub k_max: usize,
    pub l_max: usize,
    pub n_max: usize,
    pub modified_grid: GridSpec,
    pub deltas: Vec<f64>,
    pub oracle: OracleInstance,
}

/// The elongated Gaussian used for the finite-difference comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleInstance {
    pub grid: GridSpec,
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub t_final: f64,
}

impl Default for Rig {
    fn default() -> Self {
        Rig {
            grid: GridSpec::new(256, 256, 4.0 * PI, 4.0 * PI),
            t_final: 0.5,
            dt: 1e-3,
            eta: 3.0,
            save_every: 10,
            seed: 0,
            sigma: 1.0,
            eps: 1e-3,
            picard_n_max: 12,
            picard_tol: 1e-24,
            k_max: 6,
            l_max: 4,
            n_max: 4,
            modified_grid: GridSpec::new(128, 128, 4.0 * PI, 4.0 * PI),
            deltas: vec![1e-1, 3e-2, 1e-2],
            oracle: OracleInstance {
                grid: GridSpec::new(128, 128, 90.0, 8.0),
                sigma_x: 12.0,
                sigma_y: 1.0,
                t_final: 0.2,
            },
        }
    }
}

impl Rig {
    fn config(&self, scheme: Scheme, eps: f64) -> SolveConfig {
        SolveConfig {
            eps,
            save_every: self.save_every,
            ..SolveConfig::new(self.grid, self.t_final, self.dt, scheme)
        }
    }

    fn gaussian(&self, eps: f64) -> Result<(SolveConfig, Field)> {
        let cfg = self.config(Scheme::ImexNonlinear, eps);
        let grid = cfg.grid.build()?;
        let v0 = Profile::gaussian(self.sigma).build(&grid, eps, self.seed)?;
        Ok((cfg, v0))
    }

    fn nonlinear_gaussian(&self, eps: f64) -> Result<Trajectory> {
        let (cfg, v0) = self.gaussian(eps)?;
        solve_nonlinear(&v0, &cfg)
    }
}

pub const TITLES: [&str; 11] = [
    "exact-semigroup",
    "oracle-equivalence",
    "scheme-order",
    "picard-contraction",
    "energy-uniformity",
    "delta-uniformity",
    "commutator",
    "h-bounds",
    "derivative-table",
    "rough-data-smoothing",
    "trivialities",
];

fn finish(id: u32, checks: Result<Vec<Check>>) -> Verdict {
    let title = TITLES[id as usize - 1];
    match checks {
        Ok(c) => Verdict::new(id, title, c),
        Err(e) => Verdict::failed(id, title, e.to_string()),
    }
}

/// Closed-form `exp(-(ky^2 t - kx ky t^2 + kx^2 t^3 / 3))` against the stepped solution, mode by mode.
pub fn exact_semigroup(rig: &Rig) -> Verdict {
    finish(1, (|| {
        let cfg = SolveConfig {
            save_every: usize::MAX,
            ..rig.config(Scheme::ExactKolmogorov, rig.eps)
        };
        let grid = cfg.grid.build()?;
        let v0 = Profile::AlgebraicTail.build(&grid, rig.eps, rig.seed)?;
        let mut worst = 0.0_f64;
        integrate(
            &v0,
            &cfg,
            |v, dt| Ok(exact_kolmogorov_step(v, dt)),
            |_, f| {
                let t = f.t();
                for ((i, j), c) in f.coeffs().indexed_iter() {
                    let c0 = v0.coeffs()[[i, j]];
                    let (kx, ky) = (grid.kx()[i], grid.ky()[j]);
                    let phi = ky * ky * t - kx * ky * t * t + kx * kx * t * t * t / 3.0;
                    let expected = c0 * (-phi).exp();
                    if expected.norm() > 1e-250 {
                        worst = worst.max((c - expected).norm() / expected.norm());
                    }
                }
            },
        )?;
        Ok(vec![Check::below("max_mode_rel_err", worst, 1e-12)])
    })())
}

/// Spectral nonlinear solve against the finite-difference reference on the
/// oracle instance, plus the reference solver's own convergence orders.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleStudy {
    pub times: Vec<f64>,
    /// Relative `L^2` gap at each stored time.
    pub rel_l2: Vec<f64>,
    pub slope_x: f64,
    pub slope_y: f64,
    pub slope_t: f64,
}

impl OracleStudy {
    pub fn final_gap(&self) -> f64 {
        self.rel_l2.last().copied().unwrap_or(0.0)
    }

    pub fn checks(&self) -> Vec<Check> {
        vec![
            Check::below("rel_l2_vs_oracle", self.final_gap(), 1e-3),
            Check::within("oracle_slope_x", self.slope_x, 0.7, 1.3),
            Check::within("oracle_slope_y", self.slope_y, 1.7, 2.3),
            Check::within("oracle_slope_t", self.slope_t, 0.7, 1.3),
        ]
    }
}

/// Run the oracle comparison, storing every `save_every`-th step.
pub fn oracle_study(inst: &OracleInstance, eps: f64, seed: u64, save_every: usize) -> Result<OracleStudy> {
    let grid = inst.grid.build()?;
    let profile = Profile::Gaussian {
        sigma_x: inst.sigma_x,
        sigma_y: inst.sigma_y,
    };
    let v0 = profile.build(&grid, eps, seed)?;
    let dy = grid.dy();
    let cfg = SolveConfig {
        eps,
        save_every,
        ..SolveConfig::new(inst.grid, inst.t_final, dy * dy / 6.0, Scheme::ImexNonlinear)
    };
    let spectral = solve_nonlinear(&v0, &cfg)?;
    let reference = fd_oracle_solve(&v0.to_physical(), &cfg)?;
    let mut times = Vec::new();
    let mut rel_l2 = Vec::new();
    for (f, (t, r)) in spectral.fields.iter().zip(reference.times.iter().zip(&reference.samples)) {
        if f.t().to_bits() != t.to_bits() {
            return Err(crate::error::Error::InvalidArgument(format!(
                "oracle and spectral runs stored different times ({} vs {t})",
                f.t()
            )));
        }
        times.push(*t);
        rel_l2.push(relative_l2(&f.to_physical(), r));
    }

    let init = |x: f64, y: f64| {
        (-(x * x) / (2.0 * inst.sigma_x * inst.sigma_x) - y * y / (2.0 * inst.sigma_y * inst.sigma_y)).exp()
    };
    let linear = |spec: GridSpec, steps: usize| SolveConfig {
        save_every: usize::MAX,
        ..SolveConfig::new(spec, inst.t_final, inst.t_final / steps as f64, Scheme::ExactKolmogorov)
    };
    let GridSpec { nx, ny, lx, ly } = inst.grid;
    let sx = self_convergence(init, &linear(GridSpec::new(nx / 2, ny, lx, ly), 80), Axis::X)?;
    let sy = self_convergence(init, &linear(GridSpec::new(nx, ny / 4, lx, ly), 4), Axis::Y)?;
    let st = self_convergence(init, &linear(inst.grid, 50), Axis::T)?;
    Ok(OracleStudy {
        times,
        rel_l2,
        slope_x: sx.slope,
        slope_y: sy.slope,
        slope_t: st.slope,
    })
}

pub fn oracle_equivalence(rig: &Rig) -> Verdict {
    finish(2, oracle_study(&rig.oracle, rig.eps, rig.seed, usize::MAX).map(|s| s.checks()))
}

/// Self-convergence of the variable-coefficient step on a manufactured run.
pub fn scheme_order(rig: &Rig) -> Verdict {
    finish(3, (|| {
        let mut finals = Vec::new();
        let dts = [4.0 * rig.dt, 2.0 * rig.dt, rig.dt];
        for &dt in &dts {
            let cfg = SolveConfig {
                save_every: usize::MAX,
                ..SolveConfig::new(rig.grid, rig.t_final, dt, Scheme::ImexLinearized)
            };
            let grid = cfg.grid.build()?;
            let v0 = Profile::gaussian(rig.sigma).build(&grid, rig.eps, rig.seed)?;
            let g = AnalyticCoefficient::new(&grid, |t: f64, x: f64, y: f64| {
                0.2 * t.cos() * (-(x * x + y * y) / 4.0).exp()
            });
            finals.push(solve_linearized(&v0, &g, &cfg)?.last().clone());
        }
        let e1 = finals[0].sub(&finals[1])?.sobolev_norm(SobolevIndex::H4);
        let e2 = finals[1].sub(&finals[2])?.sobolev_norm(SobolevIndex::H4);
        let slope = loglog_slope(&dts[..2], &[e1, e2]);
        Ok(vec![Check::within("imex_slope", slope, 1.8, 2.2)])
    })())
}

/// Contraction of the Picard differences and agreement of the limit with the direct solve.
pub fn picard_contraction(rig: &Rig) -> Verdict {
    finish(4, (|| {
        let mut checks = Vec::new();
        for eps in [rig.eps, 0.3 * rig.eps] {
            let (cfg, v0) = rig.gaussian(eps)?;
            let run = picard_solve(&v0, &cfg, rig.picard_n_max, rig.picard_tol)?;
            let direct = solve_nonlinear(&v0, &cfg)?;
            let mut gap = 0.0_f64;
            for (a, b) in run.limit.fields.iter().zip(&direct.fields) {
                gap = gap.max(a.sub(b)?.sobolev_norm(SobolevIndex::H4));
            }
            let worst_ratio = run.ratios().into_iter().fold(0.0, f64::max);
            let tag = format!("eps={eps:e}");
            checks.push(Check::below(&format!("max_ratio[{tag}]"), worst_ratio, 0.9));
            checks.push(Check::holds(&format!("converged[{tag}]"), run.converged));
            checks.push(Check::within(
                &format!("iterations[{tag}]"),
                run.iterations as f64,
                1.0,
                rig.picard_n_max as f64,
            ));
            checks.push(Check::below(&format!("limit_vs_direct_h4[{tag}]"), gap, 1e-6));
        }
        Ok(checks)
    })())
}

/// The energy functional scales like `eps^2` with one constant.
pub fn energy_uniformity(rig: &Rig) -> Verdict {
    finish(5, (|| {
        let mut b = Vec::new();
        for eps in [1e-2, 3e-3, 1e-3] {
            let traj = rig.nonlinear_gaussian(eps)?;
            b.push(energy_certificate(&traj, eps).b0);
        }
        let max = b.iter().copied().fold(0.0, f64::max);
        let min = b.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(vec![Check::below("b0_variation", max / min - 1.0, 0.1)])
    })())
}

/// Bound functional of the weighted system across `delta` and convergence to the unweighted run.
pub fn delta_uniformity(rig: &Rig) -> Verdict {
    finish(6, (|| {
        let grid = rig.modified_grid.build()?;
        let v0 = Profile::gaussian(rig.sigma).build(&grid, rig.eps, rig.seed)?;
        let cfg = ModifiedConfig::new(rig.modified_grid, rig.t_final);
        let sweep = delta_sweep(&v0.to_physical(), &rig.deltas, &cfg)?;
        Ok(vec![
            Check::below("bound_variation", sweep.uniformity - 1.0, 0.1),
            Check::at_least("distance_slope", sweep.slope, 0.8),
        ])
    })())
}

/// Commutator identity residuals and their second-order refinement.
pub fn commutator(_rig: &Rig) -> Verdict {
    finish(7, commutator_table(&[2.5, 3.0], 3, 0.5, 1e-4).map(|rows| commutator_checks(&rows)))
}

/// Residual and refinement-order checks over a commutator table.
pub fn commutator_checks(rows: &[CommutatorRow]) -> Vec<Check> {
    let worst = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
    let lo = rows.iter().map(|r| r.order).fold(f64::INFINITY, f64::min);
    let hi = rows.iter().map(|r| r.order).fold(f64::NEG_INFINITY, f64::max);
    vec![
        Check::below("max_residual", worst, 1e-6),
        Check::within("min_order", lo, 1.8, 2.2),
        Check::within("max_order", hi, 1.8, 2.2),
    ]
}

/// Boundedness of `A(k)` and its monotonicity in the data size.
pub fn h_bounds(rig: &Rig) -> Verdict {
    finish(8, (|| {
        let full = fit_a(&rig.nonlinear_gaussian(rig.eps)?, rig.eta, rig.k_max)?;
        let half = fit_a(&rig.nonlinear_gaussian(0.5 * rig.eps)?, rig.eta, rig.k_max)?;
        let monotone = full
            .rows
            .iter()
            .zip(&half.rows)
            .all(|(a, b)| match (a.a_k, b.a_k) {
                (Some(x), Some(y)) => y <= x,
                _ => true,
            });
        Ok(vec![
            Check::below("a_spread", full.spread, 2.0),
            Check::holds("a_resolved", full.resolved),
            Check::holds("a_nonincreasing_when_eps_halved", monotone),
        ])
    })())
}

/// Direct and vector-field evaluations of the weighted derivative table and the `L` fit.
pub fn derivative_table(rig: &Rig) -> Verdict {
    finish(9, (|| {
        let traj = rig.nonlinear_gaussian(rig.eps)?;
        let table = mixed_derivative_table(&traj, rig.eta, rig.l_max, rig.n_max)?;
        let fit = fit_l(&table);
        Ok(vec![
            Check::below("path_gap", table.path_gap, 1e-10),
            Check::below("l_spread", fit.spread, 2.0),
            Check::holds("l_finite", fit.l.is_finite()),
        ])
    })())
}

/// Radii of rough data: positive after `t = 0.05`, non-decreasing, and the
/// growth exponent of the constant-coefficient control.
pub fn rough_data_smoothing(rig: &Rig) -> Verdict {
    finish(10, (|| {
        let cfg = rig.config(Scheme::ImexNonlinear, rig.eps);
        let grid = cfg.grid.build()?;
        let v0 = Profile::AlgebraicTail.build(&grid, rig.eps, rig.seed)?;
        let rows = radius_series(&solve_nonlinear(&v0, &cfg)?);
        let control = radius_series(&solve_exact(&v0, &SolveConfig {
            scheme: Scheme::ExactKolmogorov,
            ..cfg.clone()
        })?);
        let late = |r: &&crate::smoothing::RadiusRow| r.t >= 0.05 - 1e-12;
        let min_late = rows.iter().filter(late).fold(f64::INFINITY, |m, r| m.min(r.rho_x).min(r.rho_y));
        let drops = |sel: fn(&crate::smoothing::RadiusRow) -> f64| {
            rows.windows(2).filter(|w| sel(&w[1]) < sel(&w[0])).count()
        };
        let (ts, ys): (Vec<f64>, Vec<f64>) = control
            .iter()
            .filter(late)
            .filter(|r| r.rho_y.is_finite() && r.rho_y > 0.0)
            .map(|r| (r.t, r.rho_y))
            .unzip();
        let exponent = loglog_slope(&ts, &ys);
        Ok(vec![
            Check::holds("rho_positive_after_0.05", min_late > 0.0),
            Check::below("rho_x_decreases", drops(|r| r.rho_x) as f64, 0.5),
            Check::below("rho_y_decreases", drops(|r| r.rho_y) as f64, 0.5),
            Check::within("control_rho_y_exponent", exponent, 0.4, 0.6),
        ])
    })())
}

/// Zero preservation, the `delta = 0` weighted right-hand side, and determinism.
pub fn trivialities(rig: &Rig) -> Verdict {
    finish(11, (|| {
        let (cfg, _) = rig.gaussian(rig.eps)?;
        let grid = cfg.grid.build()?;
        let zero = solve_nonlinear(&Field::zeros(&grid, 0.0), &cfg)?;
        let mgrid = rig.modified_grid.build()?;
        let v = Profile::gaussian(rig.sigma).build(&mgrid, rig.eps, rig.seed)?.to_physical();
        let a = modified_rhs(&mgrid, &v, None, 0.0)?;
        let b = unweighted_rhs(&mgrid, &v, None)?;
        let bitwise = a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits());
        let same = crate::experiment::determinism_probe(rig.seed)?;
        Ok(vec![
            Check::holds("zero_preserved", zero.is_identically_zero()),
            Check::holds("delta0_rhs_bitwise", bitwise),
            Check::holds("repeat_runs_byte_identical", same),
        ])
    })())
}

/// Run one criterion by number (1 to 11).
pub fn run_criterion(id: u32, rig: &Rig) -> Verdict {
    match id {
        1 => exact_semigroup(rig),
        2 => oracle_equivalence(rig),
        3 => scheme_order(rig),
        4 => picard_contraction(rig),
        5 => energy_uniformity(rig),
        6 => delta_uniformity(rig),
        7 => commutator(rig),
        8 => h_bounds(rig),
        9 => derivative_table(rig),
        10 => rough_data_smoothing(rig),
        11 => trivialities(rig),
        _ => Verdict::failed(id, "unknown", format!("no criterion {id}")),
    }
}

/// Every criterion in order.
pub fn run_all(rig: &Rig) -> Vec<Verdict> {
    (1..=11).map(|id| run_criterion(id, rig)).collect()
}
