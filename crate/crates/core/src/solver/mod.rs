//! Time integration in the sheared spectral representation.

pub mod coefficient;
pub mod step;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, SobolevIndex};
use crate::grid::GridSpec;

pub use coefficient::{AnalyticCoefficient, Coefficient, ConstantCoefficient, NodeCoefficient, ZeroCoefficient};
pub use step::{
    exact_kolmogorov_step, kolmogorov_symbol, linearized_step, nonlinear_step, Rejection,
    StepOptions,
};

/// Consecutive step halvings tolerated before a solve gives up; also fixes
/// the smallest step at `dt / 2^20`.
pub const MAX_HALVINGS: u32 = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    ExactKolmogorov,
    ImexLinearized,
    ImexNonlinear,
}

impl Scheme {
    /// Numeric id stored in checkpoint headers.
    pub fn id(self) -> u32 {
        match self {
            Scheme::ExactKolmogorov => 0,
            Scheme::ImexLinearized => 1,
            Scheme::ImexNonlinear => 2,
        }
    }

    pub fn from_id(id: u32) -> Option<Scheme> {
        match id {
            0 => Some(Scheme::ExactKolmogorov),
            1 => Some(Scheme::ImexLinearized),
            2 => Some(Scheme::ImexNonlinear),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::ExactKolmogorov => "exact-kolmogorov",
            Scheme::ImexLinearized => "imex-linearized",
            Scheme::ImexNonlinear => "imex-nonlinear",
        }
    }

    pub fn parse(s: &str) -> Option<Scheme> {
        [Scheme::ExactKolmogorov, Scheme::ImexLinearized, Scheme::ImexNonlinear]
            .into_iter()
            .find(|k| k.name() == s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub grid: GridSpec,
    pub t_final: f64,
    pub dt: f64,
    pub scheme: Scheme,
    /// `H^4` size of the initial datum.
    pub eps: f64,
    pub dealias: bool,
    pub tail_guard: f64,
    /// Outer fraction of the resolved region watched by the tail guard.
    pub tail_band: f64,
    /// Keep every `save_every`-th node in the trajectory (the last node is always kept).
    pub save_every: usize,
}

impl SolveConfig {
    pub fn new(grid: GridSpec, t_final: f64, dt: f64, scheme: Scheme) -> Self {
        SolveConfig {
            grid,
            t_final,
            dt,
            scheme,
            eps: 1e-3,
            dealias: true,
            tail_guard: 1e-8,
            tail_band: 1.0 / 3.0,
            save_every: 1,
        }
    }

    /// Every violated precondition, phrased with its field name.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            out.push(format!("t_final = {} must be positive", self.t_final));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            out.push(format!("dt = {} must be positive", self.dt));
        } else if self.dt > self.t_final {
            out.push(format!("dt = {} exceeds t_final = {}", self.dt, self.t_final));
        }
        if !(self.eps > 0.0) {
            out.push(format!("eps = {} must be positive", self.eps));
        }
        if !(self.tail_guard > 0.0 && self.tail_guard < 1.0) {
            out.push(format!("tail_guard = {} must lie in (0, 1)", self.tail_guard));
        }
        if !(self.tail_band > 0.0 && self.tail_band < 1.0) {
            out.push(format!("tail_band = {} must lie in (0, 1)", self.tail_band));
        }
        if self.save_every == 0 {
            out.push("save_every must be at least 1".to_string());
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v))
        }
    }

    /// Number of solver nodes after `t = 0`. `dt` is stretched slightly when it
    /// does not divide `t_final`.
    pub fn steps(&self) -> usize {
        ((self.t_final / self.dt).round() as usize).max(1)
    }

    /// Time of node `n`.
    pub fn node_time(&self, n: usize) -> f64 {
        let steps = self.steps();
        if n == steps {
            self.t_final
        } else {
            self.t_final * n as f64 / steps as f64
        }
    }

    pub fn step_options(&self) -> StepOptions {
        StepOptions {
            dealias: self.dealias,
            tail_guard: self.tail_guard,
            tail_band: self.tail_band,
            ..StepOptions::default()
        }
    }
}

/// Diagnostics recorded at every solver node.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub t: f64,
    /// `||v||_{H^4}`.
    pub h4: f64,
    /// `||dy v||_{H^4}^2`.
    pub dissipation: f64,
    pub tail: f64,
    /// `||v(t)||^2_{H^4} + 1/4 int_0^t ||dy v||^2_{H^4}` (trapezoidal).
    pub energy: f64,
    /// Smallest sub-step taken to reach this node.
    pub min_dt: f64,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub config: SolveConfig,
    pub times: Vec<f64>,
    pub fields: Vec<Field>,
    pub nodes: Vec<NodeRecord>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn last(&self) -> &Field {
        self.fields.last().expect("trajectory holds the initial field")
    }

    /// `sup_t` of the recorded energy functional.
    pub fn energy_sup(&self) -> f64 {
        self.nodes.iter().fold(0.0, |m, r| m.max(r.energy))
    }

    /// `sup_t ||v(t)||_{H^4}` over solver nodes.
    pub fn h4_sup(&self) -> f64 {
        self.nodes.iter().fold(0.0, |m, r| m.max(r.h4))
    }

    pub fn is_identically_zero(&self) -> bool {
        self.fields.iter().all(Field::is_zero)
    }
}

fn record(v: &Field, prev: Option<&NodeRecord>, min_dt: f64, band: f64) -> NodeRecord {
    let h4sq = v.sobolev_norm_sq(SobolevIndex::H4);
    let dissipation = v.dy_sobolev_norm_sq(SobolevIndex::H4);
    let integral = match prev {
        None => 0.0,
        Some(p) => {
            let prior = p.energy - p.h4 * p.h4;
            prior + 0.25 * 0.5 * (v.t() - p.t) * (p.dissipation + dissipation)
        }
    };
    NodeRecord {
        t: v.t(),
        h4: h4sq.sqrt(),
        dissipation,
        tail: v.tail_mass(band),
        energy: h4sq + integral,
        min_dt,
    }
}

/// March `v0` through the configured nodes with `step`, halving on rejection.
///
/// `observe` sees the field at every node (including `t = 0`).
pub fn integrate<S, O>(v0: &Field, config: &SolveConfig, mut step: S, mut observe: O) -> Result<Trajectory>
where
    S: FnMut(&Field, f64) -> std::result::Result<Field, Rejection>,
    O: FnMut(usize, &Field),
{
    config.validate()?;
    if v0.grid().spec() != config.grid {
        return Err(Error::GridMismatch);
    }
    let band = config.tail_band;
    let v0 = v0.clone().with_time(0.0);
    let steps = config.steps();
    let mut nodes = vec![record(&v0, None, 0.0, band)];
    let mut times = vec![0.0];
    let mut fields = vec![v0.clone()];
    observe(0, &v0);

    let mut cur = v0;
    let mut h = config.t_final / steps as f64;
    let floor = h / f64::from(1u32 << MAX_HALVINGS);
    for n in 1..=steps {
        let target = config.node_time(n);
        let mut halvings = 0u32;
        let mut min_dt = f64::INFINITY;
        while cur.t() < target {
            let remaining = target - cur.t();
            let last = h >= remaining * (1.0 - 1e-12);
            let dt = if last { remaining } else { h };
            match step(&cur, dt) {
                Ok(next) => {
                    min_dt = min_dt.min(dt);
                    cur = if last { next.with_time(target) } else { next };
                    halvings = 0;
                }
                Err(why) => {
                    halvings += 1;
                    if halvings > MAX_HALVINGS || dt * 0.5 < floor {
                        return Err(Error::BlowUp {
                            t: cur.t(),
                            dt,
                            reason: why.to_string(),
                        });
                    }
                    log::debug!("step rejected at t = {}: {why}; halving", cur.t());
                    h = dt * 0.5;
                }
            }
        }
        let prev = nodes.last().copied();
        nodes.push(record(&cur, prev.as_ref(), min_dt, band));
        observe(n, &cur);
        if n % config.save_every == 0 || n == steps {
            times.push(target);
            fields.push(cur.clone());
        }
        h = config.t_final / steps as f64;
    }
    Ok(Trajectory {
        config: config.clone(),
        times,
        fields,
        nodes,
    })
}

/// Solve with the exact constant-coefficient propagator.
pub fn solve_exact(v0: &Field, config: &SolveConfig) -> Result<Trajectory> {
    integrate(v0, config, |v, dt| Ok(exact_kolmogorov_step(v, dt)), |_, _| {})
}

/// Solve `dt v + y dx v - (1 + g)^2 dy^2 v = 0`.
pub fn solve_linearized(v0: &Field, g: &dyn Coefficient, config: &SolveConfig) -> Result<Trajectory> {
    if let Some(g0) = g.samples_at(0.0) {
        let gf = Field::from_sheared_samples(v0.grid(), &g0, 0.0)?;
        let size = gf.sobolev_norm(SobolevIndex::H4);
        if size > 0.1 {
            log::warn!("coefficient has H^4 norm {size:.3e}, outside the small-data regime");
        }
    }
    let opts = config.step_options();
    integrate(v0, config, |v, dt| linearized_step(v, g, dt, &opts), |_, _| {})
}

/// Solve the full nonlinear equation.
pub fn solve_nonlinear(v0: &Field, config: &SolveConfig) -> Result<Trajectory> {
    let opts = config.step_options();
    integrate(v0, config, |v, dt| nonlinear_step(v, dt, &opts), |_, _| {})
}

/// Dispatch on `config.scheme`; the linearized scheme uses `g = 0`.
pub fn solve(v0: &Field, config: &SolveConfig) -> Result<Trajectory> {
    match config.scheme {
        Scheme::ExactKolmogorov => solve_exact(v0, config),
        Scheme::ImexLinearized => solve_linearized(v0, &ZeroCoefficient, config),
        Scheme::ImexNonlinear => solve_nonlinear(v0, config),
    }
}
