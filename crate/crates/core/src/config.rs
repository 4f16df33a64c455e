//! Experiment configuration: a flat key-value file with dotted section keys.
//!
//! ```text
//! grid.nx = 128
//! solve.dt = 2e-3
//! solve.profile = "algebraic-tail"
//! modified.deltas = [0.1, 0.03, 0.01]
//! ```
//!
//! The syntax is TOML, so `[solve]` section headers work too. Every key has a
//! default; an empty file is a valid configuration.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::acceptance::{OracleInstance, Rig};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::modified::ModifiedConfig;
use crate::profiles::Profile;
use crate::solver::{Scheme, SolveConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveBlock {
    pub t_final: f64,
    pub dt: f64,
    pub scheme: Scheme,
    pub eps: f64,
    pub profile: Profile,
    pub dealias: bool,
    pub tail_guard: f64,
    pub save_every: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PicardBlock {
    pub n_max: usize,
    pub tol: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModifiedBlock {
    pub deltas: Vec<f64>,
    pub nx: usize,
    pub ny: usize,
    pub safety: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsBlock {
    pub eta: f64,
    pub k_max: usize,
    pub l_max: usize,
    pub n_max: usize,
    pub band: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommutatorBlock {
    pub t: f64,
    pub dt: f64,
    pub k_max: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputBlock {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub grid: GridSpec,
    pub solve: SolveBlock,
    pub picard: PicardBlock,
    pub modified: ModifiedBlock,
    pub diagnostics: DiagnosticsBlock,
    pub oracle: OracleInstance,
    pub commutator: CommutatorBlock,
    pub output: OutputBlock,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let rig = Rig::default();
        ExperimentConfig {
            grid: GridSpec::new(256, 256, 4.0 * PI, 4.0 * PI),
            solve: SolveBlock {
                t_final: 0.5,
                dt: 1e-3,
                scheme: Scheme::ImexNonlinear,
                eps: 1e-3,
                profile: Profile::gaussian(1.0),
                dealias: true,
                tail_guard: 1e-8,
                save_every: 10,
                seed: 0,
            },
            picard: PicardBlock {
                n_max: 12,
                tol: 1e-24,
            },
            modified: ModifiedBlock {
                deltas: vec![1e-1, 3e-2, 1e-2],
                nx: 128,
                ny: 128,
                safety: 0.5,
            },
            diagnostics: DiagnosticsBlock {
                eta: 3.0,
                k_max: 6,
                l_max: 4,
                n_max: 4,
                band: 1.0 / 3.0,
            },
            oracle: rig.oracle,
            commutator: CommutatorBlock {
                t: 0.5,
                dt: 1e-4,
                k_max: 3,
            },
            output: OutputBlock {
                directory: PathBuf::from("kplab-out"),
                formats: vec![Format::Json, Format::Csv],
            },
        }
    }
}

/// Every accepted key, in documentation order.
pub const KEYS: &[&str] = &[
    "grid.nx",
    "grid.ny",
    "grid.lx",
    "grid.ly",
    "solve.t_final",
    "solve.dt",
    "solve.scheme",
    "solve.eps",
    "solve.profile",
    "solve.sigma_x",
    "solve.sigma_y",
    "solve.dealias",
    "solve.tail_guard",
    "solve.save_every",
    "solve.seed",
    "picard.n_max",
    "picard.tol",
    "modified.deltas",
    "modified.nx",
    "modified.ny",
    "modified.safety",
    "diagnostics.eta",
    "diagnostics.k_max",
    "diagnostics.l_max",
    "diagnostics.n_max",
    "diagnostics.band",
    "oracle.nx",
    "oracle.ny",
    "oracle.lx",
    "oracle.ly",
    "oracle.sigma_x",
    "oracle.sigma_y",
    "oracle.t_final",
    "commutator.t",
    "commutator.dt",
    "commutator.k_max",
    "output.directory",
    "output.formats",
];

fn flatten(prefix: &str, table: &toml::Table, out: &mut BTreeMap<String, toml::Value>) {
    for (k, v) in table {
        let key = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            toml::Value::Table(t) => flatten(&key, t, out),
            other => {
                out.insert(key, other.clone());
            }
        }
    }
}

fn suggestion(key: &str) -> Option<&'static str> {
    KEYS.iter()
        .map(|k| (strsim::levenshtein(key, k), *k))
        .filter(|(d, _)| *d <= 3)
        .min()
        .map(|(_, k)| k)
}

struct Reader {
    values: BTreeMap<String, toml::Value>,
    errors: Vec<String>,
}

impl Reader {
    fn float(&mut self, key: &str, slot: &mut f64) {
        match self.values.get(key) {
            None => {}
            Some(toml::Value::Float(f)) => *slot = *f,
            Some(toml::Value::Integer(i)) => *slot = *i as f64,
            Some(other) => self.errors.push(format!("{key}: expected a number, found {}", other.type_str())),
        }
    }

    fn uint<T: TryFrom<i64>>(&mut self, key: &str, slot: &mut T) {
        match self.values.get(key) {
            None => {}
            Some(toml::Value::Integer(i)) => match T::try_from(*i) {
                Ok(v) if *i >= 0 => *slot = v,
                _ => self.errors.push(format!("{key}: {i} is not a valid non-negative integer")),
            },
            Some(other) => self.errors.push(format!("{key}: expected an integer, found {}", other.type_str())),
        }
    }

    fn boolean(&mut self, key: &str, slot: &mut bool) {
        match self.values.get(key) {
            None => {}
            Some(toml::Value::Boolean(b)) => *slot = *b,
            Some(other) => self.errors.push(format!("{key}: expected true or false, found {}", other.type_str())),
        }
    }

    fn string(&mut self, key: &str) -> Option<String> {
        match self.values.get(key) {
            None => None,
            Some(toml::Value::String(s)) => Some(s.clone()),
            Some(other) => {
                self.errors.push(format!("{key}: expected a string, found {}", other.type_str()));
                None
            }
        }
    }

    fn floats(&mut self, key: &str, slot: &mut Vec<f64>) {
        match self.values.get(key) {
            None => {}
            Some(toml::Value::Array(items)) => {
                let parsed: Option<Vec<f64>> = items
                    .iter()
                    .map(|v| match v {
                        toml::Value::Float(f) => Some(*f),
                        toml::Value::Integer(i) => Some(*i as f64),
                        _ => None,
                    })
                    .collect();
                match parsed {
                    Some(v) => *slot = v,
                    None => self.errors.push(format!("{key}: expected an array of numbers")),
                }
            }
            Some(other) => self.errors.push(format!("{key}: expected an array, found {}", other.type_str())),
        }
    }

    fn strings(&mut self, key: &str) -> Option<Vec<String>> {
        match self.values.get(key) {
            None => None,
            Some(toml::Value::Array(items)) => {
                let parsed: Option<Vec<String>> = items.iter().map(|v| v.as_str().map(str::to_owned)).collect();
                if parsed.is_none() {
                    self.errors.push(format!("{key}: expected an array of strings"));
                }
                parsed
            }
            Some(other) => {
                self.errors.push(format!("{key}: expected an array, found {}", other.type_str()));
                None
            }
        }
    }
}

/// Parse and validate configuration text. All problems are reported together.
pub fn parse_config_str(text: &str) -> Result<ExperimentConfig> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::Config(vec![format!("syntax: {}", e.message())]))?;
    let mut values = BTreeMap::new();
    flatten("", &table, &mut values);

    let mut errors = Vec::new();
    for key in values.keys() {
        if !KEYS.contains(&key.as_str()) {
            match suggestion(key) {
                Some(s) => errors.push(format!("{key}: unknown key (did you mean \"{s}\"?)")),
                None => errors.push(format!("{key}: unknown key")),
            }
        }
    }
    let mut r = Reader { values, errors };
    let mut c = ExperimentConfig::default();

    r.uint("grid.nx", &mut c.grid.nx);
    r.uint("grid.ny", &mut c.grid.ny);
    r.float("grid.lx", &mut c.grid.lx);
    r.float("grid.ly", &mut c.grid.ly);

    r.float("solve.t_final", &mut c.solve.t_final);
    r.float("solve.dt", &mut c.solve.dt);
    if let Some(s) = r.string("solve.scheme") {
        match Scheme::parse(&s) {
            Some(k) => c.solve.scheme = k,
            None => r.errors.push(format!(
                "solve.scheme: unknown scheme \"{s}\" (expected exact-kolmogorov, imex-linearized or imex-nonlinear)"
            )),
        }
    }
    r.float("solve.eps", &mut c.solve.eps);
    let (mut sx, mut sy) = (1.0, 1.0);
    r.float("solve.sigma_x", &mut sx);
    r.float("solve.sigma_y", &mut sy);
    match r.string("solve.profile").as_deref() {
        None | Some("gaussian") => c.solve.profile = Profile::Gaussian { sigma_x: sx, sigma_y: sy },
        Some("algebraic-tail") => c.solve.profile = Profile::AlgebraicTail,
        Some("zero") => c.solve.profile = Profile::Zero,
        Some(other) => r.errors.push(format!(
            "solve.profile: unknown profile \"{other}\" (expected gaussian, algebraic-tail or zero)"
        )),
    }
    r.boolean("solve.dealias", &mut c.solve.dealias);
    r.float("solve.tail_guard", &mut c.solve.tail_guard);
    r.uint("solve.save_every", &mut c.solve.save_every);
    r.uint("solve.seed", &mut c.solve.seed);

    r.uint("picard.n_max", &mut c.picard.n_max);
    r.float("picard.tol", &mut c.picard.tol);

    r.floats("modified.deltas", &mut c.modified.deltas);
    r.uint("modified.nx", &mut c.modified.nx);
    r.uint("modified.ny", &mut c.modified.ny);
    r.float("modified.safety", &mut c.modified.safety);

    r.float("diagnostics.eta", &mut c.diagnostics.eta);
    r.uint("diagnostics.k_max", &mut c.diagnostics.k_max);
    r.uint("diagnostics.l_max", &mut c.diagnostics.l_max);
    r.uint("diagnostics.n_max", &mut c.diagnostics.n_max);
    r.float("diagnostics.band", &mut c.diagnostics.band);

    r.uint("oracle.nx", &mut c.oracle.grid.nx);
    r.uint("oracle.ny", &mut c.oracle.grid.ny);
    r.float("oracle.lx", &mut c.oracle.grid.lx);
    r.float("oracle.ly", &mut c.oracle.grid.ly);
    r.float("oracle.sigma_x", &mut c.oracle.sigma_x);
    r.float("oracle.sigma_y", &mut c.oracle.sigma_y);
    r.float("oracle.t_final", &mut c.oracle.t_final);

    r.float("commutator.t", &mut c.commutator.t);
    r.float("commutator.dt", &mut c.commutator.dt);
    r.uint("commutator.k_max", &mut c.commutator.k_max);

    if let Some(d) = r.string("output.directory") {
        c.output.directory = PathBuf::from(d);
    }
    if let Some(list) = r.strings("output.formats") {
        let mut formats = Vec::new();
        for f in list {
            match f.as_str() {
                "json" => formats.push(Format::Json),
                "csv" => formats.push(Format::Csv),
                other => r.errors.push(format!("output.formats: unknown format \"{other}\" (expected json or csv)")),
            }
        }
        c.output.formats = formats;
    }

    let mut errors = r.errors;
    errors.extend(c.violations());
    if errors.is_empty() {
        Ok(c)
    } else {
        Err(Error::Config(errors))
    }
}

/// Read and validate a configuration file.
pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_str(&text)
}

fn count_violations(prefix: &str, nx: usize, ny: usize, out: &mut Vec<String>) {
    for (name, n) in [("nx", nx), ("ny", ny)] {
        if n < 8 || n % 2 == 1 {
            out.push(format!("{prefix}.{name}: {n} must be an even integer >= 8"));
        }
    }
}

fn grid_violations(prefix: &str, g: &GridSpec, out: &mut Vec<String>) {
    count_violations(prefix, g.nx, g.ny, out);
    for (name, l) in [("lx", g.lx), ("ly", g.ly)] {
        if !(l > 0.0 && l.is_finite()) {
            out.push(format!("{prefix}.{name}: {l} must be positive"));
        }
    }
}

impl ExperimentConfig {
    /// Precondition violations, each prefixed with its key.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        grid_violations("grid", &self.grid, &mut out);
        for v in self.solve_config().violations() {
            let (field, rest) = v.split_once(' ').unwrap_or((v.as_str(), ""));
            let key = match field {
                "tail_band" => "diagnostics.band".to_string(),
                f => format!("solve.{f}"),
            };
            out.push(format!("{key}: {field} {rest}"));
        }
        if let Profile::Gaussian { sigma_x, sigma_y } = self.solve.profile {
            if !(sigma_x > 0.0) {
                out.push(format!("solve.sigma_x: {sigma_x} must be positive"));
            }
            if !(sigma_y > 0.0) {
                out.push(format!("solve.sigma_y: {sigma_y} must be positive"));
            }
        }
        if self.picard.n_max < 2 {
            out.push(format!("picard.n_max: {} must be at least 2", self.picard.n_max));
        }
        if !(self.picard.tol > 0.0) {
            out.push(format!("picard.tol: {} must be positive", self.picard.tol));
        }
        let d = &self.modified.deltas;
        if d.len() < 3 || d.windows(2).any(|w| w[1] >= w[0]) || d.iter().any(|&x| !(x > 0.0 && x < 1.0)) {
            out.push("modified.deltas: need at least three decreasing values in (0, 1)".into());
        }
        // The weighted system shares the box of `grid`; only its resolution is its own.
        count_violations("modified", self.modified.nx, self.modified.ny, &mut out);
        if !(self.modified.safety > 0.0 && self.modified.safety <= 1.0) {
            out.push(format!("modified.safety: {} must lie in (0, 1]", self.modified.safety));
        }
        let dg = &self.diagnostics;
        if !(dg.eta > 2.0) {
            out.push(format!("diagnostics.eta: {} must exceed 2", dg.eta));
        }
        if dg.k_max < 2 || dg.k_max > crate::field::MAX_DERIVATIVE_ORDER {
            out.push(format!("diagnostics.k_max: {} must lie in [2, 16]", dg.k_max));
        }
        if dg.l_max + dg.n_max > crate::field::MAX_DERIVATIVE_ORDER {
            out.push(format!(
                "diagnostics.l_max: l_max + n_max = {} exceeds 16",
                dg.l_max + dg.n_max
            ));
        }
        grid_violations("oracle", &self.oracle.grid, &mut out);
        if self.oracle.grid.nx > 128 || self.oracle.grid.ny > 128 {
            out.push("oracle.nx: the reference solver is limited to 128 x 128".into());
        }
        for (k, v) in [
            ("oracle.sigma_x", self.oracle.sigma_x),
            ("oracle.sigma_y", self.oracle.sigma_y),
            ("oracle.t_final", self.oracle.t_final),
        ] {
            if !(v > 0.0) {
                out.push(format!("{k}: {v} must be positive"));
            }
        }
        let cm = &self.commutator;
        if !(cm.t > cm.dt && cm.dt > 0.0) {
            out.push(format!("commutator.dt: need commutator.t > commutator.dt > 0, got {} and {}", cm.t, cm.dt));
        }
        if cm.k_max == 0 || cm.k_max > crate::field::MAX_DERIVATIVE_ORDER {
            out.push(format!("commutator.k_max: {} must lie in [1, 16]", cm.k_max));
        }
        out
    }

    pub fn solve_config(&self) -> SolveConfig {
        SolveConfig {
            grid: self.grid,
            t_final: self.solve.t_final,
            dt: self.solve.dt,
            scheme: self.solve.scheme,
            eps: self.solve.eps,
            dealias: self.solve.dealias,
            tail_guard: self.solve.tail_guard,
            tail_band: self.diagnostics.band,
            save_every: self.solve.save_every,
        }
    }

    pub fn modified_config(&self) -> ModifiedConfig {
        ModifiedConfig {
            grid: GridSpec::new(self.modified.nx, self.modified.ny, self.grid.lx, self.grid.ly),
            t_final: self.solve.t_final,
            safety: self.modified.safety,
            save_every: self.solve.save_every,
        }
    }

    /// The acceptance rig described by this configuration.
    pub fn rig(&self) -> Rig {
        let sigma = match self.solve.profile {
            Profile::Gaussian { sigma_x, .. } => sigma_x,
            _ => 1.0,
        };
        Rig {
            grid: self.grid,
            t_final: self.solve.t_final,
            dt: self.solve.dt,
            eta: self.diagnostics.eta,
            save_every: self.solve.save_every,
            seed: self.solve.seed,
            sigma,
            eps: self.solve.eps,
            picard_n_max: self.picard.n_max,
            picard_tol: self.picard.tol,
            k_max: self.diagnostics.k_max,
            l_max: self.diagnostics.l_max,
            n_max: self.diagnostics.n_max,
            modified_grid: self.modified_config().grid,
            deltas: self.modified.deltas.clone(),
            oracle: self.oracle.clone(),
        }
    }

    /// SHA-256 of the canonical JSON form, as lowercase hex. The output block
    /// is left out: where results are written does not change them.
    pub fn hash(&self) -> String {
        let mut value = serde_json::to_value(self).expect("config serializes");
        if let Some(map) = value.as_object_mut() {
            map.remove("output");
        }
        let json = value.to_string();
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = parse_config_str("").unwrap();
        assert_eq!(c.grid.nx, 256);
        assert_eq!(c.grid.ny, 256);
        assert_eq!(c.grid.lx, 4.0 * PI);
        assert_eq!(c.diagnostics.eta, 3.0);
    }

    #[test]
    fn negative_dt_names_the_key() {
        let Err(Error::Config(errs)) = parse_config_str("solve.dt = -0.1") else {
            panic!("expected a config error");
        };
        assert!(errs.iter().any(|e| e.starts_with("solve.dt")), "{errs:?}");
    }

    #[test]
    fn unknown_key_gets_a_suggestion() {
        let Err(Error::Config(errs)) = parse_config_str("solver.dt = 0.1") else {
            panic!("expected a config error");
        };
        assert!(errs[0].contains("did you mean \"solve.dt\""), "{errs:?}");
    }

    #[test]
    fn all_violations_are_collected() {
        let Err(Error::Config(errs)) = parse_config_str("grid.nx = 7\nsolve.eps = 0\npicard.n_max = 1") else {
            panic!("expected a config error");
        };
        assert!(errs.len() >= 3, "{errs:?}");
    }
}
