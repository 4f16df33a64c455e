//! Pass/fail records for acceptance checks.

use serde::{Deserialize, Serialize};

/// One measured quantity compared with its requirement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    #[serde(with = "crate::report::tagged")]
    pub value: f64,
    pub requirement: String,
    pub passed: bool,
}

impl Check {
    pub fn below(name: &str, value: f64, limit: f64) -> Check {
        Check {
            name: name.into(),
            value,
            requirement: format!("< {limit:e}"),
            passed: value < limit,
        }
    }

    pub fn at_least(name: &str, value: f64, limit: f64) -> Check {
        Check {
            name: name.into(),
            value,
            requirement: format!(">= {limit}"),
            passed: value >= limit,
        }
    }

    pub fn within(name: &str, value: f64, lo: f64, hi: f64) -> Check {
        Check {
            name: name.into(),
            value,
            requirement: format!("in [{lo}, {hi}]"),
            passed: (lo..=hi).contains(&value),
        }
    }

    /// A yes/no property; `value` is 1 when it holds.
    pub fn holds(name: &str, ok: bool) -> Check {
        Check {
            name: name.into(),
            value: if ok { 1.0 } else { 0.0 },
            requirement: "holds".into(),
            passed: ok,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub id: u32,
    pub title: String,
    pub checks: Vec<Check>,
    /// Set when the check could not run to completion.
    pub error: Option<String>,
    pub passed: bool,
}

impl Verdict {
    pub fn new(id: u32, title: &str, checks: Vec<Check>) -> Verdict {
        let passed = !checks.is_empty() && checks.iter().all(|c| c.passed);
        Verdict {
            id,
            title: title.into(),
            checks,
            error: None,
            passed,
        }
    }

    pub fn failed(id: u32, title: &str, error: String) -> Verdict {
        Verdict {
            id,
            title: title.into(),
            checks: Vec::new(),
            error: Some(error),
            passed: false,
        }
    }

    /// `criterion 3 scheme-order: PASS (slope=2.01 in [1.8, 2.2])`.
    pub fn line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        let body = match &self.error {
            Some(e) => format!("error: {e}"),
            None => self
                .checks
                .iter()
                .map(|c| {
                    let mark = if c.passed { "" } else { " !" };
                    format!("{}={:.4e} {}{mark}", c.name, c.value, c.requirement)
                })
                .collect::<Vec<_>>()
                .join("; "),
        };
        // Id 0 marks run-level checks that belong to no acceptance criterion.
        let label = if self.id == 0 {
            "check".to_string()
        } else {
            format!("criterion {}", self.id)
        };
        format!("{label} {}: {status} ({body})", self.title)
    }
}
