//! Machine-readable run reports.
//!
//! A report is written as `report.json` (the manifest, always present) plus
//! one CSV per table. Every CSV starts with a comment line carrying the run id
//! and the configuration hash:
//!
//! ```text
//! # run=3f2a9c0b1d4e config_hash=9e1c... table=radii
//! t,rho_x,rho_y
//! 0.01,0.0001,0.37
//! ```
//!
//! Tables whose first column is `t` also get plot-ready two-column files,
//! `plot_<table>_<column>.csv`, one per remaining column.
//!
//! Non-finite numbers are written as the strings `"NaN"`, `"inf"` and `"-inf"`
//! in JSON. In CSV, NaN is an empty cell and infinities are `inf` / `-inf`.
//! Timings live in the JSON only, so repeated runs give byte-identical CSVs.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::Format;
use crate::error::{Error, Result};
use crate::verdict::Verdict;

pub const REPORT_FILE: &str = "report.json";

/// Serde helpers for floats that may be NaN or infinite.
pub mod tagged {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Tag(String),
    }

    fn to_repr(v: f64) -> Repr {
        if v.is_nan() {
            Repr::Tag("NaN".into())
        } else if v == f64::INFINITY {
            Repr::Tag("inf".into())
        } else if v == f64::NEG_INFINITY {
            Repr::Tag("-inf".into())
        } else {
            Repr::Num(v)
        }
    }

    fn from_repr<E: serde::de::Error>(r: Repr) -> Result<f64, E> {
        match r {
            Repr::Num(v) => Ok(v),
            Repr::Tag(s) => match s.as_str() {
                "NaN" => Ok(f64::NAN),
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                other => Err(E::custom(format!("unknown float tag {other:?}"))),
            },
        }
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        to_repr(*v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        from_repr(Repr::deserialize(d)?)
    }

    pub mod rows {
        use super::*;

        pub fn serialize<S: Serializer>(rows: &[Vec<f64>], s: S) -> Result<S::Ok, S::Error> {
            let out: Vec<Vec<Repr>> = rows.iter().map(|r| r.iter().map(|&v| to_repr(v)).collect()).collect();
            out.serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<f64>>, D::Error> {
            let raw: Vec<Vec<Repr>> = Vec::deserialize(d)?;
            raw.into_iter()
                .map(|r| r.into_iter().map(from_repr).collect())
                .collect()
        }
    }

    pub mod map {
        use std::collections::BTreeMap;

        use super::*;

        pub fn serialize<S: Serializer>(m: &BTreeMap<String, f64>, s: S) -> Result<S::Ok, S::Error> {
            let out: BTreeMap<&String, Repr> = m.iter().map(|(k, &v)| (k, to_repr(v))).collect();
            out.serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, f64>, D::Error> {
            let raw: BTreeMap<String, Repr> = BTreeMap::deserialize(d)?;
            raw.into_iter()
                .map(|(k, r)| from_repr::<D::Error>(r).map(|v| (k, v)))
                .collect()
        }
    }
}

/// A numeric table, written as one CSV file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    #[serde(with = "tagged::rows")]
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Table {
        Table {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width for table {}", self.name);
        self.rows.push(row);
    }

    fn is_series(&self) -> bool {
        self.columns.len() > 1 && self.columns[0] == "t"
    }
}

/// Scalar results of one module.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Fragment {
    pub module: String,
    #[serde(with = "tagged::map")]
    pub values: BTreeMap<String, f64>,
}

impl Fragment {
    pub fn new(module: &str) -> Fragment {
        Fragment {
            module: module.into(),
            values: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Fragment {
        self.values.insert(key.into(), value);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub run_id: String,
    pub config_hash: String,
    pub command: String,
    pub fragments: Vec<Fragment>,
    pub tables: Vec<Table>,
    pub verdicts: Vec<Verdict>,
    pub timings: Vec<Timing>,
    /// Files written alongside the manifest, relative to the output directory.
    pub files: Vec<String>,
    /// Set when a stage failed; the tables hold whatever finished before it.
    pub failed: bool,
    pub error: Option<String>,
}

impl DiagnosticsReport {
    /// An empty report. The run id is derived from the command and the
    /// configuration hash, so it is stable across repeated runs.
    pub fn new(command: &str, config_hash: &str) -> DiagnosticsReport {
        let digest = Sha256::digest(format!("{command}:{config_hash}").as_bytes());
        let run_id: String = digest.iter().take(6).map(|b| format!("{b:02x}")).collect();
        DiagnosticsReport {
            run_id,
            config_hash: config_hash.into(),
            command: command.into(),
            fragments: Vec::new(),
            tables: Vec::new(),
            verdicts: Vec::new(),
            timings: Vec::new(),
            files: Vec::new(),
            failed: false,
            error: None,
        }
    }

    /// True when nothing failed and every verdict passed.
    pub fn passed(&self) -> bool {
        !self.failed && self.verdicts.iter().all(|v| v.passed)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    fn header(&self, table: &str) -> String {
        format!("# run={} config_hash={} table={table}\n", self.run_id, self.config_hash)
    }
}

fn cell(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        v.to_string()
    }
}

fn csv_bytes(header: &str, columns: &[String], rows: impl Iterator<Item = Vec<f64>>) -> Result<Vec<u8>> {
    let mut out = header.as_bytes().to_vec();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(columns).map_err(csv_error)?;
        for row in rows {
            w.write_record(row.into_iter().map(cell)).map_err(csv_error)?;
        }
        w.flush().map_err(|e| Error::InvalidArgument(format!("csv: {e}")))?;
    }
    Ok(out)
}

fn csv_error(e: csv::Error) -> Error {
    Error::InvalidArgument(format!("csv: {e}"))
}

fn write(path: PathBuf, bytes: &[u8]) -> Result<()> {
    fs::write(&path, bytes).map_err(|e| Error::io(path, e))
}

/// Write `report` into `dir`. Returns the report as written, with its file list filled in.
///
/// `report.json` is always written. Table CSVs are written when `formats`
/// contains [`Format::Csv`].
pub fn emit_report(report: &DiagnosticsReport, dir: &Path, formats: &[Format]) -> Result<DiagnosticsReport> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut out = report.clone();
    out.files.clear();
    if formats.contains(&Format::Csv) {
        for table in &report.tables {
            let file = format!("{}.csv", table.name);
            let bytes = csv_bytes(&report.header(&table.name), &table.columns, table.rows.iter().cloned())?;
            write(dir.join(&file), &bytes)?;
            out.files.push(file);
            if table.is_series() {
                for (c, column) in table.columns.iter().enumerate().skip(1) {
                    let file = format!("plot_{}_{column}.csv", table.name);
                    let cols = [table.columns[0].clone(), column.clone()];
                    let rows = table.rows.iter().map(|r| vec![r[0], r[c]]);
                    write(dir.join(&file), &csv_bytes(&report.header(&table.name), &cols, rows)?)?;
                    out.files.push(file);
                }
            }
        }
    }
    let json = serde_json::to_string_pretty(&out)?;
    write(dir.join(REPORT_FILE), json.as_bytes())?;
    Ok(out)
}

/// Read a `report.json` back.
pub fn read_report(dir: &Path) -> Result<DiagnosticsReport> {
    let path = dir.join(REPORT_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_cells() {
        assert_eq!(cell(f64::NAN), "");
        assert_eq!(cell(f64::NEG_INFINITY), "-inf");
        assert_eq!(cell(0.25), "0.25");
        assert_eq!(cell(3.0), "3");
    }

    #[test]
    fn non_finite_values_survive_json() {
        let mut r = DiagnosticsReport::new("diagnose", "abc");
        r.fragments.push(Fragment::new("radius").with("rho", f64::INFINITY));
        let mut t = Table::new("x", &["a"]);
        t.push(vec![f64::NEG_INFINITY]);
        r.tables.push(t);
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"inf\"") && json.contains("\"-inf\""));
        assert_eq!(serde_json::from_str::<DiagnosticsReport>(&json).unwrap(), r);
    }
}
