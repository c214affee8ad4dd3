//! Check records, raw tables and the on-disk layout of a run.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use crate::plot::{emit_plot, PlotStyle, Series};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// The computation itself failed; counts as a failure.
    Error,
    /// Not run in this configuration; never counts as a failure.
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    /// Hard checks decide the exit status; soft ones are reported only.
    pub hard: bool,
    pub status: Status,
    pub threshold: String,
    pub values: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckRecord {
    pub fn failed_hard(&self) -> bool {
        self.hard && matches!(self.status, Status::Fail | Status::Error)
    }
}

/// What a check body hands back.
#[derive(Debug, Clone, Default)]
pub struct Verdict {
    passed: bool,
    skipped: bool,
    threshold: String,
    values: BTreeMap<String, Value>,
    note: Option<String>,
}

impl Verdict {
    pub fn new(threshold: impl Into<String>) -> Self {
        Self {
            threshold: threshold.into(),
            ..Self::default()
        }
    }

    pub fn skipped(reason: impl Into<String>) -> Self {
        Self {
            skipped: true,
            note: Some(reason.into()),
            ..Self::default()
        }
    }

    pub fn value(mut self, key: &str, v: impl Serialize) -> Self {
        self.values.insert(
            key.to_string(),
            serde_json::to_value(v).unwrap_or(Value::Null),
        );
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn pass(mut self, passed: bool) -> Self {
        self.passed = passed;
        self
    }
}

/// A raw numeric table written as CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| format!("{v:e}")))?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Plot {
    pub name: String,
    pub series: Vec<Series>,
    pub style: PlotStyle,
}

/// Collects the records, tables and plots of one experiment.
#[derive(Debug)]
pub struct Recorder {
    records: Vec<CheckRecord>,
    timings: BTreeMap<String, f64>,
    pub tables: Vec<Table>,
    pub plots: Vec<Plot>,
}

impl Recorder {
    pub fn new() -> Self {
        Self {
            records: Vec::new(),
            timings: BTreeMap::new(),
            tables: Vec::new(),
            plots: Vec::new(),
        }
    }

    /// Runs one check; an `Err` becomes a record with status `error`.
    pub fn check<F>(&mut self, name: &str, hard: bool, body: F)
    where
        F: FnOnce(&mut Self) -> Result<Verdict, stokeslab_core::Error>,
    {
        let start = Instant::now();
        let outcome = body(self);
        self.timings
            .insert(name.to_string(), start.elapsed().as_secs_f64());
        let record = match outcome {
            Ok(v) => CheckRecord {
                name: name.to_string(),
                hard,
                status: if v.skipped {
                    Status::Skipped
                } else if v.passed {
                    Status::Pass
                } else {
                    Status::Fail
                },
                threshold: v.threshold,
                values: v.values,
                note: v.note,
            },
            Err(e) => CheckRecord {
                name: name.to_string(),
                hard,
                status: Status::Error,
                threshold: String::new(),
                values: BTreeMap::new(),
                note: Some(e.to_string()),
            },
        };
        self.records.push(record);
    }

    pub fn table(&mut self, table: Table) {
        self.tables.push(table);
    }

    pub fn plot(&mut self, name: &str, series: Vec<Series>, style: PlotStyle) {
        self.plots.push(Plot {
            name: name.to_string(),
            series,
            style,
        });
    }

    pub fn records(&self) -> &[CheckRecord] {
        &self.records
    }

    pub fn into_parts(
        self,
    ) -> (
        Vec<CheckRecord>,
        BTreeMap<String, f64>,
        Vec<Table>,
        Vec<Plot>,
    ) {
        (self.records, self.timings, self.tables, self.plots)
    }
}

impl Default for Recorder {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Timings {
    pub total_seconds: f64,
    pub checks: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub claim: String,
    pub passed: bool,
    pub hard_failures: usize,
    /// Full configuration the run used.
    pub config: Value,
    pub checks: Vec<CheckRecord>,
    pub tables: Vec<String>,
    pub plots: Vec<String>,
    pub timings: Timings,
}

impl ExperimentReport {
    /// The report as JSON with the timing block removed; identical inputs
    /// give identical values.
    pub fn deterministic_json(&self) -> Value {
        let mut v = json!(self);
        if let Some(obj) = v.as_object_mut() {
            obj.remove("timings");
        }
        v
    }
}

/// A finished experiment ready to be written.
#[derive(Debug)]
pub struct RunOutput {
    pub report: ExperimentReport,
    pub tables: Vec<Table>,
    pub plots: Vec<Plot>,
}

#[derive(Debug, thiserror::Error)]
pub enum OutputError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write table {path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("plot {name}: {reason}")]
    Plot { name: String, reason: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> OutputError + '_ {
    move |source| OutputError::Io {
        path: path.to_path_buf(),
        source,
    }
}

impl RunOutput {
    /// Writes `report.json`, one CSV per table and one SVG per plot into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), OutputError> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        for t in &self.tables {
            let path = dir.join(format!("{}.csv", t.name));
            t.write_csv(&path).map_err(|source| OutputError::Csv {
                path: path.clone(),
                source,
            })?;
        }
        for p in &self.plots {
            let svg = emit_plot(&p.series, &p.style).map_err(|e| OutputError::Plot {
                name: p.name.clone(),
                reason: e.to_string(),
            })?;
            let path = dir.join(format!("{}.svg", p.name));
            fs::write(&path, svg).map_err(io_err(&path))?;
        }
        let path = dir.join("report.json");
        let text = serde_json::to_string_pretty(&self.report).expect("report serializes");
        fs::write(&path, text + "\n").map_err(io_err(&path))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use stokeslab_core::Error;

    #[test]
    fn check_statuses() {
        let mut r = Recorder::new();
        r.check("ok", true, |_| {
            Ok(Verdict::new("x < 1").value("x", 0.5).pass(true))
        });
        r.check("bad", true, |_| Ok(Verdict::new("x < 1").value("x", 2.0)));
        r.check("soft", false, |_| Ok(Verdict::new("x < 1")));
        r.check("boom", true, |_| Err(Error::Domain("no".into())));
        r.check("later", true, |_| Ok(Verdict::skipped("quick mode")));
        let s: Vec<_> = r
            .records()
            .iter()
            .map(|c| (c.status, c.failed_hard()))
            .collect();
        assert_eq!(
            s,
            [
                (Status::Pass, false),
                (Status::Fail, true),
                (Status::Fail, false),
                (Status::Error, true),
                (Status::Skipped, false)
            ]
        );
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = Table::new("t", &["a", "b"]);
        t.push(vec![1.0, 0.25]);
        let path = dir.path().join("t.csv");
        t.write_csv(&path).unwrap();
        let mut rd = csv::Reader::from_path(&path).unwrap();
        let row: Vec<f64> = rd
            .records()
            .next()
            .unwrap()
            .unwrap()
            .iter()
            .map(|v| v.parse().unwrap())
            .collect();
        assert_eq!(row, [1.0, 0.25]);
    }
}
