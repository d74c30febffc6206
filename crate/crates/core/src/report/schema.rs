use std::fmt::Write as _;

use super::tree::{ReportTree, Section};
use crate::error::{Error, Result};

pub const REPORT_VERSION: &str = concat!("curvelab ", env!("CARGO_PKG_VERSION"));

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Pass,
    Warn,
    Fail,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Warn => "warn",
            Status::Fail => "fail",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "pass" => Some(Status::Pass),
            "warn" => Some(Status::Warn),
            "fail" => Some(Status::Fail),
            _ => None,
        }
    }

    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:e}")
}

pub fn fmt_list(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|&x| fmt_f64(x)).collect();
    format!("[{}]", parts.join(", "))
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckRecord {
    pub name: String,
    /// Short tag naming the property checked.
    pub anchor: String,
    pub status: Status,
    pub measured: Vec<(String, f64)>,
    pub witnesses: Vec<(String, String)>,
}

impl CheckRecord {
    pub fn new(name: impl Into<String>, anchor: impl Into<String>, status: Status) -> Self {
        CheckRecord { name: name.into(), anchor: anchor.into(), status, measured: Vec::new(), witnesses: Vec::new() }
    }

    pub fn measure(mut self, key: &str, value: f64) -> Self {
        self.measured.push((key.to_string(), value));
        self
    }

    pub fn witness(mut self, key: &str, value: impl Into<String>) -> Self {
        self.witnesses.push((key.to_string(), value.into()));
        self
    }

    pub fn measured(&self, key: &str) -> Option<f64> {
        self.measured.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Table { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Comma-separated values under a header line of column names.
    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport {
    pub version: String,
    pub corpus_version: u32,
    pub command: String,
    pub config: Vec<(String, String)>,
    pub checks: Vec<CheckRecord>,
    pub tables: Vec<Table>,
    /// Seconds; kept out of [`VerificationReport::body`].
    pub wall_time: Option<f64>,
}

impl VerificationReport {
    pub fn new(command: impl Into<String>, config: Vec<(String, String)>) -> Self {
        VerificationReport {
            version: REPORT_VERSION.to_string(),
            corpus_version: super::corpus::CORPUS_VERSION,
            command: command.into(),
            config,
            checks: Vec::new(),
            tables: Vec::new(),
            wall_time: None,
        }
    }

    /// Worst status over all checks; an empty report passes.
    pub fn status(&self) -> Status {
        self.checks.iter().map(|c| c.status).max().unwrap_or(Status::Pass)
    }

    pub fn failures(&self) -> Vec<&CheckRecord> {
        self.checks.iter().filter(|c| c.status == Status::Fail).collect()
    }

    pub fn check(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    fn to_tree(&self, with_timing: bool) -> ReportTree {
        let mut tree = ReportTree { preamble: vec!["curvelab verification report".into()], sections: Vec::new() };
        let mut head = Section::new("report");
        head.push("version", &self.version);
        head.push("corpus_version", self.corpus_version.to_string());
        head.push("command", &self.command);
        head.push("status", self.status().as_str());
        head.push("checks", self.checks.len().to_string());
        head.push("failures", self.failures().len().to_string());
        tree.sections.push(head);
        let mut cfg = Section::new("config");
        cfg.entries = self.config.clone();
        tree.sections.push(cfg);
        for c in &self.checks {
            let mut s = Section::new(format!("check.{}", c.name));
            s.push("anchor", &c.anchor);
            s.push("status", c.status.as_str());
            for (k, v) in &c.measured {
                s.push(format!("measured.{k}"), fmt_f64(*v));
            }
            for (k, v) in &c.witnesses {
                s.push(format!("witness.{k}"), v);
            }
            tree.sections.push(s);
        }
        for t in &self.tables {
            let mut s = Section::new(format!("table.{}", t.name));
            s.push("columns", t.columns.join(","));
            for row in &t.rows {
                let cells: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
                s.push("row", cells.join(","));
            }
            tree.sections.push(s);
        }
        if with_timing {
            if let Some(w) = self.wall_time {
                let mut s = Section::new("timing");
                s.push("wall_time", fmt_f64(w));
                tree.sections.push(s);
            }
        }
        tree
    }

    pub fn emit(&self) -> Result<String> {
        self.to_tree(true).emit()
    }

    /// The report without the timing section; identical for identical runs.
    pub fn body(&self) -> Result<String> {
        self.to_tree(false).emit()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let tree = ReportTree::parse(text)?;
        let bad = |message: String| Error::ReportParse { line: 0, message };
        let head = tree.section("report").ok_or_else(|| bad("missing [report] section".into()))?;
        let field = |k: &str| head.get(k).map(str::to_string).ok_or_else(|| bad(format!("[report] lacks `{k}`")));
        let corpus_version = field("corpus_version")?.parse().map_err(|e| bad(format!("corpus_version: {e}")))?;
        let mut report = VerificationReport {
            version: field("version")?,
            corpus_version,
            command: field("command")?,
            config: tree.section("config").map(|s| s.entries.clone()).unwrap_or_default(),
            checks: Vec::new(),
            tables: Vec::new(),
            wall_time: None,
        };
        let num = |k: &str, v: &str| v.parse::<f64>().map_err(|e| bad(format!("{k} = {v:?}: {e}")));
        for s in &tree.sections {
            if let Some(name) = s.name.strip_prefix("check.") {
                let anchor = s.get("anchor").ok_or_else(|| bad(format!("[{}] lacks anchor", s.name)))?;
                let status = s
                    .get("status")
                    .and_then(Status::parse)
                    .ok_or_else(|| bad(format!("[{}] lacks a valid status", s.name)))?;
                let mut c = CheckRecord::new(name, anchor, status);
                for (k, v) in &s.entries {
                    if let Some(m) = k.strip_prefix("measured.") {
                        c.measured.push((m.to_string(), num(k, v)?));
                    } else if let Some(w) = k.strip_prefix("witness.") {
                        c.witnesses.push((w.to_string(), v.clone()));
                    } else if k != "anchor" && k != "status" {
                        return Err(bad(format!("unknown key `{k}` in [{}]", s.name)));
                    }
                }
                report.checks.push(c);
            } else if let Some(name) = s.name.strip_prefix("table.") {
                let columns: Vec<String> = s
                    .get("columns")
                    .ok_or_else(|| bad(format!("[{}] lacks columns", s.name)))?
                    .split(',')
                    .map(str::to_string)
                    .collect();
                let mut t = Table { name: name.to_string(), columns, rows: Vec::new() };
                for (k, v) in s.entries.iter().filter(|(k, _)| k == "row") {
                    let row = v.split(',').map(|x| num(k, x)).collect::<Result<Vec<f64>>>()?;
                    if row.len() != t.columns.len() {
                        return Err(bad(format!("row of width {} in [{}]", row.len(), s.name)));
                    }
                    t.rows.push(row);
                }
                report.tables.push(t);
            } else if s.name == "timing" {
                if let Some(w) = s.get("wall_time") {
                    report.wall_time = Some(num("wall_time", w)?);
                }
            }
        }
        Ok(report)
    }

    /// One line per check, for terminals.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let _ = write!(out, "{:<5} {}", c.status.as_str(), c.name);
            for (k, v) in c.measured.iter().take(3) {
                let _ = write!(out, "  {k}={v:.4e}");
            }
            out.push('\n');
        }
        let _ = writeln!(out, "{}: {} checks, {} failed", self.status().as_str(), self.checks.len(), self.failures().len());
        out
    }
}

/// The table `which` of `report` as CSV text.
pub fn emit_plot_data(report: &VerificationReport, which: &str) -> Result<String> {
    report.table(which).map(Table::to_csv).ok_or_else(|| {
        let names: Vec<&str> = report.tables.iter().map(|t| t.name.as_str()).collect();
        Error::InvalidArgument(format!("report has no table `{which}` (available: {})", names.join(", ")))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> VerificationReport {
        let mut r = VerificationReport::new("operator-sweep-knapp", vec![("seed".into(), "7".into())]);
        r.checks.push(
            CheckRecord::new("knapp.d2.endpoint", "endpoint-flatness", Status::Pass)
                .measure("max_over_min", 1.0000000000000002)
                .measure("tiny", 1e-300)
                .witness("trend", "none"),
        );
        let mut t = Table::new("knapp.d2.endpoint", &["delta", "ratio", "error"]);
        t.push(vec![0.5, 0.1, f64::INFINITY]);
        t.push(vec![0.25, 1.0 / 3.0, 0.0]);
        r.tables.push(t);
        r.tables.push(Table::new("empty", &["s", "ratio"]));
        r.wall_time = Some(0.125);
        r
    }

    #[test]
    fn parse_emit_roundtrip() {
        let r = sample();
        let text = r.emit().unwrap();
        let back = VerificationReport::parse(&text).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.emit().unwrap(), text);
        assert!(!r.body().unwrap().contains("wall_time"));
        assert!(text.contains("wall_time"));
    }

    #[test]
    fn plot_data() {
        let r = sample();
        let csv = emit_plot_data(&r, "knapp.d2.endpoint").unwrap();
        assert_eq!(csv.lines().next(), Some("delta,ratio,error"));
        assert_eq!(csv.lines().count(), 3);
        assert_eq!(emit_plot_data(&r, "empty").unwrap(), "s,ratio\n");
        assert!(emit_plot_data(&r, "missing").is_err());
    }

    #[test]
    fn status_is_worst() {
        let mut r = sample();
        assert_eq!(r.status(), Status::Pass);
        r.checks.push(CheckRecord::new("x", "y", Status::Warn));
        assert_eq!(r.status(), Status::Warn);
        r.checks.push(CheckRecord::new("z", "y", Status::Fail));
        assert_eq!(r.status(), Status::Fail);
        assert_eq!(r.failures().len(), 1);
    }
}
