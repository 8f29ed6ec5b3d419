//! Check records and the report they are assembled into.

use serde::Serialize;

use crate::params::ModelParams;

/// One numeric check: passes when `|measured - target| <= tolerance`.
///
/// Trend checks (monotonicity, sign patterns) count violations and use
/// `target = 0`, `tolerance = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub target: f64,
    pub measured: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    pub fn new(name: impl Into<String>, target: f64, measured: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            target,
            measured,
            tolerance,
            pass: (measured - target).abs() <= tolerance,
            detail: None,
        }
    }

    /// Trend check from a violation count.
    pub fn violations(name: impl Into<String>, count: usize) -> Self {
        Self::new(name, 0.0, count as f64, 0.0)
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

/// A validation step that could not produce its checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupError {
    pub group: String,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

/// CSV produced by a check group, written out after assembly.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub file_name: String,
    pub contents: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub params: ModelParams,
    pub phi0: f64,
    pub checks: Vec<Check>,
    /// Paths of files written for this report.
    pub artifacts: Vec<String>,
    pub errors: Vec<GroupError>,
    /// Artifact contents not yet written.
    pub pending: Vec<Artifact>,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    params: &'a ModelParams,
    phi0: f64,
    checks: &'a [Check],
    artifacts: &'a [String],
    errors: &'a [GroupError],
    status: Status,
}

impl ValidationReport {
    pub fn new(params: ModelParams, phi0: f64) -> Self {
        Self {
            params,
            phi0,
            checks: Vec::new(),
            artifacts: Vec::new(),
            errors: Vec::new(),
            pending: Vec::new(),
        }
    }

    /// Pass iff every check passes and no group errored. Empty reports pass.
    pub fn status(&self) -> Status {
        if self.errors.is_empty() && self.checks.iter().all(|c| c.pass) {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn passed(&self) -> bool {
        self.status() == Status::Pass
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn push_error(&mut self, group: &str, err: impl std::fmt::Display) {
        self.errors.push(GroupError {
            group: group.to_string(),
            message: err.to_string(),
        });
    }

    pub fn push_artifact(&mut self, file_name: impl Into<String>, contents: String) {
        self.pending.push(Artifact {
            file_name: file_name.into(),
            contents,
        });
    }

    /// Appends another report's checks, errors and artifacts.
    pub fn absorb(&mut self, other: ValidationReport) {
        self.checks.extend(other.checks);
        self.errors.extend(other.errors);
        self.artifacts.extend(other.artifacts);
        self.pending.extend(other.pending);
    }

    /// Pretty JSON with fixed key order; identical reports give identical bytes.
    pub fn to_json(&self) -> String {
        let view = ReportJson {
            params: &self.params,
            phi0: self.phi0,
            checks: &self.checks,
            artifacts: &self.artifacts,
            errors: &self.errors,
            status: self.status(),
        };
        let mut s = serde_json::to_string_pretty(&view).expect("report is serializable");
        s.push('\n');
        s
    }

    /// One line per check, for terminals.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!(
                "{} {}: measured {}, target {}, tolerance {}{}\n",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                fmt_num(c.measured),
                fmt_num(c.target),
                fmt_num(c.tolerance),
                c.detail
                    .as_ref()
                    .map(|d| format!(" ({d})"))
                    .unwrap_or_default()
            ));
        }
        for e in &self.errors {
            out.push_str(&format!("ERROR {}: {}\n", e.group, e.message));
        }
        out.push_str(&format!(
            "status: {}\n",
            if self.passed() { "pass" } else { "fail" }
        ));
        out
    }
}

/// Shortest round-trip decimal, switching to exponent form for very small
/// or large magnitudes.
pub fn fmt_num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-4..1e15).contains(&a) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

/// Header plus rows of numbers as CSV text.
pub fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row.iter().map(|&v| fmt_num(v)))
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV is UTF-8")
}
