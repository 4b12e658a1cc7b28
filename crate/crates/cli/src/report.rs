//! Versioned report schema and its JSON and CSV renderings.

use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::{ConfigEcho, Format};

pub const REPORT_SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skip => "skip",
        }
    }
}

/// The grid point a result belongs to. Suites that do not depend on `n` or
/// `N` leave them out.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Point {
    pub p: u64,
    pub m: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<u32>,
}

impl Point {
    pub fn label(&self) -> String {
        let mut s = format!("p={},m={}", self.p, self.m);
        if let Some(n) = self.n {
            s += &format!(",n={n}");
        }
        if let Some(k) = self.precision {
            s += &format!(",N={k}");
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub suite: String,
    pub point: Point,
    pub status: Status,
    /// Advisory results never affect the exit code.
    pub advisory: bool,
    pub diagnostics: Vec<String>,
    pub details: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}

impl SuiteResult {
    /// Whether this result makes the run fail.
    pub fn is_blocking_failure(&self) -> bool {
        self.status == Status::Fail && !self.advisory
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    pub advisory_failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: ConfigEcho,
    pub results: Vec<SuiteResult>,
    pub summary: Summary,
}

impl Report {
    pub fn new(command: &str, config: ConfigEcho, results: Vec<SuiteResult>) -> Self {
        let mut summary = Summary::default();
        for r in &results {
            match (r.status, r.advisory) {
                (Status::Pass, _) => summary.passed += 1,
                (Status::Skip, _) => summary.skipped += 1,
                (Status::Fail, false) => summary.failed += 1,
                (Status::Fail, true) => summary.advisory_failed += 1,
            }
        }
        Report {
            schema: REPORT_SCHEMA,
            tool: "mpd".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config,
            results,
            summary,
        }
    }

    pub fn passed(&self) -> bool {
        !self.results.iter().any(SuiteResult::is_blocking_failure)
    }

    pub fn render(&self, format: Format) -> std::io::Result<Vec<u8>> {
        match format {
            Format::Json => {
                let mut out = serde_json::to_vec_pretty(self)?;
                out.push(b'\n');
                Ok(out)
            }
            Format::Csv => self.to_csv(),
        }
    }

    /// One row per result; `details` is carried as compact JSON.
    fn to_csv(&self) -> std::io::Result<Vec<u8>> {
        let timings = self.results.iter().any(|r| r.timing_ms.is_some());
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec![
            "command",
            "suite",
            "p",
            "m",
            "n",
            "N",
            "status",
            "advisory",
            "diagnostics",
            "details",
        ];
        if timings {
            header.push("timing_ms");
        }
        w.write_record(&header)?;
        let opt = |x: Option<String>| x.unwrap_or_default();
        for r in &self.results {
            let mut row = vec![
                self.command.clone(),
                r.suite.clone(),
                r.point.p.to_string(),
                r.point.m.to_string(),
                opt(r.point.n.map(|x| x.to_string())),
                opt(r.point.precision.map(|x| x.to_string())),
                r.status.name().into(),
                r.advisory.to_string(),
                r.diagnostics.join(" | "),
                serde_json::to_string(&r.details)?,
            ];
            if timings {
                row.push(opt(r.timing_ms.map(|t| format!("{t:.3}"))));
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        w.into_inner().map_err(|e| e.into_error())
    }

    /// Writes to `path`, or to stdout when `path` is `None`.
    pub fn emit(&self, format: Format, path: Option<&std::path::Path>) -> std::io::Result<()> {
        let bytes = self.render(format)?;
        match path {
            Some(p) => std::fs::write(p, bytes),
            None => std::io::stdout().lock().write_all(&bytes),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RunConfig;

    fn sample() -> Report {
        let point = Point {
            p: 2,
            m: 1,
            n: Some(1),
            precision: None,
        };
        let results = vec![
            SuiteResult {
                suite: "poincare".into(),
                point: point.clone(),
                status: Status::Pass,
                advisory: false,
                diagnostics: vec![],
                details: serde_json::json!({"h0_total": 2}),
                timing_ms: None,
            },
            SuiteResult {
                suite: "jet".into(),
                point,
                status: Status::Fail,
                advisory: true,
                diagnostics: vec!["a, b".into(), "c".into()],
                details: Value::Null,
                timing_ms: None,
            },
        ];
        Report::new("verify", RunConfig::default().echo(), results)
    }

    #[test]
    fn advisory_failures_do_not_fail_the_run() {
        let r = sample();
        assert!(r.passed());
        assert_eq!(r.summary.advisory_failed, 1);
        assert_eq!(r.summary.passed, 1);
    }

    #[test]
    fn json_round_trip() {
        let r = sample();
        let bytes = r.render(Format::Json).unwrap();
        let back: Report = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(back, r);
        let v: Value = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(v["schema"], REPORT_SCHEMA);
        assert!(v["results"][0]["point"].get("N").is_none());
        assert!(v["results"][0].get("timing_ms").is_none());
    }

    #[test]
    fn csv_is_flat() {
        let text = String::from_utf8(sample().render(Format::Csv).unwrap()).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("command,suite,p,m,n,N,status"));
        assert!(lines[2].contains("\"a, b | c\""));
    }
}
