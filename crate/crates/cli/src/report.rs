//! Versioned suite reports and their JSON/CSV renderings.

use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

use crate::config::RunConfig;
use crate::error::CliError;

pub const SCHEMA: u32 = 1;

/// Every check name (the part before any `/`) maps to the statement it
/// exercises. Records cannot be built for names outside this table.
pub const ANCHORS: &[(&str, &str)] = &[
    ("principal-angle-extremality", "principal angles: recursive extremal definition"),
    ("compatible-clique-count", "maximal compatible subsets: k+1 in tops, n-k+1 in stars"),
    ("geodesic-compatibility", "geodesics between orthogonal subspaces are compatible families"),
    ("geodesic-to-orthogonal", "compatible pairs extend to a geodesic ending orthogonal to X"),
    ("apartment-distance-law", "Grassmann graph distance equals k - dim(X meet Y)"),
    ("graph-distance-bound", "distance in a vertex family is at least k - dim(X meet Y)"),
    ("scalar-multiple-isometry", "orthogonality-preserving semilinear maps are scalar multiples of isometries"),
    ("scalar-multiple-rejection", "non-conformal operators fail orthogonality preservation"),
    ("induced-map-preservation", "induced maps of (anti-)unitaries preserve every relation both ways"),
    ("reconstruction-certified", "transformations preserving orthogonality and adjacency are induced"),
    ("reconstruction-endo", "inducing operator is linear or conjugate-linear"),
    ("reconstruction-projective-match", "inducing operator is unique up to a unit scalar"),
    ("extraction-query-budget", "line map recovered from two star intersections per line"),
    ("descent-witness", "images of stars lie in a unique star at every level"),
    ("wild-orthogonality", "orthogonality in both directions at dim H = 2k"),
    ("wild-adjacency-violation", "at dim H = 2k orthogonality preservers can be wild"),
];

pub fn anchor(name: &str) -> &'static str {
    let base = name.split('/').next().unwrap_or(name);
    ANCHORS
        .iter()
        .find(|(k, _)| *k == base)
        .map(|(_, a)| *a)
        .unwrap_or_else(|| panic!("check {name} has no anchor"))
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub anchor: &'static str,
    pub pass: bool,
    /// `None` when the check could not be evaluated.
    pub metric: Option<f64>,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckRecord {
    /// Passes when `metric ≤ tolerance`.
    pub fn bounded(name: &str, metric: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        CheckRecord {
            name: name.to_string(),
            anchor: anchor(name),
            pass: metric <= tolerance,
            metric: Some(metric),
            tolerance,
            detail: detail.into(),
        }
    }

    /// Passes when `metric` equals `expected` exactly and `extra` holds.
    pub fn exact(name: &str, metric: usize, expected: usize, extra: bool, detail: impl Into<String>) -> Self {
        CheckRecord {
            name: name.to_string(),
            anchor: anchor(name),
            pass: metric == expected && extra,
            metric: Some(metric as f64),
            tolerance: expected as f64,
            detail: detail.into(),
        }
    }

    pub fn errored(name: &str, tolerance: f64, error: impl std::fmt::Display) -> Self {
        CheckRecord {
            name: name.to_string(),
            anchor: anchor(name),
            pass: false,
            metric: None,
            tolerance,
            detail: format!("error: {error}"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

/// Where a run stopped early, e.g. the reconstruction stage that failed.
#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    pub stage: String,
    pub message: String,
}

/// The only field that differs between runs of one configuration.
#[derive(Debug, Clone, Serialize)]
pub struct Timestamp {
    pub unix_seconds: u64,
    pub wall_clock_seconds: f64,
}

/// A rectangular table used for CSV output.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub schema: u32,
    pub suite: String,
    pub config: RunConfig,
    pub pass: bool,
    pub summary: Summary,
    pub checks: Vec<CheckRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<Failure>,
    pub data: Value,
    pub timestamp: Timestamp,
    #[serde(skip)]
    pub table: Option<Table>,
}

impl SuiteReport {
    pub fn new(suite: &str, config: &RunConfig, checks: Vec<CheckRecord>, data: Value) -> Self {
        let passed = checks.iter().filter(|c| c.pass).count();
        let summary = Summary { total: checks.len(), passed, failed: checks.len() - passed };
        SuiteReport {
            schema: SCHEMA,
            suite: suite.to_string(),
            config: config.clone(),
            pass: summary.failed == 0,
            summary,
            checks,
            failure: None,
            data,
            timestamp: Timestamp { unix_seconds: 0, wall_clock_seconds: 0.0 },
            table: None,
        }
    }

    pub fn with_failure(mut self, stage: impl Into<String>, message: impl Into<String>) -> Self {
        self.failure = Some(Failure { stage: stage.into(), message: message.into() });
        self.pass = false;
        self
    }

    pub fn with_table(mut self, table: Table) -> Self {
        self.table = Some(table);
        self
    }

    pub fn stamp(&mut self, started: SystemTime) {
        self.timestamp = Timestamp {
            unix_seconds: started.duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            wall_clock_seconds: started.elapsed().map(|d| d.as_secs_f64()).unwrap_or(0.0),
        };
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        serde_json::to_string_pretty(self).map_err(|e| CliError::Failed(e.to_string()))
    }

    /// The command's data table when it has one, otherwise the checks.
    pub fn to_csv(&self) -> Result<String, CliError> {
        let table = match &self.table {
            Some(t) => t.clone(),
            None => {
                let mut t = Table::new(&["name", "anchor", "pass", "metric", "tolerance", "detail"]);
                for c in &self.checks {
                    t.push(vec![
                        c.name.clone(),
                        c.anchor.to_string(),
                        c.pass.to_string(),
                        c.metric.map(|m| format!("{m:e}")).unwrap_or_default(),
                        format!("{:e}", c.tolerance),
                        c.detail.clone(),
                    ]);
                }
                t
            }
        };
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| CliError::Failed(e.to_string());
        w.write_record(&table.header).map_err(csv_err)?;
        for row in &table.rows {
            w.write_record(row).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Failed(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Failed(e.to_string()))
    }
}
