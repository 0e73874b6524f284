//! Reproducibility manifest attached to every run.

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Serialize)]
pub struct Input {
    pub path: String,
    /// The parsed document, so the manifest alone reproduces the run.
    pub document: Value,
}

/// A postcondition evaluated on the run's results.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: Option<f64>,
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    CheckFailed,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub arguments: Vec<String>,
    pub seed: u64,
    pub threads: Option<usize>,
    pub config: Value,
    pub inputs: Vec<Input>,
    pub outputs: Vec<String>,
    pub checks: Vec<Check>,
    pub status: Status,
}

impl Manifest {
    pub fn new(command: &'static str, arguments: Vec<String>, seed: u64, threads: Option<usize>, config: Value) -> Self {
        Self {
            tool: "qdpole",
            version: env!("CARGO_PKG_VERSION"),
            command,
            arguments,
            seed,
            threads,
            config,
            inputs: Vec::new(),
            outputs: Vec::new(),
            checks: Vec::new(),
            status: Status::Ok,
        }
    }

    /// `value <= tolerance`.
    pub fn check_at_most(&mut self, name: &str, value: f64, tolerance: f64) {
        self.push(name, value <= tolerance, Some(value), Some(tolerance));
    }

    pub fn check(&mut self, name: &str, passed: bool) {
        self.push(name, passed, None, None);
    }

    fn push(&mut self, name: &str, passed: bool, value: Option<f64>, tolerance: Option<f64>) {
        // JSON has no NaN; a non-finite measurement is reported as null and fails.
        let finite = |v: Option<f64>| v.filter(|x| x.is_finite());
        let passed = passed && value.is_none_or(f64::is_finite);
        if !passed {
            self.status = Status::CheckFailed;
        }
        self.checks.push(Check {
            name: name.into(),
            passed,
            value: finite(value),
            tolerance: finite(tolerance),
        });
    }

    pub fn passed(&self) -> bool {
        matches!(self.status, Status::Ok)
    }
}
