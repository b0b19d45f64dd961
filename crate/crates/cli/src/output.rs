use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

/// Why a command did not succeed, mapped to the process exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad input, infeasible instance, or refused work: exit 1.
    Input(String),
    /// A checked inequality or construction failed: exit 2.
    Violation(String),
    /// Missing or inconsistent arguments: exit 64.
    Usage(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Input(_) => 1,
            Failure::Violation(_) => 2,
            Failure::Usage(_) => 64,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Violation(m) | Failure::Usage(m) => m,
        }
    }
}

pub fn input<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Input(e.to_string())
}

/// Result of a command: a report, written even when `status` is a failure
/// so the evidence is visible.
pub struct Outcome {
    pub report: Value,
    /// Table rendering for `--format csv`; object reports fall back to a
    /// single header/value row.
    pub csv: Option<String>,
    pub status: Result<(), Failure>,
}

impl Outcome {
    pub fn ok(report: Value) -> Self {
        Outcome { report, csv: None, status: Ok(()) }
    }

    pub fn with_csv(mut self, csv: String) -> Self {
        self.csv = Some(csv);
        self
    }

    pub fn with_status(mut self, status: Result<(), Failure>) -> Self {
        self.status = status;
        self
    }
}

/// Files read and written by a command.
#[derive(Default)]
pub struct Io {
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
}

impl Io {
    pub fn read(&mut self, path: &Path) -> Result<String, Failure> {
        self.inputs.push(path.to_path_buf());
        fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
    }

    pub fn write(&mut self, path: &Path, contents: &str) -> Result<(), Failure> {
        fs::write(path, contents).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        self.outputs.push(path.to_path_buf());
        Ok(())
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("report serializes")
}

pub fn pretty(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn cell(value: &Value) -> String {
    match value {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Bool(_) | Value::Number(_) => value.to_string(),
        _ => serde_json::to_string(value).expect("value serializes"),
    }
}

pub fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

pub fn render_csv(outcome: &Outcome) -> String {
    if let Some(csv) = &outcome.csv {
        return csv.clone();
    }
    match &outcome.report {
        Value::Object(map) => {
            let header: Vec<&str> = map.keys().map(String::as_str).collect();
            csv_table(&header, [map.values().map(cell).collect()])
        }
        other => csv_table(&["value"], [vec![cell(other)]]),
    }
}

#[derive(Serialize)]
pub struct InputDigest {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Serialize)]
pub struct RunManifest<'a, C: Serialize> {
    pub subcommand: &'a str,
    pub version: &'a str,
    pub seed: u64,
    pub config: &'a C,
    pub inputs: Vec<InputDigest>,
    pub outputs: Vec<PathBuf>,
    pub exit_code: i32,
}

pub fn digest_inputs(paths: &[PathBuf]) -> Vec<InputDigest> {
    let mut seen = std::collections::BTreeSet::new();
    paths
        .iter()
        .filter(|p| seen.insert((*p).clone()))
        .map(|p| InputDigest {
            path: p.clone(),
            sha256: fs::read(p)
                .map(|bytes| hex::encode(Sha256::digest(bytes)))
                .unwrap_or_default(),
        })
        .collect()
}
