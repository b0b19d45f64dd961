//! JSON formats for instances, heuristic vectors and search traces.
//!
//! Weights and heuristic values are strings holding an exact decimal or a
//! `"p/q"` rational; JSON numbers are rejected so no value ever passes
//! through a float.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::instance::{validate, HeuristicVector, InstanceDraft, PathInstance, ValidationReport, Violation};
use crate::scalar::{format_rational, parse_rational, ParseRationalError, Scalar};
use crate::search::SearchTrace;
use crate::{Heuristic, Instance, Rational};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("bad weight on edge {index} (`{u}` -> `{v}`): {source}")]
    Weight {
        index: usize,
        u: String,
        v: String,
        source: ParseRationalError,
    },
    #[error("bad heuristic value for `{label}`: {source}")]
    RhoValue {
        label: String,
        source: ParseRationalError,
    },
    #[error("heuristic file has no value for vertex `{0}`")]
    RhoMissing(String),
    #[error("heuristic file names unknown vertex `{0}`")]
    RhoUnknown(String),
    #[error("invalid instance: {0}")]
    Invalid(ValidationReport),
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("corpus directory {0} contains no .json instances")]
    EmptyCorpus(PathBuf),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRecord {
    pub u: String,
    pub v: String,
    pub w: String,
}

/// Instance file as stored on disk.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeRecord>,
    pub start: String,
    pub goal: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RhoFile {
    values: Map<String, Value>,
}

/// The vertex total order exactly as written in the file.
pub fn extract_vertex_order(text: &str) -> Result<Vec<String>, IoError> {
    let file: InstanceFile = serde_json::from_str(text)?;
    Ok(file.vertices)
}

/// Parses an instance file into a draft; unknown labels are returned as
/// violations rather than errors.
pub fn parse_instance_draft(text: &str) -> Result<(InstanceDraft<Rational>, Vec<Violation>), IoError> {
    let file: InstanceFile = serde_json::from_str(text)?;
    let mut index = HashMap::new();
    for (i, label) in file.vertices.iter().enumerate() {
        index.entry(label.as_str()).or_insert(i);
    }
    let mut unknown = Vec::new();
    let mut lookup = |label: &str| match index.get(label) {
        Some(&i) => i,
        None => {
            let v = Violation::UnknownVertex(label.to_string());
            if !unknown.contains(&v) {
                unknown.push(v);
            }
            usize::MAX
        }
    };
    let mut edges = Vec::with_capacity(file.edges.len());
    for (i, e) in file.edges.iter().enumerate() {
        let w = parse_rational(&e.w).map_err(|source| IoError::Weight {
            index: i,
            u: e.u.clone(),
            v: e.v.clone(),
            source,
        })?;
        edges.push((lookup(&e.u), lookup(&e.v), w));
    }
    let start = lookup(&file.start);
    let goal = lookup(&file.goal);
    edges.retain(|(u, v, _)| *u != usize::MAX && *v != usize::MAX);
    let draft = InstanceDraft {
        labels: file.vertices,
        edges,
        start,
        goal,
    };
    Ok((draft, unknown))
}

/// Full validation report for an instance file. Only unreadable input
/// (bad JSON or a malformed weight) is an error.
pub fn validate_instance_text(text: &str) -> Result<ValidationReport, IoError> {
    let (draft, mut violations) = parse_instance_draft(text)?;
    if !violations.is_empty() {
        // Index-based checks need every endpoint resolved.
        let n = draft.labels.len();
        if n < 2 {
            violations.insert(0, Violation::TooFewVertices(n));
        }
        return Ok(ValidationReport { violations });
    }
    Ok(validate(&draft))
}

pub fn parse_instance(text: &str) -> Result<Instance, IoError> {
    let (draft, violations) = parse_instance_draft(text)?;
    if !violations.is_empty() {
        return Err(IoError::Invalid(ValidationReport { violations }));
    }
    PathInstance::new(draft).map_err(|e| IoError::Invalid(e.0))
}

pub fn instance_to_file(instance: &Instance) -> InstanceFile {
    let label = |v| instance.label(v).to_string();
    InstanceFile {
        vertices: instance.labels().to_vec(),
        edges: instance
            .edges()
            .iter()
            .map(|e| EdgeRecord {
                u: label(e.from),
                v: label(e.to),
                w: format_rational(&e.weight),
            })
            .collect(),
        start: label(instance.start()),
        goal: label(instance.goal()),
    }
}

/// Pretty JSON with edges in `(from, to)` vertex order.
pub fn write_instance(instance: &Instance) -> String {
    serde_json::to_string_pretty(&instance_to_file(instance)).expect("serializable") + "\n"
}

pub fn parse_rho(text: &str, instance: &PathInstance<impl Scalar>) -> Result<Heuristic, IoError> {
    let file: RhoFile = serde_json::from_str(text)?;
    for label in file.values.keys() {
        if instance.vertex(label).is_none() {
            return Err(IoError::RhoUnknown(label.clone()));
        }
    }
    let values = instance
        .labels()
        .iter()
        .map(|label| {
            let raw = file
                .values
                .get(label)
                .ok_or_else(|| IoError::RhoMissing(label.clone()))?;
            let text = raw.as_str().ok_or_else(|| IoError::RhoValue {
                label: label.clone(),
                source: ParseRationalError::Malformed(raw.to_string()),
            })?;
            parse_rational(text).map_err(|source| IoError::RhoValue {
                label: label.clone(),
                source,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(HeuristicVector::new(values).expect("rationals are finite"))
}

pub fn write_rho(rho: &Heuristic, labels: &[String]) -> String {
    let values: Map<String, Value> = labels
        .iter()
        .zip(rho.values())
        .map(|(l, v)| (l.clone(), Value::String(format_rational(v))))
        .collect();
    serde_json::to_string_pretty(&json!({ "values": values })).expect("serializable") + "\n"
}

/// Trace as a JSON array: one object per iteration, then `{"path", "cost"}`.
pub fn trace_to_json<T: Scalar>(instance: &PathInstance<T>, trace: &SearchTrace<T>) -> Value {
    let label = |v| Value::String(instance.label(v).to_string());
    let mut items: Vec<Value> = trace
        .snapshots
        .iter()
        .map(|snap| {
            let parent: Map<String, Value> = snap
                .parent
                .iter()
                .enumerate()
                .filter_map(|(v, p)| {
                    p.map(|p| (instance.labels()[v].clone(), label(p)))
                })
                .collect();
            let mut obj = Map::new();
            obj.insert("iter".into(), json!(snap.iteration));
            obj.insert("selected".into(), label(snap.selected));
            obj.insert("open".into(), snap.open.iter().map(|&v| label(v)).collect());
            obj.insert("closed".into(), snap.closed.iter().map(|&v| label(v)).collect());
            obj.insert("parent".into(), Value::Object(parent));
            if let Some(g) = &snap.g {
                let g: Map<String, Value> = g
                    .iter()
                    .enumerate()
                    .filter_map(|(v, g)| {
                        g.as_ref()
                            .map(|g| (instance.labels()[v].clone(), Value::String(g.to_string())))
                    })
                    .collect();
                obj.insert("g".into(), Value::Object(g));
            }
            Value::Object(obj)
        })
        .collect();
    items.push(json!({
        "path": trace.path.iter().map(|&v| label(v)).collect::<Vec<_>>(),
        "cost": trace.cost.to_string(),
    }));
    Value::Array(items)
}

pub fn read_text(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::File {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_instance(path: &Path) -> Result<Instance, IoError> {
    parse_instance(&read_text(path)?)
}

/// `*.json` files of a corpus directory in file-name order.
pub fn corpus_files(dir: &Path) -> Result<Vec<PathBuf>, IoError> {
    let entries = fs::read_dir(dir).map_err(|source| IoError::File {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(IoError::EmptyCorpus(dir.to_path_buf()));
    }
    Ok(files)
}

pub fn read_corpus(dir: &Path) -> Result<Vec<Instance>, IoError> {
    corpus_files(dir)?.iter().map(|p| read_instance(p)).collect()
}
