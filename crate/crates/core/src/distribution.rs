//! Seeded instance generators.
//!
//! Every sample is a pure function of `(spec, index)`: the generator seeds a
//! ChaCha stream from `spec.seed` and selects stream `index`, so samples can
//! be drawn in any order or in parallel.

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{InstanceDraft, PathInstance};
use crate::io::{corpus_files, read_instance, IoError};
use crate::lab::{build_lower_bound_family, LabError};
use crate::scalar::{rational, rational_from_int};
use crate::{Instance, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistributionKind {
    /// Each ordered pair is an edge independently with probability `edge_prob`.
    ErdosRenyi,
    /// `s`, layers of roughly `√(n−2)` vertices, `t`; edges only between
    /// consecutive layers.
    LayeredDag,
    /// Row-major grid, 4-neighborhood in both directions, each adjacency
    /// kept with probability `edge_prob`; `s` is the first cell and `t` the last.
    Grid,
    /// Complete digraph.
    Complete,
    /// The shatterable family; sample `index` is `x_{(index mod (n−4)) + 1}`.
    LowerBoundFamily,
    /// `*.json` files of `dir` in name order; sample `index` is file
    /// `index mod count`.
    FileCorpus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "model")]
pub enum WeightModel {
    Unit,
    /// Uniform integer in `0..=ell`.
    Integer { ell: u32 },
    /// Uniform `k / denominator` in `[0, ell]`.
    Rational { ell: u32, denominator: u32 },
    /// The `i`-th edge in `(from, to)` order weighs `2^{i−1}`.
    PowersOfTwo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDistributionSpec {
    pub kind: DistributionKind,
    pub n: usize,
    pub weights: WeightModel,
    #[serde(default = "default_edge_prob")]
    pub edge_prob: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
}

fn default_edge_prob() -> f64 {
    0.3
}

pub const MAX_ATTEMPTS: usize = 1000;

#[derive(Debug, Error)]
pub enum SampleError {
    #[error("invalid distribution spec: {0}")]
    Spec(String),
    #[error("no feasible instance after {0} attempts")]
    Infeasible(usize),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Lab(#[from] LabError),
}

impl InstanceDistributionSpec {
    pub fn new(kind: DistributionKind, n: usize, weights: WeightModel, seed: u64) -> Self {
        InstanceDistributionSpec {
            kind,
            n,
            weights,
            edge_prob: default_edge_prob(),
            seed,
            dir: None,
        }
    }

    pub fn validate(&self) -> Result<(), SampleError> {
        let bad = |m: &str| Err(SampleError::Spec(m.to_string()));
        if self.kind != DistributionKind::FileCorpus && self.n < 2 {
            return bad("n must be at least 2");
        }
        if self.kind == DistributionKind::LowerBoundFamily && self.n < 6 {
            return bad("lower-bound family needs n >= 6");
        }
        if self.kind == DistributionKind::FileCorpus && self.dir.is_none() {
            return bad("file corpus needs `dir`");
        }
        if !(0.0..=1.0).contains(&self.edge_prob) {
            return bad("edge_prob must lie in [0, 1]");
        }
        match self.weights {
            WeightModel::Rational { denominator: 0, .. } => bad("denominator must be positive"),
            _ => Ok(()),
        }
    }
}

fn draw_weights(model: &WeightModel, pairs: Vec<(usize, usize)>, rng: &mut ChaCha8Rng) -> Vec<(usize, usize, Rational)> {
    let mut pairs = pairs;
    pairs.sort_unstable();
    let two = rational_from_int(2);
    let mut power = rational_from_int(1);
    pairs
        .into_iter()
        .map(|(u, v)| {
            let w = match model {
                WeightModel::Unit => rational_from_int(1),
                WeightModel::Integer { ell } => rational_from_int(rng.gen_range(0..=*ell as i64)),
                WeightModel::Rational { ell, denominator } => {
                    let den = *denominator as i64;
                    rational(rng.gen_range(0..=*ell as i64 * den), den)
                }
                WeightModel::PowersOfTwo => {
                    let w = power.clone();
                    power = &power * &two;
                    w
                }
            };
            (u, v, w)
        })
        .collect()
}

fn topology(spec: &InstanceDistributionSpec, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let n = spec.n;
    let p = spec.edge_prob;
    let mut pairs = Vec::new();
    match spec.kind {
        DistributionKind::ErdosRenyi => {
            for u in 0..n {
                for v in 0..n {
                    if u != v && rng.gen_bool(p) {
                        pairs.push((u, v));
                    }
                }
            }
        }
        DistributionKind::Complete => {
            for u in 0..n {
                for v in 0..n {
                    if u != v {
                        pairs.push((u, v));
                    }
                }
            }
        }
        DistributionKind::LayeredDag => {
            let inner = n - 2;
            let width = ((inner as f64).sqrt().ceil() as usize).max(1);
            let mut layers: Vec<Vec<usize>> = vec![vec![0]];
            layers.extend((1..=inner).collect::<Vec<_>>().chunks(width).map(<[usize]>::to_vec));
            layers.push(vec![n - 1]);
            for pair in layers.windows(2) {
                for &u in &pair[0] {
                    for &v in &pair[1] {
                        if rng.gen_bool(p) {
                            pairs.push((u, v));
                        }
                    }
                }
            }
        }
        DistributionKind::Grid => {
            let cols = ((n as f64).sqrt().ceil() as usize).max(1);
            for u in 0..n {
                let right = (u % cols + 1 < cols).then_some(u + 1);
                let down = Some(u + cols);
                for v in [right, down].into_iter().flatten().filter(|&v| v < n) {
                    if rng.gen_bool(p) {
                        pairs.push((u, v));
                        pairs.push((v, u));
                    }
                }
            }
        }
        DistributionKind::LowerBoundFamily | DistributionKind::FileCorpus => unreachable!(),
    }
    pairs
}

/// The `index`-th instance of the distribution.
pub fn sample_instance(spec: &InstanceDistributionSpec, index: u64) -> Result<Instance, SampleError> {
    spec.validate()?;
    match spec.kind {
        DistributionKind::LowerBoundFamily => {
            let family = build_lower_bound_family::<Rational>(spec.n)?;
            let i = (index % family.len() as u64) as usize;
            return Ok(family[i].clone());
        }
        DistributionKind::FileCorpus => {
            let files = corpus_files(spec.dir.as_ref().expect("validated"))?;
            let i = (index % files.len() as u64) as usize;
            return Ok(read_instance(&files[i])?);
        }
        _ => {}
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(index);
    for _ in 0..MAX_ATTEMPTS {
        let pairs = topology(spec, &mut rng);
        let mut draft = InstanceDraft::with_default_labels(spec.n);
        draft.edges = draw_weights(&spec.weights, pairs, &mut rng);
        if let Ok(x) = PathInstance::new(draft) {
            return Ok(x);
        }
    }
    Err(SampleError::Infeasible(MAX_ATTEMPTS))
}

/// Samples `start..start + count`.
pub fn sample_many(spec: &InstanceDistributionSpec, start: u64, count: usize) -> Result<Vec<Instance>, SampleError> {
    (start..start + count as u64).map(|i| sample_instance(spec, i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::write_instance;

    #[test]
    fn deterministic_bytes() {
        let spec = InstanceDistributionSpec::new(DistributionKind::ErdosRenyi, 8, WeightModel::Unit, 7);
        let a = write_instance(&sample_instance(&spec, 0).unwrap());
        let b = write_instance(&sample_instance(&spec, 0).unwrap());
        assert_eq!(a, b);
        assert_ne!(a, write_instance(&sample_instance(&spec, 1).unwrap()));
    }

    #[test]
    fn powers_of_two_complete() {
        let spec = InstanceDistributionSpec::new(DistributionKind::Complete, 4, WeightModel::PowersOfTwo, 0);
        let x = sample_instance(&spec, 0).unwrap();
        let ws: Vec<Rational> = x.edges().iter().map(|e| e.weight.clone()).collect();
        assert_eq!(ws.len(), 12);
        for (i, w) in ws.iter().enumerate() {
            assert_eq!(*w, rational_from_int(1 << i));
        }
    }

    #[test]
    fn family_indexing() {
        let spec = InstanceDistributionSpec::new(DistributionKind::LowerBoundFamily, 8, WeightModel::Unit, 0);
        let x = sample_instance(&spec, 5).unwrap();
        let family = build_lower_bound_family::<Rational>(8).unwrap();
        assert_eq!(write_instance(&x), write_instance(&family[1]));
    }

    #[test]
    fn other_kinds_are_feasible() {
        for kind in [DistributionKind::LayeredDag, DistributionKind::Grid] {
            let mut spec = InstanceDistributionSpec::new(kind, 10, WeightModel::Integer { ell: 5 }, 3);
            spec.edge_prob = 0.7;
            for i in 0..20 {
                sample_instance(&spec, i).unwrap();
            }
        }
    }

    #[test]
    fn infeasible_spec_fails_explicitly() {
        let mut spec = InstanceDistributionSpec::new(DistributionKind::ErdosRenyi, 5, WeightModel::Unit, 0);
        spec.edge_prob = 0.0;
        assert!(matches!(sample_instance(&spec, 0), Err(SampleError::Infeasible(_))));
        spec.n = 1;
        assert!(matches!(sample_instance(&spec, 0), Err(SampleError::Spec(_))));
    }
}
