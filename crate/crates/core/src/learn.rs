//! Empirical inconsistency over a training set and its minimization by
//! subgradient descent.
//!
//! The objective `f(ρ) = (1/N) Σ_i Δ_ρ(x_i)` is a sum of hinge functions of
//! differences `ρ_v − ρ_c`, hence convex and piecewise linear.

use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::inconsistency::inconsistency_on_path;
use crate::instance::{HeuristicVector, PathInstance, VertexId};
use crate::optimal::{dijkstra_opt, distances, CanonicalOptimalPath, Direction, Unreachable};
use crate::scalar::Scalar;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LearnError {
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("training instances have different vertex counts")]
    VertexCountMismatch,
    #[error(transparent)]
    Unreachable(#[from] Unreachable),
    #[error("invalid learner config: {0}")]
    Config(String),
}

/// Instances together with their canonical optimal paths, which do not
/// depend on `ρ` and are computed once.
#[derive(Clone, Debug)]
pub struct TrainingSet<T> {
    instances: Vec<PathInstance<T>>,
    optimal: Vec<CanonicalOptimalPath<T>>,
}

impl<T: Scalar> TrainingSet<T> {
    pub fn new(instances: Vec<PathInstance<T>>) -> Result<Self, LearnError> {
        let first = instances.first().ok_or(LearnError::EmptyTrainingSet)?;
        let n = first.num_vertices();
        if instances.iter().any(|x| x.num_vertices() != n) {
            return Err(LearnError::VertexCountMismatch);
        }
        let optimal = instances
            .iter()
            .map(dijkstra_opt)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(TrainingSet { instances, optimal })
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn num_vertices(&self) -> usize {
        self.instances[0].num_vertices()
    }

    pub fn instances(&self) -> &[PathInstance<T>] {
        &self.instances
    }

    pub fn optimal_paths(&self) -> &[CanonicalOptimalPath<T>] {
        &self.optimal
    }

    /// Same set in another scalar type; canonical paths are carried over,
    /// not recomputed.
    pub fn map_scalar<U: Scalar>(&self, f: impl Fn(&T) -> U + Copy) -> TrainingSet<U> {
        TrainingSet {
            instances: self.instances.iter().map(|x| x.map_weights(f)).collect(),
            optimal: self
                .optimal
                .iter()
                .map(|p| CanonicalOptimalPath {
                    path: p.path.clone(),
                    cost: f(&p.cost),
                })
                .collect(),
        }
    }

    /// Per-instance `Δ_ρ(x_i)`.
    pub fn inconsistencies(&self, rho: &HeuristicVector<T>) -> Vec<T> {
        self.instances
            .iter()
            .zip(&self.optimal)
            .map(|(x, p)| inconsistency_on_path(x, &p.path, rho))
            .collect()
    }

    /// `(1/N) Σ_i Δ_ρ(x_i)`.
    pub fn empirical_inconsistency(&self, rho: &HeuristicVector<T>) -> T {
        let sum = self
            .inconsistencies(rho)
            .into_iter()
            .fold(T::zero(), |a, b| a + b);
        sum / T::from_int(self.len() as i64)
    }

    /// A subgradient of the empirical inconsistency at `ρ`: every strictly
    /// positive term adds `+1/N` at `v` and `−1/N` at `c`; terms at the kink
    /// contribute nothing.
    pub fn subgradient(&self, rho: &HeuristicVector<T>) -> Vec<T> {
        let mut grad = vec![T::zero(); self.num_vertices()];
        let one = T::one();
        for (x, p) in self.instances.iter().zip(&self.optimal) {
            for w in p.path.windows(2).skip(1) {
                let weight = x.weight(w[0], w[1]).expect("optimal path edge");
                let diff = rho.get(w[0]).clone() - rho.get(w[1]).clone() - weight.clone();
                if diff > T::zero() {
                    grad[w[0].0] = grad[w[0].0].clone() + one.clone();
                    grad[w[1].0] = grad[w[1].0].clone() - one.clone();
                }
            }
        }
        let n = T::from_int(self.len() as i64);
        grad.into_iter().map(|g| g / n.clone()).collect()
    }

    /// Exact distances to the goal on the first instance; vertices that
    /// cannot reach the goal get one more than the total edge weight.
    pub fn exact_distances_on_first(&self) -> HeuristicVector<T> {
        let x = &self.instances[0];
        let sentinel = x
            .edges()
            .iter()
            .fold(T::one(), |a, e| a + e.weight.clone());
        let d = distances(x, x.goal(), Direction::Backward, None);
        HeuristicVector::new(d.into_iter().map(|v| v.unwrap_or(sentinel.clone())).collect())
            .expect("finite distances")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode", content = "values")]
pub enum InitMode {
    Zeros,
    ExactDistances,
    /// Uniform entries in `[low, high]` drawn from the config seed.
    Random { low: f64, high: f64 },
    Given(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LearnerConfig {
    /// Base step `η`; iteration `t` uses `η / t^decay`.
    pub eta: f64,
    pub decay: f64,
    pub max_steps: usize,
    pub init: InitMode,
    pub seed: u64,
    /// Stop once the objective is at or below this value.
    pub tolerance: f64,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig {
            eta: 1.0,
            decay: 0.5,
            max_steps: 2000,
            init: InitMode::Zeros,
            seed: 0,
            tolerance: 0.0,
        }
    }
}

impl LearnerConfig {
    pub fn validate(&self) -> Result<(), LearnError> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(LearnError::Config("eta must be positive".into()));
        }
        if self.max_steps < 1 {
            return Err(LearnError::Config("max_steps must be at least 1".into()));
        }
        if !(self.decay >= 0.0 && self.decay.is_finite()) {
            return Err(LearnError::Config("decay must be non-negative".into()));
        }
        if let InitMode::Random { low, high } = self.init {
            if !(low <= high && low.is_finite() && high.is_finite()) {
                return Err(LearnError::Config("random init needs low <= high".into()));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LearnOutcome<F> {
    /// Best iterate found.
    pub rho: HeuristicVector<F>,
    pub objective: F,
    /// Objective of every iterate, starting with the initial point.
    pub history: Vec<F>,
    pub best_iteration: usize,
    pub converged: bool,
}

impl<F: Scalar + Float> LearnOutcome<F> {
    /// Running minimum of `history`.
    pub fn best_history(&self) -> Vec<F> {
        let mut best = F::infinity();
        self.history
            .iter()
            .map(|&v| {
                best = best.min(v);
                best
            })
            .collect()
    }
}

/// Subgradient descent on the empirical inconsistency, returning the best
/// iterate. Summation order is fixed, so results are deterministic.
pub fn minimize_empirical_inconsistency<F: Scalar + Float>(
    training: &TrainingSet<F>,
    config: &LearnerConfig,
) -> Result<LearnOutcome<F>, LearnError> {
    config.validate()?;
    let n = training.num_vertices();
    let to_f = |v: f64| F::from_f64(v).expect("f64 converts");
    let mut rho = match &config.init {
        InitMode::Zeros => HeuristicVector::zeros(n),
        InitMode::ExactDistances => training.exact_distances_on_first(),
        InitMode::Random { low, high } => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            let values = (0..n)
                .map(|_| to_f(if low < high { rng.gen_range(*low..=*high) } else { *low }))
                .collect();
            HeuristicVector::new(values).expect("finite")
        }
        InitMode::Given(values) => {
            if values.len() != n {
                return Err(LearnError::Config(format!(
                    "given vector has {} entries, expected {n}",
                    values.len()
                )));
            }
            HeuristicVector::new(values.iter().map(|&v| to_f(v)).collect())
                .map_err(|e| LearnError::Config(e.to_string()))?
        }
    };
    let tolerance = to_f(config.tolerance);
    let mut objective = training.empirical_inconsistency(&rho);
    let mut history = vec![objective];
    let mut best = (rho.clone(), objective, 0usize);
    let mut converged = objective <= tolerance;
    let mut step = 1usize;
    while !converged && step <= config.max_steps {
        let grad = training.subgradient(&rho);
        let size = to_f(config.eta) / to_f(step as f64).powf(to_f(config.decay));
        for (i, g) in grad.into_iter().enumerate() {
            let v = VertexId(i);
            rho.set(v, *rho.get(v) - size * g);
        }
        objective = training.empirical_inconsistency(&rho);
        history.push(objective);
        if objective < best.1 {
            best = (rho.clone(), objective, step);
        }
        converged = objective <= tolerance;
        step += 1;
    }
    Ok(LearnOutcome {
        rho: best.0,
        objective: best.1,
        history,
        best_iteration: best.2,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::InstanceDraft;

    fn chain() -> PathInstance<f64> {
        let mut d = InstanceDraft::with_default_labels(4);
        d.edges = vec![(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)];
        PathInstance::new(d).unwrap()
    }

    #[test]
    fn exact_distances_are_a_fixed_point() {
        let set = TrainingSet::new(vec![chain()]).unwrap();
        let cfg = LearnerConfig {
            init: InitMode::ExactDistances,
            ..LearnerConfig::default()
        };
        let out = minimize_empirical_inconsistency(&set, &cfg).unwrap();
        assert_eq!(out.objective, 0.0);
        assert_eq!(out.history, vec![0.0]);
        assert_eq!(out.rho.values(), &[3.0, 2.0, 1.0, 0.0]);
        assert!(out.converged);
    }

    #[test]
    fn subgradient_signs() {
        let set = TrainingSet::new(vec![chain()]).unwrap();
        let rho = HeuristicVector::new(vec![0.0, 3.0, 1.0, 0.0]).unwrap();
        // (a, b) active, (b, t) at its kink.
        assert_eq!(set.subgradient(&rho), vec![0.0, 1.0, -1.0, 0.0]);
    }

    #[test]
    fn config_validation() {
        let set = TrainingSet::new(vec![chain()]).unwrap();
        let bad = LearnerConfig {
            eta: 0.0,
            ..LearnerConfig::default()
        };
        assert!(minimize_empirical_inconsistency(&set, &bad).is_err());
        assert_eq!(
            TrainingSet::<f64>::new(vec![]).unwrap_err(),
            LearnError::EmptyTrainingSet
        );
    }

    #[test]
    fn budget_exhaustion_reports_not_converged() {
        let set = TrainingSet::new(vec![chain()]).unwrap();
        let cfg = LearnerConfig {
            init: InitMode::Given(vec![0.0, 30.0, 1.0, 0.0]),
            max_steps: 3,
            eta: 0.1,
            ..LearnerConfig::default()
        };
        let out = minimize_empirical_inconsistency(&set, &cfg).unwrap();
        assert!(!out.converged);
        assert_eq!(out.history.len(), 4);
        assert!(out.objective < 28.0);
    }
}
