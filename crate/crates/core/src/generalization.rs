//! Train versus held-out gap experiments as the training-set size grows.

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distribution::{sample_instance, InstanceDistributionSpec, SampleError};
use crate::inconsistency::inconsistency_on_path;
use crate::instance::HeuristicVector;
use crate::learn::{minimize_empirical_inconsistency, LearnError, LearnerConfig, TrainingSet};
use crate::scalar::rational_from_f64;
use crate::search::{run_astar, SearchError};
use crate::utility::{MeasureKind, UtilityError, UtilityMeasure};
use crate::{Heuristic, Rational};

#[derive(Debug, Error)]
pub enum GapError {
    #[error("invalid gap config: {0}")]
    Config(String),
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Utility(#[from] UtilityError),
}

/// Where the evaluated heuristic vectors come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum CandidateSource {
    /// Fit `ρ̂` on each training set.
    Learner(LearnerConfig),
    /// A fixed set of `count` vectors with entries drawn from `values` and the
    /// goal entry pinned to 0 (shifts do not change behavior).
    Grid { values: Vec<i64>, count: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapExperimentConfig {
    /// Its `seed` is replaced by the experiment seed.
    pub distribution: InstanceDistributionSpec,
    pub sizes: Vec<usize>,
    pub trials: usize,
    #[serde(default = "default_heldout")]
    pub heldout: usize,
    pub source: CandidateSource,
    #[serde(default = "default_measure")]
    pub measure: MeasureKind,
    /// Utility cap; defaults to `ℓ(n − 1)` with `ℓ` the largest weight seen.
    #[serde(default)]
    pub cap: Option<f64>,
    #[serde(default)]
    pub reopening: bool,
    /// Confidence parameter, carried into the report only.
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_heldout() -> usize {
    2048
}

fn default_measure() -> MeasureKind {
    MeasureKind::Suboptimality
}

fn default_delta() -> f64 {
    0.05
}

impl GapExperimentConfig {
    pub fn validate(&self) -> Result<(), GapError> {
        let bad = |m: &str| Err(GapError::Config(m.to_string()));
        if self.sizes.is_empty() || self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return bad("sizes must be non-empty and strictly increasing");
        }
        if self.sizes[0] == 0 {
            return bad("sizes must be positive");
        }
        if self.trials < 1 {
            return bad("trials must be at least 1");
        }
        if self.heldout < 1 {
            return bad("held-out set must be non-empty");
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad("delta must lie in (0, 1)");
        }
        if let Some(cap) = self.cap {
            if !(cap > 0.0 && cap.is_finite()) {
                return bad("cap must be positive");
            }
        }
        match &self.source {
            CandidateSource::Learner(cfg) => cfg.validate()?,
            CandidateSource::Grid { values, count } => {
                if values.is_empty() || *count == 0 {
                    return bad("grid needs values and a positive count");
                }
            }
        }
        self.distribution.validate()?;
        Ok(())
    }
}

/// One `(N, trial)` measurement. Fields that do not apply to the mode are `None`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapRow {
    pub n_train: usize,
    pub trial: usize,
    pub train_inc: Option<f64>,
    pub heldout_inc: Option<f64>,
    pub heldout_subopt: Option<f64>,
    pub max_grid_gap: Option<f64>,
    pub learner_objective: Option<f64>,
    /// Mean of `Opt + Δ − Cost` over the held-out set.
    pub heldout_slack: Option<f64>,
    /// Held-out instances with suboptimality above `Δ`.
    pub domination_violations: usize,
    pub evaluated: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapPoint {
    pub n_train: usize,
    /// Mean over trials of `|train − held-out|` (inconsistency in learner
    /// mode, the max-over-grid utility gap in grid mode).
    pub mean_gap: f64,
    pub max_gap: f64,
    pub mean_train_inc: Option<f64>,
    pub mean_heldout_inc: Option<f64>,
    pub mean_heldout_subopt: Option<f64>,
    pub mean_learner_objective: Option<f64>,
    pub mean_heldout_slack: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapCurve {
    pub mode: &'static str,
    pub n: usize,
    pub delta: f64,
    pub heldout: usize,
    pub rows: Vec<GapRow>,
    pub points: Vec<GapPoint>,
    pub domination_violations: usize,
    pub evaluated: usize,
}

impl GapCurve {
    pub fn mean_gaps(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.mean_gap).collect()
    }

    /// Adjacent pairs along the size ladder where the mean gap grows.
    pub fn gap_inversions(&self) -> usize {
        self.mean_gaps().windows(2).filter(|w| w[1] > w[0]).count()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,trial,train_inc,heldout_inc,heldout_subopt,max_grid_gap\n");
        let f = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.n_train,
                r.trial,
                f(r.train_inc),
                f(r.heldout_inc),
                f(r.heldout_subopt),
                f(r.max_grid_gap)
            ));
        }
        out
    }
}

fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

fn mean(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, count) = xs.into_iter().fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

fn mean_opt(xs: impl IntoIterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = xs.into_iter().collect::<Option<_>>()?;
    Some(mean(v))
}

fn training_index(heldout: usize, slot: usize, j: usize) -> u64 {
    heldout as u64 + ((slot as u64 + 1) << 32) + j as u64
}

struct HeldOut {
    set: TrainingSet<Rational>,
}

/// Held-out evaluation of one exact `ρ`: mean inconsistency, mean
/// suboptimality, mean slack, and the count of instances where
/// suboptimality exceeds `Δ`.
fn evaluate_heldout(heldout: &HeldOut, rho: &Heuristic, reopening: bool) -> Result<(f64, f64, f64, usize), GapError> {
    let set = &heldout.set;
    let per: Vec<Result<(Rational, Rational), GapError>> = set
        .instances()
        .par_iter()
        .zip(set.optimal_paths())
        .map(|(x, opt)| {
            let trace = run_astar(x, rho, reopening)?;
            let subopt = trace.cost - opt.cost.clone();
            let delta = inconsistency_on_path(x, &opt.path, rho);
            Ok((subopt, delta))
        })
        .collect();
    let mut incs = Vec::with_capacity(per.len());
    let mut subs = Vec::with_capacity(per.len());
    let mut slacks = Vec::with_capacity(per.len());
    let mut violations = 0;
    for r in per {
        let (subopt, delta) = r?;
        if subopt > delta {
            violations += 1;
        }
        slacks.push(to_f64(&(delta.clone() - subopt.clone())));
        incs.push(to_f64(&delta));
        subs.push(to_f64(&subopt));
    }
    Ok((mean(incs), mean(subs), mean(slacks), violations))
}

fn grid_candidates(n: usize, goal: usize, values: &[i64], count: usize, seed: u64) -> Vec<Heuristic> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let v: Vec<i64> = (0..n)
                .map(|i| if i == goal { 0 } else { values[rng.gen_range(0..values.len())] })
                .collect();
            HeuristicVector::from_ints(&v)
        })
        .collect()
}

fn mean_utility(
    instances: &[crate::Instance],
    rho: &Heuristic,
    measure: &UtilityMeasure<Rational>,
    reopening: bool,
) -> Result<f64, GapError> {
    let values: Vec<f64> = instances
        .iter()
        .map(|x| {
            let trace = run_astar(x, rho, reopening)?;
            Ok(to_f64(&measure.evaluate(x, &trace)?.value))
        })
        .collect::<Result<_, GapError>>()?;
    Ok(mean(values))
}

/// Runs every `(N, trial)` cell. Held-out instances are drawn once and shared
/// by all cells; cells run in parallel and are merged in `(N, trial)` order.
pub fn run_gap_experiment(config: &GapExperimentConfig) -> Result<GapCurve, GapError> {
    config.validate()?;
    let mut dist = config.distribution.clone();
    dist.seed = config.seed;
    let heldout_instances = (0..config.heldout as u64)
        .into_par_iter()
        .map(|i| sample_instance(&dist, i))
        .collect::<Result<Vec<_>, _>>()?;
    let n = heldout_instances[0].num_vertices();
    let goal = heldout_instances[0].goal().0;
    let heldout = HeldOut {
        set: TrainingSet::new(heldout_instances)?,
    };

    let cells: Vec<(usize, usize, usize)> = config
        .sizes
        .iter()
        .enumerate()
        .flat_map(|(si, &size)| (0..config.trials).map(move |t| (si, size, t)))
        .collect();

    let rows: Vec<GapRow> = match &config.source {
        CandidateSource::Learner(learner) => cells
            .par_iter()
            .map(|&(si, size, trial)| {
                let slot = si * config.trials + trial;
                let train = (0..size)
                    .map(|j| sample_instance(&dist, training_index(config.heldout, slot, j)))
                    .collect::<Result<Vec<_>, _>>()?;
                let exact = TrainingSet::new(train)?;
                let float = exact.map_scalar(to_f64);
                let outcome = minimize_empirical_inconsistency(&float, learner)?;
                let rho = outcome
                    .rho
                    .map(|v| rational_from_f64(*v).expect("learner iterates are finite"));
                let train_inc = to_f64(&exact.empirical_inconsistency(&rho));
                let (h_inc, h_sub, h_slack, violations) = evaluate_heldout(&heldout, &rho, config.reopening)?;
                Ok(GapRow {
                    n_train: size,
                    trial,
                    train_inc: Some(train_inc),
                    heldout_inc: Some(h_inc),
                    heldout_subopt: Some(h_sub),
                    max_grid_gap: None,
                    learner_objective: Some(outcome.objective),
                    heldout_slack: Some(h_slack),
                    domination_violations: violations,
                    evaluated: heldout.set.len(),
                })
            })
            .collect::<Result<_, GapError>>()?,
        CandidateSource::Grid { values, count } => {
            let candidates = grid_candidates(n, goal, values, *count, config.seed);
            let cap = match config.cap {
                Some(c) => rational_from_f64(c).expect("finite cap"),
                None => {
                    let ell = heldout
                        .set
                        .instances()
                        .iter()
                        .flat_map(|x| x.edges().iter().map(|e| e.weight.clone()))
                        .max()
                        .unwrap_or_else(|| Rational::from_integer(1.into()));
                    let ell = if ell > Rational::from_integer(0.into()) {
                        ell
                    } else {
                        Rational::from_integer(1.into())
                    };
                    ell * Rational::from_integer(((n as i64) - 1).into())
                }
            };
            let measure = UtilityMeasure::new(config.measure, cap)?;
            let heldout_means: Vec<f64> = candidates
                .par_iter()
                .map(|rho| mean_utility(heldout.set.instances(), rho, &measure, config.reopening))
                .collect::<Result<_, _>>()?;
            cells
                .par_iter()
                .map(|&(si, size, trial)| {
                    let slot = si * config.trials + trial;
                    let train = (0..size)
                        .map(|j| sample_instance(&dist, training_index(config.heldout, slot, j)))
                        .collect::<Result<Vec<_>, _>>()?;
                    let mut max_gap = 0f64;
                    for (rho, h) in candidates.iter().zip(&heldout_means) {
                        let t = mean_utility(&train, rho, &measure, config.reopening)?;
                        max_gap = max_gap.max((t - h).abs());
                    }
                    Ok(GapRow {
                        n_train: size,
                        trial,
                        train_inc: None,
                        heldout_inc: None,
                        heldout_subopt: None,
                        max_grid_gap: Some(max_gap),
                        learner_objective: None,
                        heldout_slack: None,
                        domination_violations: 0,
                        evaluated: 0,
                    })
                })
                .collect::<Result<_, GapError>>()?
        }
    };

    let points = config
        .sizes
        .iter()
        .map(|&size| {
            let cell: Vec<&GapRow> = rows.iter().filter(|r| r.n_train == size).collect();
            let gaps: Vec<f64> = cell
                .iter()
                .map(|r| match (r.max_grid_gap, r.train_inc, r.heldout_inc) {
                    (Some(g), _, _) => g,
                    (None, Some(t), Some(h)) => (t - h).abs(),
                    _ => 0.0,
                })
                .collect();
            GapPoint {
                n_train: size,
                mean_gap: mean(gaps.iter().copied()),
                max_gap: gaps.iter().copied().fold(0.0, f64::max),
                mean_train_inc: mean_opt(cell.iter().map(|r| r.train_inc)),
                mean_heldout_inc: mean_opt(cell.iter().map(|r| r.heldout_inc)),
                mean_heldout_subopt: mean_opt(cell.iter().map(|r| r.heldout_subopt)),
                mean_learner_objective: mean_opt(cell.iter().map(|r| r.learner_objective)),
                mean_heldout_slack: mean_opt(cell.iter().map(|r| r.heldout_slack)),
            }
        })
        .collect();
    Ok(GapCurve {
        mode: match config.source {
            CandidateSource::Learner(_) => "learner",
            CandidateSource::Grid { .. } => "grid",
        },
        n,
        delta: config.delta,
        heldout: config.heldout,
        domination_violations: rows.iter().map(|r| r.domination_violations).sum(),
        evaluated: rows.iter().map(|r| r.evaluated).sum(),
        rows,
        points,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PdimHint {
    /// `n lg n`.
    NLogN,
    /// `n² lg n`.
    NSquaredLogN,
}

impl PdimHint {
    pub fn value(self, n: usize) -> f64 {
        let n = n as f64;
        let lg = n.log2();
        match self {
            PdimHint::NLogN => n * lg,
            PdimHint::NSquaredLogN => n * n * lg,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Overlay {
    pub hint: PdimHint,
    pub pdim: f64,
    /// Least-squares `C` for `gap ≈ C √(pdim / N)`.
    pub c: f64,
    pub reference: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundShapeReport {
    pub sizes: Vec<usize>,
    pub observed: Vec<f64>,
    pub overlays: Vec<Overlay>,
    pub delta: f64,
}

impl BoundShapeReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,observed");
        for o in &self.overlays {
            out.push_str(match o.hint {
                PdimHint::NLogN => ",ref_n_lg_n",
                PdimHint::NSquaredLogN => ",ref_n2_lg_n",
            });
        }
        out.push('\n');
        for (i, (n, y)) in self.sizes.iter().zip(&self.observed).enumerate() {
            out.push_str(&format!("{n},{y}"));
            for o in &self.overlays {
                out.push_str(&format!(",{}", o.reference[i]));
            }
            out.push('\n');
        }
        out
    }
}

pub fn fit_overlay(sizes: &[usize], observed: &[f64], n: usize, hint: PdimHint) -> Overlay {
    let pdim = hint.value(n);
    let xs: Vec<f64> = sizes.iter().map(|&m| (pdim / m as f64).sqrt()).collect();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(observed).map(|(x, y)| x * y).sum();
    let c = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    Overlay {
        hint,
        pdim,
        c,
        reference: xs.iter().map(|x| c * x).collect(),
    }
}

/// Observed mean gaps with both reference shapes fitted.
pub fn report_bound_shape(curve: &GapCurve) -> BoundShapeReport {
    let sizes: Vec<usize> = curve.points.iter().map(|p| p.n_train).collect();
    let observed = curve.mean_gaps();
    let overlays = [PdimHint::NLogN, PdimHint::NSquaredLogN]
        .into_iter()
        .map(|h| fit_overlay(&sizes, &observed, curve.n, h))
        .collect();
    BoundShapeReport {
        sizes,
        observed,
        overlays,
        delta: curve.delta,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::{DistributionKind, WeightModel};

    fn config(source: CandidateSource) -> GapExperimentConfig {
        let mut dist = InstanceDistributionSpec::new(DistributionKind::ErdosRenyi, 6, WeightModel::Integer { ell: 4 }, 0);
        dist.edge_prob = 0.5;
        GapExperimentConfig {
            distribution: dist,
            sizes: vec![2, 8],
            trials: 2,
            heldout: 32,
            source,
            measure: MeasureKind::Suboptimality,
            cap: None,
            reopening: false,
            delta: 0.05,
            seed: 11,
        }
    }

    #[test]
    fn degenerate_distribution_has_zero_gap() {
        let mut cfg = config(CandidateSource::Grid { values: vec![0, 2, 5], count: 8 });
        // Every draw is the same instance.
        cfg.distribution = InstanceDistributionSpec::new(DistributionKind::Complete, 5, WeightModel::PowersOfTwo, 0);
        let curve = run_gap_experiment(&cfg).unwrap();
        assert!(curve.mean_gaps().iter().all(|&g| g == 0.0));
        assert_eq!(report_bound_shape(&curve).overlays[0].c, 0.0);
    }

    #[test]
    fn learner_mode_is_reproducible_and_dominated() {
        let cfg = config(CandidateSource::Learner(LearnerConfig {
            init: crate::learn::InitMode::ExactDistances,
            max_steps: 50,
            ..LearnerConfig::default()
        }));
        let a = run_gap_experiment(&cfg).unwrap();
        let b = run_gap_experiment(&cfg).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.domination_violations, 0);
        assert_eq!(a.evaluated, 4 * 32);
    }

    #[test]
    fn reference_curves_decrease() {
        let o = fit_overlay(&[8, 16, 32], &[1.0, 0.7, 0.5], 10, PdimHint::NLogN);
        assert!(o.c > 0.0);
        assert!(o.reference.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn bad_configs_rejected() {
        let mut cfg = config(CandidateSource::Grid { values: vec![0], count: 1 });
        cfg.sizes = vec![8, 8];
        assert!(run_gap_experiment(&cfg).is_err());
        cfg.sizes = vec![8];
        cfg.delta = 1.0;
        assert!(run_gap_experiment(&cfg).is_err());
    }
}
