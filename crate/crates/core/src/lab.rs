//! Executable experiments on how many distinct behaviors the heuristic
//! vector can induce: the shatterable lower-bound family, GBFS and A*
//! behavior censuses, and simple-path g-cost catalogs.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::instance::{HeuristicVector, InstanceDraft, PathInstance, VertexId};
use crate::optimal::dijkstra_opt;
use crate::scalar::{Ordered, Scalar};
use crate::search::{run, Algorithm, SearchError, TraceDigest};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LabError {
    #[error("lower-bound family needs n >= 6, got {0}")]
    FamilyTooSmall(usize),
    #[error("subset element {0} outside 1..={1}")]
    SubsetOutOfRange(usize, usize),
    #[error("{what} is too large for exhaustive enumeration (n = {n})")]
    TooLarge { what: &'static str, n: usize },
    #[error("instances in a census must share one vertex count")]
    VertexCountMismatch,
    #[error("construction violated: {0}")]
    ConstructionViolation(String),
    #[error("census violated: {0}")]
    CensusViolation(String),
    #[error("catalog bound violated: {0}")]
    BoundViolation(String),
    #[error("simple-path enumeration exceeded {cap} paths (partial: {partial_paths} paths enumerated)")]
    PathExplosion { cap: u64, partial_paths: u64 },
    #[error(transparent)]
    Search(#[from] SearchError),
}

/// Vertex order of the family: `s < r < t < 1 < 2 < … < n−3`.
pub fn family_labels(n: usize) -> Vec<String> {
    let mut labels = vec!["s".to_string(), "r".to_string(), "t".to_string()];
    labels.extend((1..=n - 3).map(|i| i.to_string()));
    labels
}

const S: usize = 0;
const R: usize = 1;
const T_GOAL: usize = 2;

fn labeled(i: usize) -> usize {
    2 + i
}

/// The `n − 4` unit-weight instances `x_1, …, x_{n−4}`.
///
/// `x_i` has edges `(s, v)` for every labeled `v`, `(v, t)` for labeled
/// `v > i`, plus `(i, r)` and `(r, t)`.
pub fn build_lower_bound_family<T: Scalar>(n: usize) -> Result<Vec<PathInstance<T>>, LabError> {
    if n < 6 {
        return Err(LabError::FamilyTooSmall(n));
    }
    let m = n - 3;
    (1..=n - 4)
        .map(|i| {
            let mut edges = Vec::new();
            for v in 1..=m {
                edges.push((S, labeled(v), T::one()));
            }
            for v in i + 1..=m {
                edges.push((labeled(v), T_GOAL, T::one()));
            }
            edges.push((labeled(i), R, T::one()));
            edges.push((R, T_GOAL, T::one()));
            PathInstance::new(InstanceDraft {
                labels: family_labels(n),
                edges,
                start: S,
                goal: T_GOAL,
            })
            .map_err(|e| LabError::ConstructionViolation(e.to_string()))
        })
        .collect()
}

/// `ρ` steering the family: `ρ_s = n`, `ρ_r = ρ_t = 0`, `ρ_i = i + 2` for
/// `i ∈ S ∪ {n − 3}` and `ρ_i = n` otherwise.
pub fn rho_for_subset<T: Scalar>(n: usize, subset: &BTreeSet<usize>) -> Result<HeuristicVector<T>, LabError> {
    if n < 6 {
        return Err(LabError::FamilyTooSmall(n));
    }
    if let Some(&bad) = subset.iter().find(|&&i| i == 0 || i > n - 4) {
        return Err(LabError::SubsetOutOfRange(bad, n - 4));
    }
    let big = n as i64;
    let mut values = vec![0i64; n];
    values[S] = big;
    values[R] = 0;
    values[T_GOAL] = 0;
    for i in 1..=n - 3 {
        values[labeled(i)] = if i == n - 3 || subset.contains(&i) {
            i as i64 + 2
        } else {
            big
        };
    }
    Ok(HeuristicVector::from_ints(&values))
}

fn subset_from_mask(mask: u64, size: usize) -> BTreeSet<usize> {
    (0..size).filter(|b| mask >> b & 1 == 1).map(|b| b + 1).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShatterMode {
    Exhaustive,
    Sampled { count: usize, seed: u64 },
}

pub const MISSING_LISTED: usize = 1024;

#[derive(Clone, Debug, Serialize)]
pub struct ShatterResult {
    pub n: usize,
    pub algorithm: Algorithm,
    pub instance_count: usize,
    /// Threshold `z_i` per instance, as text (all `5/2`).
    pub thresholds: Vec<String>,
    pub subsets_checked: usize,
    /// Achieved sign pattern (bit `i−1` ↔ instance `x_i`) → witness subset mask.
    pub achieved: BTreeMap<u64, u64>,
    /// Patterns never produced, `None` when `2^N` is too large to list.
    pub missing_count: Option<u64>,
    /// The first [`MISSING_LISTED`] missing patterns.
    pub missing: Vec<u64>,
    pub shattered: bool,
}

impl ShatterResult {
    pub fn achieved_count(&self) -> usize {
        self.achieved.len()
    }

    pub fn witness_rho(&self, pattern: u64) -> Option<HeuristicVector<i64>> {
        let mask = *self.achieved.get(&pattern)?;
        rho_for_subset(self.n, &subset_from_mask(mask, self.instance_count)).ok()
    }
}

/// Runs the algorithm on every family instance for every subset `S` and
/// records the threshold pattern `(1[cost(x_i) ≥ 5/2])_i`, which must equal
/// the indicator of `S`.
pub fn verify_shattering(n: usize, algorithm: Algorithm, mode: ShatterMode) -> Result<ShatterResult, LabError> {
    let family = build_lower_bound_family::<i64>(n)?;
    let size = n - 4;
    let masks: Vec<u64> = match mode {
        ShatterMode::Exhaustive => {
            if size > 24 {
                return Err(LabError::TooLarge { what: "exhaustive shattering", n });
            }
            (0..1u64 << size).collect()
        }
        ShatterMode::Sampled { count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let limit = if size >= 64 { u64::MAX } else { (1u64 << size) - 1 };
            (0..count).map(|_| rng.gen_range(0..=limit)).collect()
        }
    };
    let outcomes: Vec<Result<(u64, u64), LabError>> = masks
        .par_iter()
        .map(|&mask| {
            let rho = rho_for_subset::<i64>(n, &subset_from_mask(mask, size))?;
            let mut pattern = 0u64;
            for (i, x) in family.iter().enumerate() {
                let trace = run(algorithm, x, &rho)?;
                // cost ≥ 5/2  ⇔  2·cost ≥ 5
                if 2 * trace.cost >= 5 {
                    pattern |= 1 << i;
                }
            }
            Ok((mask, pattern))
        })
        .collect();
    let mut achieved = BTreeMap::new();
    for outcome in outcomes {
        let (mask, pattern) = outcome?;
        if pattern != mask {
            return Err(LabError::ConstructionViolation(format!(
                "subset {:?} produced pattern {:0width$b}",
                subset_from_mask(mask, size),
                pattern,
                width = size
            )));
        }
        achieved.entry(pattern).or_insert(mask);
    }
    let missing_count = (size <= 24).then(|| (1u64 << size) - achieved.len() as u64);
    let missing: Vec<u64> = if size <= 24 {
        (0..1u64 << size)
            .filter(|p| !achieved.contains_key(p))
            .take(MISSING_LISTED)
            .collect()
    } else {
        Vec::new()
    };
    let shattered = missing_count == Some(0);
    Ok(ShatterResult {
        n,
        algorithm,
        instance_count: size,
        thresholds: vec!["5/2".to_string(); size],
        subsets_checked: masks.len(),
        achieved,
        missing_count,
        missing,
        shattered,
    })
}

fn common_vertex_count<T: Scalar>(instances: &[PathInstance<T>]) -> Result<usize, LabError> {
    let n = instances.first().map(PathInstance::num_vertices).unwrap_or(0);
    if instances.iter().any(|x| x.num_vertices() != n) {
        return Err(LabError::VertexCountMismatch);
    }
    Ok(n)
}

fn behavior_tuple<T: Scalar>(
    algorithm: Algorithm,
    instances: &[PathInstance<T>],
    rho: &HeuristicVector<T>,
) -> Result<Vec<TraceDigest>, SearchError> {
    instances
        .iter()
        .map(|x| run(algorithm, x, rho).map(|t| t.fingerprint()))
        .collect()
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

#[derive(Clone, Debug, Serialize)]
pub struct GbfsCensus {
    pub n: usize,
    pub instances: usize,
    pub orders: u64,
    pub distinct_tuples: usize,
    pub bound: u64,
    /// Order-equal `(ρ, m(ρ))` pairs compared.
    pub order_pairs_checked: usize,
}

/// Runs GBFS under every one of the `n!` strict vertex orders and counts
/// distinct tuples of trace fingerprints. Each order is also realized by a
/// second, strictly increasing remap of the rank vector, which must produce
/// the identical tuple.
pub fn gbfs_behavior_census<T: Scalar>(instances: &[PathInstance<T>], seed: u64) -> Result<GbfsCensus, LabError> {
    let n = common_vertex_count(instances)?;
    if n > 7 {
        return Err(LabError::TooLarge { what: "GBFS census", n });
    }
    // Strictly increasing map on ranks: cumulative positive increments.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut remap = Vec::with_capacity(n);
    let mut acc = rng.gen_range(-50i64..50);
    for _ in 0..n {
        acc += rng.gen_range(1i64..20);
        remap.push(acc);
    }
    let perms: Vec<Vec<usize>> = (0..n).permutations(n).collect();
    let results: Vec<Result<Vec<TraceDigest>, LabError>> = perms
        .par_iter()
        .map(|perm| {
            let ranks: Vec<i64> = perm.iter().map(|&r| r as i64).collect();
            let mapped: Vec<i64> = perm.iter().map(|&r| remap[r]).collect();
            let a = behavior_tuple(Algorithm::Gbfs, instances, &HeuristicVector::from_ints(&ranks))?;
            let b = behavior_tuple(Algorithm::Gbfs, instances, &HeuristicVector::from_ints(&mapped))?;
            if a != b {
                return Err(LabError::CensusViolation(format!(
                    "order-equal vectors {ranks:?} and {mapped:?} behave differently"
                )));
            }
            Ok(a)
        })
        .collect();
    let mut distinct = HashSet::new();
    for r in results {
        distinct.insert(r?);
    }
    let bound = factorial(n) as u64;
    if distinct.len() as u64 > bound {
        return Err(LabError::CensusViolation(format!(
            "{} distinct tuples exceed {bound}",
            distinct.len()
        )));
    }
    Ok(GbfsCensus {
        n,
        instances: instances.len(),
        orders: bound,
        distinct_tuples: distinct.len(),
        bound,
        order_pairs_checked: perms.len(),
    })
}

/// How `ρ` is sampled for the A* census.
#[derive(Clone, Debug, PartialEq)]
pub struct RhoSampling {
    /// Values per coordinate; the full Cartesian product is used when its
    /// size is at most `grid_limit`.
    pub grid: Vec<i64>,
    pub grid_limit: usize,
    /// Additional uniform samples `k / denominator` with `k ∈ [low·den, high·den]`.
    pub random: usize,
    pub low: i64,
    pub high: i64,
    pub denominator: i64,
    pub seed: u64,
}

impl Default for RhoSampling {
    fn default() -> Self {
        RhoSampling {
            grid: (0..10).collect(),
            grid_limit: 10_000,
            random: 1000,
            low: 0,
            high: 10,
            denominator: 4,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AstarCensus {
    pub n: usize,
    pub instances: usize,
    pub algorithm: Algorithm,
    pub samples: usize,
    pub distinct_tuples: usize,
    /// `M = Σ_k C(|G_V(x_k)|, 2)`.
    pub hyperplanes: f64,
    /// `2 (e M)^n`.
    pub region_bound: f64,
    pub shift_pairs_checked: usize,
    /// Samples consistent on every instance.
    pub consistent_samples: usize,
}

fn sample_rhos<T: Scalar>(n: usize, spec: &RhoSampling) -> Vec<HeuristicVector<T>> {
    let mut out = Vec::new();
    let grid_size = spec.grid.len().checked_pow(n as u32);
    if !spec.grid.is_empty() && grid_size.is_some_and(|g| g <= spec.grid_limit) {
        for point in (0..n).map(|_| spec.grid.iter().copied()).multi_cartesian_product() {
            out.push(HeuristicVector::from_ints(&point));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let den = spec.denominator.max(1);
    let den_t = T::from_int(den);
    for _ in 0..spec.random {
        let values = (0..n)
            .map(|_| T::from_int(rng.gen_range(spec.low * den..=spec.high * den)) / den_t.clone())
            .collect();
        out.push(HeuristicVector::new(values).expect("finite"));
    }
    out
}

/// Samples `ρ`, counts distinct A* behavior tuples, and checks the count
/// against the hyperplane-arrangement region bound. Also checks that every
/// sample and its constant shift behave identically, and that consistent
/// samples return optimal paths.
pub fn astar_behavior_census<T: Scalar>(
    instances: &[PathInstance<T>],
    reopening: bool,
    sampling: &RhoSampling,
    catalog_cap: u64,
) -> Result<AstarCensus, LabError> {
    let n = common_vertex_count(instances)?;
    let algorithm = Algorithm::astar(reopening);
    let mut hyperplanes = 0f64;
    for x in instances {
        let size = gcost_catalog(x, catalog_cap)?.total_size as f64;
        hyperplanes += size * (size - 1.0) / 2.0;
    }
    let region_bound = 2.0 * (std::f64::consts::E * hyperplanes).powi(n as i32);
    let opts: Vec<T> = instances
        .iter()
        .map(|x| dijkstra_opt(x).map(|p| p.cost))
        .collect::<Result<_, _>>()
        .map_err(|e| LabError::CensusViolation(e.to_string()))?;
    let rhos = sample_rhos::<T>(n, sampling);
    let shift = T::from_int(7) / T::from_int(3);
    let results: Vec<Result<(Vec<TraceDigest>, bool), LabError>> = rhos
        .par_iter()
        .map(|rho| {
            let mut digests = Vec::with_capacity(instances.len());
            let consistent = instances.iter().all(|x| rho.is_consistent_on(x));
            for (x, opt) in instances.iter().zip(&opts) {
                let a = run(algorithm, x, rho)?;
                let b = run(algorithm, x, &rho.shifted(&shift))?;
                if a.fingerprint() != b.fingerprint() {
                    return Err(LabError::CensusViolation(format!(
                        "shifted heuristic changed behavior for {:?}",
                        rho.values()
                    )));
                }
                if consistent && a.cost != *opt {
                    return Err(LabError::CensusViolation(format!(
                        "consistent heuristic {:?} returned cost {} > {}",
                        rho.values(),
                        a.cost,
                        opt
                    )));
                }
                digests.push(a.fingerprint());
            }
            Ok((digests, consistent))
        })
        .collect();
    let mut distinct = HashSet::new();
    let mut consistent_samples = 0;
    for r in results {
        let (tuple, consistent) = r?;
        consistent_samples += usize::from(consistent);
        distinct.insert(tuple);
    }
    if distinct.len() as f64 > region_bound {
        return Err(LabError::CensusViolation(format!(
            "{} distinct tuples exceed region bound {region_bound}",
            distinct.len()
        )));
    }
    Ok(AstarCensus {
        n,
        instances: instances.len(),
        algorithm,
        samples: rhos.len(),
        distinct_tuples: distinct.len(),
        hyperplanes,
        region_bound,
        shift_pairs_checked: rhos.len() * instances.len(),
        consistent_samples,
    })
}

/// Complete digraph whose `i`-th edge (in `(from, to)` order) weighs `2^{i−1}`.
pub fn power_of_two_gadget<T: Scalar>(n: usize) -> PathInstance<T> {
    let mut draft = InstanceDraft::with_default_labels(n);
    let two = T::from_int(2);
    let mut w = T::one();
    for u in 0..n {
        for v in 0..n {
            if u != v {
                draft.edges.push((u, v, w.clone()));
                w = w * two.clone();
            }
        }
    }
    PathInstance::new(draft).expect("complete digraph is feasible")
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundCheck {
    pub name: &'static str,
    pub holds: bool,
    pub detail: String,
}

/// Distinct simple-path costs `G_v` from the start to every vertex.
#[derive(Clone, Debug, Serialize)]
pub struct GCostCatalog {
    pub n: usize,
    /// Sorted distinct costs per vertex, as text.
    pub costs: Vec<Vec<String>>,
    pub distinct_counts: Vec<usize>,
    pub path_counts: Vec<u64>,
    /// `|G_V| = Σ_v |G_v|`.
    pub total_size: usize,
    pub max_out_degree: usize,
    /// Largest weight when every weight is an integer.
    pub integer_weight_bound: Option<i64>,
    pub checks: Vec<BoundCheck>,
    /// `Σ_{k=0}^{n−2} k!`.
    pub factorial_sum_estimate: u128,
    /// Simple `s–v` paths in the complete digraph: `Σ_k (n−2)!/(n−2−k)!`.
    pub complete_digraph_paths: u128,
    /// `true` when the two counts above differ.
    pub path_count_formula_differs: bool,
}

type CostSets<T> = Vec<BTreeSet<Ordered<T>>>;

/// Distinct simple-path costs and simple-path counts per vertex, by DFS.
fn enumerate_simple_paths<T: Scalar>(instance: &PathInstance<T>, path_cap: u64) -> Result<(CostSets<T>, Vec<u64>), LabError> {
    let n = instance.num_vertices();
    let mut sets: Vec<BTreeSet<Ordered<T>>> = vec![BTreeSet::new(); n];
    let mut counts = vec![0u64; n];
    let mut on_path = vec![false; n];
    let mut enumerated = 0u64;

    struct Frame<T> {
        v: VertexId,
        cost: T,
        next_edge: usize,
    }
    let s = instance.start();
    let mut stack = vec![Frame { v: s, cost: T::zero(), next_edge: 0 }];
    on_path[s.0] = true;
    sets[s.0].insert(Ordered(T::zero()));
    counts[s.0] += 1;
    enumerated += 1;
    while let Some(top) = stack.last_mut() {
        let out = instance.out_edges(top.v);
        if top.next_edge >= out.len() {
            on_path[top.v.0] = false;
            stack.pop();
            continue;
        }
        let e = &out[top.next_edge];
        top.next_edge += 1;
        if on_path[e.to.0] {
            continue;
        }
        let cost = top.cost.clone() + e.weight.clone();
        enumerated += 1;
        if enumerated > path_cap {
            return Err(LabError::PathExplosion { cap: path_cap, partial_paths: enumerated - 1 });
        }
        counts[e.to.0] += 1;
        sets[e.to.0].insert(Ordered(cost.clone()));
        on_path[e.to.0] = true;
        stack.push(Frame { v: e.to, cost, next_edge: 0 });
    }
    Ok((sets, counts))
}

fn gcost_catalog_values<T: Scalar>(instance: &PathInstance<T>, path_cap: u64) -> Result<CostSets<T>, LabError> {
    Ok(enumerate_simple_paths(instance, path_cap)?.0)
}

pub const DEFAULT_CATALOG_CAP: u64 = 5_000_000;

/// Enumerates every simple path from the start by DFS and collects the
/// distinct cost set of each vertex, then checks the size bounds.
pub fn gcost_catalog<T: Scalar>(instance: &PathInstance<T>, path_cap: u64) -> Result<GCostCatalog, LabError> {
    let n = instance.num_vertices();
    let (sets, counts) = enumerate_simple_paths(instance, path_cap)?;
    let distinct_counts: Vec<usize> = sets.iter().map(BTreeSet::len).collect();
    let total_size: usize = distinct_counts.iter().sum();
    let d = instance.max_out_degree();
    let integer_weight_bound = instance
        .edges()
        .iter()
        .map(|e| e.weight.to_i64().filter(|&w| T::from_int(w) == e.weight))
        .collect::<Option<Vec<i64>>>()
        .map(|ws| ws.into_iter().max().unwrap_or(0));

    let mut checks = Vec::new();
    checks.push(BoundCheck {
        name: "distinct costs <= simple paths",
        holds: distinct_counts.iter().zip(&counts).all(|(&g, &p)| g as u64 <= p),
        detail: String::new(),
    });
    let total_bound = (n as u128).saturating_mul(factorial(n - 1));
    checks.push(BoundCheck {
        name: "|G_V| <= n (n-1)!",
        holds: (total_size as u128) <= total_bound,
        detail: format!("{total_size} <= {total_bound}"),
    });
    if let Some(ell) = integer_weight_bound.filter(|&l| l >= 1) {
        let cap = n as u64 * ell as u64;
        checks.push(BoundCheck {
            name: "|G_v| <= n l (integer weights)",
            holds: distinct_counts.iter().all(|&g| g as u64 <= cap),
            detail: format!("max {} <= {cap}", distinct_counts.iter().max().unwrap_or(&0)),
        });
    }
    if d >= 1 && n >= 2 {
        let cap = (n as u128 - 1).saturating_mul((d as u128).saturating_pow(n as u32 - 2));
        checks.push(BoundCheck {
            name: "paths(v) <= (n-1) d^(n-2)",
            holds: counts.iter().all(|&c| c as u128 <= cap),
            detail: format!("max {} <= {cap}", counts.iter().max().unwrap_or(&0)),
        });
    }
    if let Some(bad) = checks.iter().find(|c| !c.holds) {
        return Err(LabError::BoundViolation(format!("{} ({})", bad.name, bad.detail)));
    }

    let m = n.saturating_sub(2);
    let factorial_sum_estimate: u128 = (0..=m).map(factorial).sum();
    let complete_digraph_paths: u128 = (0..=m).map(|k| factorial(m) / factorial(m - k)).sum();
    Ok(GCostCatalog {
        n,
        costs: sets
            .iter()
            .map(|s| s.iter().map(|c| c.0.to_string()).collect())
            .collect(),
        distinct_counts,
        path_counts: counts,
        total_size,
        max_out_degree: d,
        integer_weight_bound,
        checks,
        factorial_sum_estimate,
        complete_digraph_paths,
        path_count_formula_differs: factorial_sum_estimate != complete_digraph_paths,
    })
}

/// Realized A* scores `g + ρ_v` over every catalog cost `g ∈ G_v`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreStructure<T> {
    /// Smallest positive difference between two scores, if any two differ.
    pub gamma: Option<T>,
    /// Vertices joined by an exact score tie share a class id.
    pub tie_class: Vec<usize>,
}

/// Score gaps and tie classes of `ρ` on an instance. Perturbing each class by
/// a common offset of magnitude below `γ / 2` keeps every score comparison.
pub fn score_structure<T: Scalar>(
    instance: &PathInstance<T>,
    rho: &HeuristicVector<T>,
    path_cap: u64,
) -> Result<ScoreStructure<T>, LabError> {
    let catalog = gcost_catalog_values(instance, path_cap)?;
    let mut scores: Vec<(Ordered<T>, usize)> = Vec::new();
    for (v, costs) in catalog.iter().enumerate() {
        for g in costs {
            scores.push((Ordered(g.0.clone() + rho.get(VertexId(v)).clone()), v));
        }
    }
    scores.sort();
    let n = instance.num_vertices();
    let mut class: Vec<usize> = (0..n).collect();
    fn find(c: &mut [usize], v: usize) -> usize {
        let mut r = v;
        while c[r] != r {
            r = c[r];
        }
        c[v] = r;
        r
    }
    let mut gamma: Option<T> = None;
    for w in scores.windows(2) {
        if w[0].0 == w[1].0 {
            let (a, b) = (find(&mut class, w[0].1), find(&mut class, w[1].1));
            class[a.max(b)] = a.min(b);
        } else {
            let d = w[1].0 .0.clone() - w[0].0 .0.clone();
            if gamma.as_ref().is_none_or(|g| d < *g) {
                gamma = Some(d);
            }
        }
    }
    let tie_class = (0..n).map(|v| find(&mut class, v)).collect();
    Ok(ScoreStructure { gamma, tie_class })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::{run_astar, run_gbfs};

    #[test]
    fn family_rejects_small_n() {
        assert_eq!(build_lower_bound_family::<i64>(5).unwrap_err(), LabError::FamilyTooSmall(5));
        assert!(rho_for_subset::<i64>(8, &BTreeSet::from([5])).is_err());
    }

    #[test]
    fn x4_has_single_goal_edge_from_5() {
        let fam = build_lower_bound_family::<i64>(8).unwrap();
        let x4 = &fam[3];
        let into_goal: Vec<&str> = x4
            .edges()
            .iter()
            .filter(|e| e.to == x4.goal())
            .map(|e| x4.label(e.from))
            .collect();
        assert_eq!(into_goal, vec!["r", "5"]);
    }

    #[test]
    fn rho_examples() {
        let r = rho_for_subset::<i64>(8, &BTreeSet::new()).unwrap();
        assert_eq!(r.values(), &[8, 0, 0, 8, 8, 8, 8, 7]);
        let r = rho_for_subset::<i64>(8, &BTreeSet::from([1, 2, 3, 4])).unwrap();
        assert_eq!(r.values(), &[8, 0, 0, 3, 4, 5, 6, 7]);
    }

    #[test]
    fn shatter_smallest_family() {
        let res = verify_shattering(6, Algorithm::Gbfs, ShatterMode::Exhaustive).unwrap();
        assert_eq!(res.achieved_count(), 4);
        assert!(res.shattered);
        assert!(res.witness_rho(0b10).is_some());
    }

    #[test]
    fn gadget_catalog_counts() {
        let x = power_of_two_gadget::<i64>(4);
        let cat = gcost_catalog(&x, DEFAULT_CATALOG_CAP).unwrap();
        assert_eq!(cat.distinct_counts, vec![1, 5, 5, 5]);
        assert_eq!(cat.path_counts, vec![1, 5, 5, 5]);
        assert_eq!(cat.complete_digraph_paths, 5);
        assert_eq!(cat.factorial_sum_estimate, 4);
        assert!(cat.path_count_formula_differs);
    }

    #[test]
    fn catalog_cap_refuses() {
        let x = power_of_two_gadget::<i64>(6);
        assert!(matches!(gcost_catalog(&x, 10), Err(LabError::PathExplosion { cap: 10, .. })));
    }

    #[test]
    fn gbfs_and_astar_agree_on_family() {
        let fam = build_lower_bound_family::<i64>(7).unwrap();
        for mask in 0..8u64 {
            let rho = rho_for_subset::<i64>(7, &subset_from_mask(mask, 3)).unwrap();
            for x in &fam {
                let g = run_gbfs(x, &rho).unwrap();
                let a = run_astar(x, &rho, true).unwrap();
                assert_eq!(g.path, a.path);
            }
        }
    }
}
