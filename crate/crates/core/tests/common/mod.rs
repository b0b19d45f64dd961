#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use heurdim::distribution::{DistributionKind, WeightModel};
use heurdim::lab::{build_lower_bound_family, rho_for_subset};
use heurdim::optimal::{distances, Direction};
use heurdim::scalar::{rational, rational_from_int};
use heurdim::{sample_instance, Heuristic, HeuristicVector, Instance, InstanceDistributionSpec, Rational};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// `(instance index i, file stem)` for the n = 8, S = {2, 3} replay.
pub fn family_cases() -> Vec<(usize, heurdim::Algorithm, String)> {
    let mut out = Vec::new();
    for i in 1..=4 {
        for algo in [
            heurdim::Algorithm::Gbfs,
            heurdim::Algorithm::AstarNoreopen,
            heurdim::Algorithm::AstarReopen,
        ] {
            out.push((i, algo, format!("family_n8_s23_x{i}_{}", algo.tag())));
        }
    }
    out
}

pub fn family_n8() -> (Vec<Instance>, Heuristic) {
    let family = build_lower_bound_family::<Rational>(8).unwrap();
    let rho = rho_for_subset::<Rational>(8, &BTreeSet::from([2, 3])).unwrap();
    (family, rho)
}

pub fn er_instance(rng: &mut ChaCha8Rng, n: usize, weights: WeightModel, p: f64) -> Instance {
    let mut spec = InstanceDistributionSpec::new(DistributionKind::ErdosRenyi, n, weights, rng.gen());
    spec.edge_prob = p;
    sample_instance(&spec, rng.gen()).unwrap()
}

pub fn random_instance(rng: &mut ChaCha8Rng, max_n: usize) -> Instance {
    let n = rng.gen_range(2..=max_n);
    let weights = match rng.gen_range(0..3) {
        0 => WeightModel::Unit,
        1 => WeightModel::Integer { ell: rng.gen_range(1..=16) },
        _ => WeightModel::Rational { ell: rng.gen_range(1..=8), denominator: rng.gen_range(1..=6) },
    };
    let kind = match rng.gen_range(0..4) {
        0 | 1 => DistributionKind::ErdosRenyi,
        2 => DistributionKind::LayeredDag,
        _ => DistributionKind::Grid,
    };
    let mut spec = InstanceDistributionSpec::new(kind, n.max(3), weights, rng.gen());
    // Grids and layered DAGs need density above their percolation point.
    spec.edge_prob = match kind {
        DistributionKind::ErdosRenyi => rng.gen_range(0.2..0.8),
        _ => rng.gen_range(0.6..0.95),
    };
    sample_instance(&spec, rng.gen()).unwrap()
}

/// Exact distances to the goal; vertices that cannot reach it get `big`.
pub fn exact_distances(x: &Instance, big: &Rational) -> Vec<Rational> {
    distances(x, x.goal(), Direction::Backward, None)
        .into_iter()
        .map(|d| d.unwrap_or_else(|| big.clone()))
        .collect()
}

/// Heuristics of several shapes: uniform random integers, small integers
/// with many ties, random rationals, and exact distances with noise.
pub fn random_rho(rng: &mut ChaCha8Rng, x: &Instance, scale: i64) -> Heuristic {
    let n = x.num_vertices();
    let scale = scale.max(1);
    let values = match rng.gen_range(0..4) {
        0 => (0..n).map(|_| rational_from_int(rng.gen_range(0..=scale))).collect(),
        1 => (0..n).map(|_| rational_from_int(rng.gen_range(0..=3))).collect(),
        2 => (0..n)
            .map(|_| rational(rng.gen_range(-scale..=scale * 4), rng.gen_range(1..=5)))
            .collect(),
        _ => {
            let big = rational_from_int(scale * 2);
            exact_distances(x, &big)
                .into_iter()
                .map(|d| d + rational(rng.gen_range(-scale..=scale), rng.gen_range(1..=3)))
                .collect()
        }
    };
    HeuristicVector::new(values).unwrap()
}
