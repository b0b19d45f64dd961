//! Bounded utility measures `u_ρ(x) ∈ [0, H]` computed from a search trace.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::PathInstance;
use crate::optimal::{dijkstra_opt, Unreachable};
use crate::scalar::Scalar;
use crate::search::SearchTrace;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasureKind {
    /// Total weight of the returned path.
    PathCost,
    /// `Cost_ρ(x) − Opt(x)`.
    #[serde(alias = "subopt")]
    Suboptimality,
    /// Number of selection iterations.
    Expansions,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum UtilityError {
    #[error("cap must be positive")]
    NonPositiveCap,
    #[error("trace does not belong to this instance: {0}")]
    TraceMismatch(&'static str),
    #[error(transparent)]
    Unreachable(#[from] Unreachable),
}

#[derive(Clone, Debug, PartialEq)]
pub struct UtilityMeasure<T> {
    pub kind: MeasureKind,
    cap: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct UtilityValue<T> {
    pub value: T,
    /// Raw value before clipping.
    pub raw: T,
    pub clipped: bool,
}

impl<T: Scalar> UtilityMeasure<T> {
    pub fn new(kind: MeasureKind, cap: T) -> Result<Self, UtilityError> {
        if cap <= T::zero() {
            return Err(UtilityError::NonPositiveCap);
        }
        Ok(UtilityMeasure { kind, cap })
    }

    /// Suboptimality with cap `ℓ(n − 1)`, for weights bounded by `ℓ`.
    pub fn default_suboptimality(max_weight: T, n: usize) -> Result<Self, UtilityError> {
        let cap = max_weight * T::from_int(n as i64 - 1);
        Self::new(MeasureKind::Suboptimality, cap)
    }

    pub fn cap(&self) -> &T {
        &self.cap
    }

    pub fn evaluate(
        &self,
        instance: &PathInstance<T>,
        trace: &SearchTrace<T>,
    ) -> Result<UtilityValue<T>, UtilityError> {
        check_trace(instance, trace)?;
        let raw = match self.kind {
            MeasureKind::PathCost => trace.cost.clone(),
            MeasureKind::Suboptimality => trace.cost.clone() - dijkstra_opt(instance)?.cost,
            MeasureKind::Expansions => T::from_int(trace.iterations() as i64),
        };
        Ok(self.clip(raw))
    }

    pub fn clip(&self, raw: T) -> UtilityValue<T> {
        let (value, clipped) = if raw > self.cap {
            (self.cap.clone(), true)
        } else if raw < T::zero() {
            (T::zero(), true)
        } else {
            (raw.clone(), false)
        };
        UtilityValue { value, raw, clipped }
    }
}

fn check_trace<T: Scalar>(
    instance: &PathInstance<T>,
    trace: &SearchTrace<T>,
) -> Result<(), UtilityError> {
    if trace.num_vertices != instance.num_vertices() {
        return Err(UtilityError::TraceMismatch("vertex count differs"));
    }
    if trace.start != instance.start() || trace.goal != instance.goal() {
        return Err(UtilityError::TraceMismatch("start or goal differs"));
    }
    if trace.path.first() != Some(&instance.start()) || trace.path.last() != Some(&instance.goal()) {
        return Err(UtilityError::TraceMismatch("path endpoints differ"));
    }
    match instance.path_cost(&trace.path) {
        Some(c) if c == trace.cost => Ok(()),
        Some(_) => Err(UtilityError::TraceMismatch("path cost differs")),
        None => Err(UtilityError::TraceMismatch("path uses a missing edge")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{HeuristicVector, InstanceDraft};
    use crate::search::{run_astar, run_gbfs};

    fn inst(n: usize, edges: &[(usize, usize, i64)]) -> PathInstance<i64> {
        let mut d = InstanceDraft::with_default_labels(n);
        d.edges = edges.to_vec();
        PathInstance::new(d).unwrap()
    }

    #[test]
    fn expansions_on_two_vertices() {
        let x = inst(2, &[(0, 1, 1)]);
        let tr = run_gbfs(&x, &HeuristicVector::zeros(2)).unwrap();
        let m = UtilityMeasure::new(MeasureKind::Expansions, 10).unwrap();
        assert_eq!(m.evaluate(&x, &tr).unwrap().value, 1);
    }

    #[test]
    fn clipping_is_flagged() {
        let x = inst(3, &[(0, 1, 5), (1, 2, 5)]);
        let tr = run_gbfs(&x, &HeuristicVector::zeros(3)).unwrap();
        let m = UtilityMeasure::new(MeasureKind::PathCost, 4).unwrap();
        let u = m.evaluate(&x, &tr).unwrap();
        assert_eq!((u.value, u.raw, u.clipped), (4, 10, true));
    }

    #[test]
    fn mismatched_trace_rejected() {
        let x = inst(3, &[(0, 1, 5), (1, 2, 5)]);
        let y = inst(3, &[(0, 2, 1)]);
        let tr = run_astar(&x, &HeuristicVector::zeros(3), false).unwrap();
        let m = UtilityMeasure::new(MeasureKind::PathCost, 100).unwrap();
        assert!(matches!(m.evaluate(&y, &tr), Err(UtilityError::TraceMismatch(_))));
        assert_eq!(UtilityMeasure::new(MeasureKind::PathCost, 0i64).unwrap_err(), UtilityError::NonPositiveCap);
    }

    #[test]
    fn default_cap() {
        let m = UtilityMeasure::default_suboptimality(16i64, 8).unwrap();
        assert_eq!(*m.cap(), 112);
    }
}
