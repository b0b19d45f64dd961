//! Path-finding instances on a fixed, totally ordered vertex set.
//!
//! A vertex is identified by its [`VertexId`], the position of its label in
//! the instance's vertex list. That position is also its rank in the
//! tie-breaking order: smaller ids win ties.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub usize);

impl VertexId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge<T> {
    pub from: VertexId,
    pub to: VertexId,
    pub weight: T,
}

/// One violated instance invariant.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("instance needs at least 2 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("duplicate vertex label `{0}`")]
    DuplicateLabel(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("self-loop on `{0}`")]
    SelfLoop(String),
    #[error("duplicate edge `{0}` -> `{1}`")]
    DuplicateEdge(String, String),
    #[error("negative weight on edge `{0}` -> `{1}`")]
    NegativeWeight(String, String),
    #[error("non-finite weight on edge `{0}` -> `{1}`")]
    NonFiniteWeight(String, String),
    #[error("start and goal are the same vertex `{0}`")]
    StartIsGoal(String),
    #[error("goal `{goal}` is unreachable from start `{start}`")]
    GoalUnreachable { start: String, goal: String },
}

/// Outcome of [`validate`]: empty means the instance is feasible.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
#[error("invalid instance: {0}")]
pub struct InvalidInstance(pub ValidationReport);

/// Unchecked instance data, addressed by vertex index.
#[derive(Clone, Debug, PartialEq)]
pub struct InstanceDraft<T> {
    pub labels: Vec<String>,
    pub edges: Vec<(usize, usize, T)>,
    pub start: usize,
    pub goal: usize,
}

impl<T: Scalar> InstanceDraft<T> {
    /// Draft with labels `s, v1, …, v{n-2}, t`, start 0 and goal `n - 1`.
    pub fn with_default_labels(n: usize) -> Self {
        let labels = (0..n)
            .map(|i| match i {
                0 => "s".to_string(),
                i if i + 1 == n => "t".to_string(),
                i => format!("v{i}"),
            })
            .collect();
        InstanceDraft {
            labels,
            edges: Vec::new(),
            start: 0,
            goal: n.saturating_sub(1),
        }
    }
}

/// Checks every instance invariant and reports all violations found.
///
/// Reachability is checked by BFS from the start vertex.
pub fn validate<T: Scalar>(draft: &InstanceDraft<T>) -> ValidationReport {
    let n = draft.labels.len();
    let mut violations = Vec::new();
    if n < 2 {
        violations.push(Violation::TooFewVertices(n));
    }
    let mut seen = BTreeSet::new();
    for label in &draft.labels {
        if !seen.insert(label.as_str()) {
            violations.push(Violation::DuplicateLabel(label.clone()));
        }
    }
    let name = |i: usize| {
        draft
            .labels
            .get(i)
            .cloned()
            .unwrap_or_else(|| format!("#{i}"))
    };
    for &i in &[draft.start, draft.goal] {
        if i >= n {
            violations.push(Violation::UnknownVertex(name(i)));
        }
    }
    let mut pairs = BTreeSet::new();
    let mut adjacency = vec![Vec::new(); n];
    for (u, v, w) in &draft.edges {
        let (u, v) = (*u, *v);
        if u >= n || v >= n {
            violations.push(Violation::UnknownVertex(name(if u >= n { u } else { v })));
            continue;
        }
        if u == v {
            violations.push(Violation::SelfLoop(name(u)));
        }
        if !pairs.insert((u, v)) {
            violations.push(Violation::DuplicateEdge(name(u), name(v)));
        }
        if !w.is_finite_value() {
            violations.push(Violation::NonFiniteWeight(name(u), name(v)));
        } else if w.is_negative() {
            violations.push(Violation::NegativeWeight(name(u), name(v)));
        }
        adjacency[u].push(v);
    }
    if draft.start < n && draft.goal < n {
        if draft.start == draft.goal {
            violations.push(Violation::StartIsGoal(name(draft.start)));
        } else if !reachable(&adjacency, draft.start)[draft.goal] {
            violations.push(Violation::GoalUnreachable {
                start: name(draft.start),
                goal: name(draft.goal),
            });
        }
    }
    ValidationReport { violations }
}

fn reachable(adjacency: &[Vec<usize>], from: usize) -> Vec<bool> {
    let mut seen = vec![false; adjacency.len()];
    let mut queue = VecDeque::from([from]);
    seen[from] = true;
    while let Some(u) = queue.pop_front() {
        for &v in &adjacency[u] {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    seen
}

/// A feasible path-finding instance `(V, E, w, s, t)`.
///
/// Immutable once built. Out-edges of each vertex are stored in increasing
/// vertex order, which is the order in which the search engines visit
/// children.
#[derive(Clone, Debug, PartialEq)]
pub struct PathInstance<T> {
    labels: Vec<String>,
    edges: Vec<Edge<T>>,
    out_offsets: Vec<usize>,
    start: VertexId,
    goal: VertexId,
}

impl<T: Scalar> PathInstance<T> {
    pub fn new(draft: InstanceDraft<T>) -> Result<Self, InvalidInstance> {
        let report = validate(&draft);
        if !report.is_ok() {
            return Err(InvalidInstance(report));
        }
        let n = draft.labels.len();
        let mut edges: Vec<Edge<T>> = draft
            .edges
            .into_iter()
            .map(|(u, v, w)| Edge {
                from: VertexId(u),
                to: VertexId(v),
                weight: w,
            })
            .collect();
        edges.sort_by_key(|e| (e.from, e.to));
        let mut out_offsets = vec![0; n + 1];
        for e in &edges {
            out_offsets[e.from.0 + 1] += 1;
        }
        for i in 0..n {
            out_offsets[i + 1] += out_offsets[i];
        }
        Ok(PathInstance {
            labels: draft.labels,
            edges,
            out_offsets,
            start: VertexId(draft.start),
            goal: VertexId(draft.goal),
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.labels.len()
    }

    pub fn start(&self) -> VertexId {
        self.start
    }

    pub fn goal(&self) -> VertexId {
        self.goal
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, v: VertexId) -> &str {
        &self.labels[v.0]
    }

    pub fn vertex(&self, label: &str) -> Option<VertexId> {
        self.labels.iter().position(|l| l == label).map(VertexId)
    }

    /// Vertices in tie-breaking order (smallest first).
    pub fn vertex_order(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.labels.len()).map(VertexId)
    }

    /// All edges, sorted by `(from, to)`.
    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    pub fn out_edges(&self, v: VertexId) -> &[Edge<T>] {
        &self.edges[self.out_offsets[v.0]..self.out_offsets[v.0 + 1]]
    }

    pub fn weight(&self, from: VertexId, to: VertexId) -> Option<&T> {
        let out = self.out_edges(from);
        out.binary_search_by_key(&to, |e| e.to)
            .ok()
            .map(|i| &out[i].weight)
    }

    pub fn max_out_degree(&self) -> usize {
        self.vertex_order()
            .map(|v| self.out_edges(v).len())
            .max()
            .unwrap_or(0)
    }

    /// Total weight of a vertex sequence, or `None` if some step is not an edge.
    pub fn path_cost(&self, path: &[VertexId]) -> Option<T> {
        let mut cost = T::zero();
        for pair in path.windows(2) {
            cost = cost + self.weight(pair[0], pair[1])?.clone();
        }
        Some(cost)
    }

    pub fn to_draft(&self) -> InstanceDraft<T> {
        InstanceDraft {
            labels: self.labels.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| (e.from.0, e.to.0, e.weight.clone()))
                .collect(),
            start: self.start.0,
            goal: self.goal.0,
        }
    }

    /// Same instance with every weight mapped through `f`.
    pub fn map_weights<U: Scalar>(&self, f: impl Fn(&T) -> U) -> PathInstance<U> {
        PathInstance {
            labels: self.labels.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| Edge {
                    from: e.from,
                    to: e.to,
                    weight: f(&e.weight),
                })
                .collect(),
            out_offsets: self.out_offsets.clone(),
            start: self.start,
            goal: self.goal,
        }
    }

    /// Restriction to a vertex subset: all vertices are kept, edges touching
    /// a vertex outside `keep` are dropped.
    pub fn restrict_to(&self, keep: &[bool]) -> Result<Self, InvalidInstance> {
        let mut draft = self.to_draft();
        draft
            .edges
            .retain(|(u, v, _)| keep.get(*u) == Some(&true) && keep.get(*v) == Some(&true));
        PathInstance::new(draft)
    }
}

/// A heuristic vector `ρ`, one finite entry per vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct HeuristicVector<T> {
    values: Vec<T>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HeuristicError {
    #[error("heuristic has {got} entries, instance has {expected} vertices")]
    LengthMismatch { expected: usize, got: usize },
    #[error("heuristic entry for vertex {0} is not finite")]
    NonFinite(usize),
}

impl<T: Scalar> HeuristicVector<T> {
    pub fn new(values: Vec<T>) -> Result<Self, HeuristicError> {
        if let Some(i) = values.iter().position(|v| !v.is_finite_value()) {
            return Err(HeuristicError::NonFinite(i));
        }
        Ok(HeuristicVector { values })
    }

    pub fn zeros(n: usize) -> Self {
        HeuristicVector {
            values: vec![T::zero(); n],
        }
    }

    pub fn from_ints(values: &[i64]) -> Self {
        HeuristicVector {
            values: values.iter().map(|&v| T::from_int(v)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, v: VertexId) -> &T {
        &self.values[v.0]
    }

    pub fn set(&mut self, v: VertexId, value: T) {
        self.values[v.0] = value;
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn check_len(&self, n: usize) -> Result<(), HeuristicError> {
        if self.values.len() == n {
            Ok(())
        } else {
            Err(HeuristicError::LengthMismatch {
                expected: n,
                got: self.values.len(),
            })
        }
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> HeuristicVector<U> {
        HeuristicVector {
            values: self.values.iter().map(f).collect(),
        }
    }

    /// `ρ + c·1`.
    pub fn shifted(&self, c: &T) -> Self {
        self.map(|v| v.clone() + c.clone())
    }

    /// `true` if `ρ_v ≤ ρ_c + w(v, c)` on every edge.
    pub fn is_consistent_on(&self, instance: &PathInstance<T>) -> bool {
        instance.edges().iter().all(|e| {
            self.get(e.from).clone() <= self.get(e.to).clone() + e.weight.clone()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational;
    use crate::Rational;

    fn draft(n: usize, edges: &[(usize, usize, i64)]) -> InstanceDraft<Rational> {
        let mut d = InstanceDraft::with_default_labels(n);
        d.edges = edges
            .iter()
            .map(|&(u, v, w)| (u, v, rational(w, 1)))
            .collect();
        d
    }

    #[test]
    fn minimal_instance_is_valid() {
        assert!(validate(&draft(2, &[(0, 1, 1)])).is_ok());
    }

    #[test]
    fn unreachable_goal_is_reported() {
        let report = validate(&draft(2, &[]));
        assert_eq!(
            report.violations,
            vec![Violation::GoalUnreachable {
                start: "s".into(),
                goal: "t".into()
            }]
        );
    }

    #[test]
    fn every_violation_is_collected() {
        let mut d = draft(3, &[(0, 0, 1), (0, 1, -1), (0, 1, 2), (1, 2, 1)]);
        d.labels[2] = "s".into();
        let report = validate(&d);
        assert!(report.violations.contains(&Violation::SelfLoop("s".into())));
        assert!(report
            .violations
            .contains(&Violation::NegativeWeight("s".into(), "v1".into())));
        assert!(report
            .violations
            .contains(&Violation::DuplicateEdge("s".into(), "v1".into())));
        assert!(report.violations.contains(&Violation::DuplicateLabel("s".into())));
    }

    #[test]
    fn start_equal_goal_and_tiny_instances_rejected() {
        let mut d = draft(3, &[(0, 1, 1)]);
        d.goal = 0;
        assert_eq!(validate(&d).violations, vec![Violation::StartIsGoal("s".into())]);
        let d1 = InstanceDraft::<Rational> {
            labels: vec!["s".into()],
            edges: vec![],
            start: 0,
            goal: 0,
        };
        assert!(validate(&d1)
            .violations
            .contains(&Violation::TooFewVertices(1)));
    }

    #[test]
    fn out_edges_sorted_by_target() {
        let inst = PathInstance::new(draft(4, &[(0, 3, 1), (0, 1, 1), (1, 3, 1), (0, 2, 1)])).unwrap();
        let targets: Vec<_> = inst.out_edges(VertexId(0)).iter().map(|e| e.to.0).collect();
        assert_eq!(targets, vec![1, 2, 3]);
        assert_eq!(inst.weight(VertexId(1), VertexId(3)), Some(&rational(1, 1)));
        assert_eq!(inst.weight(VertexId(3), VertexId(1)), None);
        assert_eq!(inst.max_out_degree(), 3);
    }

    #[test]
    fn restriction_drops_edges_of_removed_vertices() {
        let inst = PathInstance::new(draft(4, &[(0, 1, 1), (1, 3, 1), (0, 2, 5), (2, 3, 5)])).unwrap();
        let sub = inst.restrict_to(&[true, false, true, true]).unwrap();
        assert_eq!(sub.num_vertices(), 4);
        assert_eq!(sub.edges().len(), 2);
        assert!(inst.restrict_to(&[true, false, false, true]).is_err());
    }

    #[test]
    fn consistency_check() {
        let inst = PathInstance::new(draft(3, &[(0, 1, 1), (1, 2, 1)])).unwrap();
        assert!(HeuristicVector::<Rational>::from_ints(&[2, 1, 0]).is_consistent_on(&inst));
        assert!(!HeuristicVector::<Rational>::from_ints(&[0, 3, 0]).is_consistent_on(&inst));
    }
}
