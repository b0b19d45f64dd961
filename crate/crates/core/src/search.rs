//! GBFS and A* driven by an explicit heuristic vector, each recording the
//! full series of OPEN / CLOSED / parent (and g-cost) states it passes through.
//!
//! Selection always takes the OPEN vertex with the smallest score and breaks
//! ties toward the smallest [`VertexId`]. OPEN is an ordered set keyed by
//! `(score, id)`, so equal keys cannot occur.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::instance::{HeuristicError, HeuristicVector, PathInstance, VertexId};
use crate::scalar::{Ordered, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Gbfs,
    AstarReopen,
    AstarNoreopen,
}

impl Algorithm {
    pub fn astar(reopening: bool) -> Self {
        if reopening {
            Algorithm::AstarReopen
        } else {
            Algorithm::AstarNoreopen
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Algorithm::Gbfs => "gbfs",
            Algorithm::AstarReopen => "astar-reopen",
            Algorithm::AstarNoreopen => "astar-noreopen",
        }
    }

    pub fn is_astar(self) -> bool {
        !matches!(self, Algorithm::Gbfs)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SearchError {
    #[error(transparent)]
    Heuristic(#[from] HeuristicError),
    #[error("OPEN exhausted without reaching the goal; the instance is infeasible")]
    GoalNotReached,
    #[error("iteration budget of {0} exhausted before the goal was selected")]
    BudgetExhausted(usize),
    #[error("parent pointers do not lead back to the start vertex")]
    BrokenParentChain,
}

/// State after one iteration of the main loop.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot<T> {
    /// 1-based iteration number.
    pub iteration: usize,
    pub selected: VertexId,
    /// OPEN, sorted by vertex id.
    pub open: Vec<VertexId>,
    /// CLOSED, sorted by vertex id.
    pub closed: Vec<VertexId>,
    pub parent: Vec<Option<VertexId>>,
    /// g-costs (`None` = not yet generated). Absent for GBFS.
    pub g: Option<Vec<Option<T>>>,
}

impl<T> Snapshot<T> {
    pub fn is_open(&self, v: VertexId) -> bool {
        self.open.binary_search(&v).is_ok()
    }

    pub fn is_closed(&self, v: VertexId) -> bool {
        self.closed.binary_search(&v).is_ok()
    }
}

/// Complete record of one search execution.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchTrace<T> {
    pub algorithm: Algorithm,
    pub num_vertices: usize,
    pub start: VertexId,
    pub goal: VertexId,
    pub snapshots: Vec<Snapshot<T>>,
    /// Vertices in order of their first selection.
    pub selected_order: Vec<VertexId>,
    pub path: Vec<VertexId>,
    pub cost: T,
}

impl<T: Scalar> SearchTrace<T> {
    pub fn iterations(&self) -> usize {
        self.snapshots.len()
    }

    pub fn selected_sequence(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.snapshots.iter().map(|s| s.selected)
    }

    /// `true` if some vertex ever moved from CLOSED back to OPEN.
    pub fn reopened_any(&self) -> bool {
        self.snapshots.windows(2).any(|w| {
            w[1].open.iter().any(|&v| w[0].is_closed(v))
        })
    }

    pub fn fingerprint(&self) -> TraceDigest {
        trace_fingerprint(self)
    }
}

enum Status {
    Unseen,
    Open,
    Closed,
}

struct Frontier<T> {
    status: Vec<Status>,
    keys: Vec<Option<T>>,
    open: BTreeSet<(Ordered<T>, VertexId)>,
}

impl<T: Scalar> Frontier<T> {
    fn new(n: usize) -> Self {
        Frontier {
            status: (0..n).map(|_| Status::Unseen).collect(),
            keys: vec![None; n],
            open: BTreeSet::new(),
        }
    }

    fn insert(&mut self, v: VertexId, key: T) {
        if let Some(old) = self.keys[v.0].take() {
            if matches!(self.status[v.0], Status::Open) {
                self.open.remove(&(Ordered(old), v));
            }
        }
        self.open.insert((Ordered(key.clone()), v));
        self.keys[v.0] = Some(key);
        self.status[v.0] = Status::Open;
    }

    fn peek_min(&self) -> Option<VertexId> {
        self.open.first().map(|(_, v)| *v)
    }

    fn close(&mut self, v: VertexId) {
        if let Some(key) = self.keys[v.0].clone() {
            self.open.remove(&(Ordered(key), v));
        }
        self.status[v.0] = Status::Closed;
    }

    fn is_open(&self, v: VertexId) -> bool {
        matches!(self.status[v.0], Status::Open)
    }

    fn is_closed(&self, v: VertexId) -> bool {
        matches!(self.status[v.0], Status::Closed)
    }

    fn open_sorted(&self) -> Vec<VertexId> {
        let mut out: Vec<_> = self.open.iter().map(|(_, v)| *v).collect();
        out.sort_unstable();
        out
    }

    fn closed_sorted(&self) -> Vec<VertexId> {
        self.status
            .iter()
            .enumerate()
            .filter(|(_, s)| matches!(s, Status::Closed))
            .map(|(i, _)| VertexId(i))
            .collect()
    }
}

struct Recorder<T> {
    snapshots: Vec<Snapshot<T>>,
    selected_order: Vec<VertexId>,
    ever_selected: Vec<bool>,
}

impl<T: Scalar> Recorder<T> {
    fn new(n: usize) -> Self {
        Recorder {
            snapshots: Vec::new(),
            selected_order: Vec::new(),
            ever_selected: vec![false; n],
        }
    }

    fn select(&mut self, v: VertexId) {
        if !self.ever_selected[v.0] {
            self.ever_selected[v.0] = true;
            self.selected_order.push(v);
        }
    }

    fn snapshot(
        &mut self,
        selected: VertexId,
        frontier: &Frontier<T>,
        parent: &[Option<VertexId>],
        g: Option<&[Option<T>]>,
    ) {
        self.snapshots.push(Snapshot {
            iteration: self.snapshots.len() + 1,
            selected,
            open: frontier.open_sorted(),
            closed: frontier.closed_sorted(),
            parent: parent.to_vec(),
            g: g.map(<[_]>::to_vec),
        });
    }
}

fn trace_path<T: Scalar>(
    instance: &PathInstance<T>,
    parent: &[Option<VertexId>],
) -> Result<(Vec<VertexId>, T), SearchError> {
    let mut path = vec![instance.goal()];
    let mut v = instance.goal();
    while v != instance.start() {
        v = parent[v.0].ok_or(SearchError::BrokenParentChain)?;
        path.push(v);
        if path.len() > instance.num_vertices() {
            return Err(SearchError::BrokenParentChain);
        }
    }
    path.reverse();
    let cost = instance
        .path_cost(&path)
        .ok_or(SearchError::BrokenParentChain)?;
    Ok((path, cost))
}

/// Greedy best-first search: always expands the OPEN vertex with the
/// smallest `ρ_v`, and returns as soon as the goal is generated as a child.
pub fn run_gbfs<T: Scalar>(
    instance: &PathInstance<T>,
    rho: &HeuristicVector<T>,
) -> Result<SearchTrace<T>, SearchError> {
    let n = instance.num_vertices();
    rho.check_len(n)?;
    let (s, t) = (instance.start(), instance.goal());
    let mut frontier = Frontier::new(n);
    let mut parent: Vec<Option<VertexId>> = vec![None; n];
    let mut rec = Recorder::new(n);
    frontier.insert(s, rho.get(s).clone());

    while let Some(v) = frontier.peek_min() {
        rec.select(v);
        for edge in instance.out_edges(v) {
            let c = edge.to;
            if c == t {
                parent[t.0] = Some(v);
                rec.snapshot(v, &frontier, &parent, None);
                let (path, cost) = trace_path(instance, &parent)?;
                return Ok(SearchTrace {
                    algorithm: Algorithm::Gbfs,
                    num_vertices: n,
                    start: s,
                    goal: t,
                    snapshots: rec.snapshots,
                    selected_order: rec.selected_order,
                    path,
                    cost,
                });
            }
            if !frontier.is_open(c) && !frontier.is_closed(c) {
                parent[c.0] = Some(v);
                frontier.insert(c, rho.get(c).clone());
            }
        }
        frontier.close(v);
        rec.snapshot(v, &frontier, &parent, None);
    }
    Err(SearchError::GoalNotReached)
}

/// A* with scores `g_v + ρ_v`; the goal test happens when the goal is selected.
pub fn run_astar<T: Scalar>(
    instance: &PathInstance<T>,
    rho: &HeuristicVector<T>,
    reopening: bool,
) -> Result<SearchTrace<T>, SearchError> {
    run_astar_with_budget(instance, rho, reopening, None)
}

/// [`run_astar`] that gives up after `budget` iterations.
pub fn run_astar_with_budget<T: Scalar>(
    instance: &PathInstance<T>,
    rho: &HeuristicVector<T>,
    reopening: bool,
    budget: Option<usize>,
) -> Result<SearchTrace<T>, SearchError> {
    let n = instance.num_vertices();
    rho.check_len(n)?;
    let (s, t) = (instance.start(), instance.goal());
    let mut frontier = Frontier::new(n);
    let mut parent: Vec<Option<VertexId>> = vec![None; n];
    let mut g: Vec<Option<T>> = vec![None; n];
    let mut rec = Recorder::new(n);
    g[s.0] = Some(T::zero());
    frontier.insert(s, rho.get(s).clone());

    while let Some(v) = frontier.peek_min() {
        if let Some(limit) = budget {
            if rec.snapshots.len() >= limit {
                return Err(SearchError::BudgetExhausted(limit));
            }
        }
        rec.select(v);
        if v == t {
            rec.snapshot(v, &frontier, &parent, Some(&g));
            let (path, cost) = trace_path(instance, &parent)?;
            return Ok(SearchTrace {
                algorithm: Algorithm::astar(reopening),
                num_vertices: n,
                start: s,
                goal: t,
                snapshots: rec.snapshots,
                selected_order: rec.selected_order,
                path,
                cost,
            });
        }
        let g_v = g[v.0].clone().expect("selected vertex has a g-cost");
        for edge in instance.out_edges(v) {
            let c = edge.to;
            let g_new = g_v.clone() + edge.weight.clone();
            let improves = g[c.0].as_ref().is_some_and(|g_c| g_new < *g_c);
            let update = if frontier.is_open(c) {
                improves
            } else if frontier.is_closed(c) {
                reopening && improves
            } else {
                true
            };
            if update {
                parent[c.0] = Some(v);
                frontier.insert(c, g_new.clone() + rho.get(c).clone());
                g[c.0] = Some(g_new);
            }
        }
        frontier.close(v);
        rec.snapshot(v, &frontier, &parent, Some(&g));
    }
    Err(SearchError::GoalNotReached)
}

pub fn run<T: Scalar>(
    algorithm: Algorithm,
    instance: &PathInstance<T>,
    rho: &HeuristicVector<T>,
) -> Result<SearchTrace<T>, SearchError> {
    match algorithm {
        Algorithm::Gbfs => run_gbfs(instance, rho),
        Algorithm::AstarReopen => run_astar(instance, rho, true),
        Algorithm::AstarNoreopen => run_astar(instance, rho, false),
    }
}

/// SHA-256 digest of a trace's canonical encoding.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TraceDigest(pub [u8; 32]);

impl fmt::Display for TraceDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&hex::encode(self.0))
    }
}

impl fmt::Debug for TraceDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TraceDigest({})", &hex::encode(self.0)[..16])
    }
}

/// Digest covering the selection sequence, every OPEN/CLOSED/parent (and g)
/// snapshot, and the returned path. Equal digests mean identical executions.
pub fn trace_fingerprint<T: Scalar>(trace: &SearchTrace<T>) -> TraceDigest {
    let mut h = Sha256::new();
    let mut put = |bytes: &[u8]| {
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(bytes);
    };
    let ids = |vs: &[VertexId]| -> Vec<u8> {
        vs.iter().flat_map(|v| (v.0 as u64).to_le_bytes()).collect()
    };
    put(trace.algorithm.tag().as_bytes());
    put(&(trace.num_vertices as u64).to_le_bytes());
    for snap in &trace.snapshots {
        put(&(snap.selected.0 as u64).to_le_bytes());
        put(&ids(&snap.open));
        put(&ids(&snap.closed));
        let parents: Vec<u8> = snap
            .parent
            .iter()
            .flat_map(|p| p.map_or(u64::MAX, |v| v.0 as u64).to_le_bytes())
            .collect();
        put(&parents);
        if let Some(g) = &snap.g {
            let text: Vec<String> = g
                .iter()
                .map(|x| x.as_ref().map_or_else(|| "inf".to_string(), |x| x.to_string()))
                .collect();
            put(text.join(",").as_bytes());
        }
    }
    put(&ids(&trace.path));
    put(trace.cost.to_string().as_bytes());
    TraceDigest(h.finalize().into())
}
