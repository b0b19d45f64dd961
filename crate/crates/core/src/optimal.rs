//! Exact shortest paths and the canonical optimal path.
//!
//! Among all minimum-cost simple `s–t` paths the canonical one is the
//! lexicographically least vertex sequence under the vertex order.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::instance::{PathInstance, VertexId};
use crate::scalar::{Ordered, Scalar};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("goal is unreachable from start")]
pub struct Unreachable;

#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalOptimalPath<T> {
    pub path: Vec<VertexId>,
    pub cost: T,
}

impl<T> CanonicalOptimalPath<T> {
    /// Edges `(v_j, v_{j+1})` of the path.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.path.windows(2).map(|w| (w[0], w[1]))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// Distances from the source along edge direction.
    Forward,
    /// Distances to the source against edge direction.
    Backward,
}

/// Dijkstra distances from (or, backward, to) `source`, skipping vertices
/// marked in `blocked`.
pub fn distances<T: Scalar>(
    instance: &PathInstance<T>,
    source: VertexId,
    direction: Direction,
    blocked: Option<&[bool]>,
) -> Vec<Option<T>> {
    let n = instance.num_vertices();
    let reverse: Vec<Vec<(VertexId, T)>> = match direction {
        Direction::Forward => Vec::new(),
        Direction::Backward => {
            let mut r = vec![Vec::new(); n];
            for e in instance.edges() {
                r[e.to.0].push((e.from, e.weight.clone()));
            }
            r
        }
    };
    let is_blocked = |v: VertexId| blocked.is_some_and(|b| b[v.0]);
    let mut dist: Vec<Option<T>> = vec![None; n];
    let mut done = vec![false; n];
    let mut queue = BTreeSet::new();
    dist[source.0] = Some(T::zero());
    queue.insert((Ordered(T::zero()), source));
    while let Some((Ordered(d), u)) = queue.pop_first() {
        if done[u.0] {
            continue;
        }
        done[u.0] = true;
        let mut relax = |v: VertexId, w: &T| {
            if is_blocked(v) || done[v.0] {
                return;
            }
            let nd = d.clone() + w.clone();
            if dist[v.0].as_ref().is_none_or(|old| nd < *old) {
                dist[v.0] = Some(nd.clone());
                queue.insert((Ordered(nd), v));
            }
        };
        match direction {
            Direction::Forward => {
                for e in instance.out_edges(u) {
                    relax(e.to, &e.weight);
                }
            }
            Direction::Backward => {
                for (v, w) in &reverse[u.0] {
                    relax(*v, w);
                }
            }
        }
    }
    dist
}

/// `Opt(x)` and the canonical optimal path `S*(x)`.
///
/// The path is built vertex by vertex: from the current end `u`, step to the
/// smallest child `c` such that some simple completion through `c` that
/// avoids the prefix still has optimal total cost.
pub fn dijkstra_opt<T: Scalar>(
    instance: &PathInstance<T>,
) -> Result<CanonicalOptimalPath<T>, Unreachable> {
    let (s, t) = (instance.start(), instance.goal());
    let to_goal = distances(instance, t, Direction::Backward, None);
    let opt = to_goal[s.0].clone().ok_or(Unreachable)?;
    let n = instance.num_vertices();
    let mut on_path = vec![false; n];
    let mut path = vec![s];
    on_path[s.0] = true;
    let mut prefix = T::zero();
    let mut u = s;
    while u != t {
        let mut next = None;
        for e in instance.out_edges(u) {
            let c = e.to;
            if on_path[c.0] {
                continue;
            }
            let Some(rest) = to_goal[c.0].clone() else {
                continue;
            };
            let through = prefix.clone() + e.weight.clone() + rest.clone();
            if through != opt {
                continue;
            }
            // The unrestricted distance may rely on revisiting the prefix
            // (possible with zero-weight cycles); confirm a prefix-free one.
            let completion = if c == t {
                Some(T::zero())
            } else {
                let mut blocked = on_path.clone();
                blocked[c.0] = false;
                distances(instance, c, Direction::Forward, Some(&blocked))[t.0].clone()
            };
            if completion.is_some_and(|d| d == rest) {
                next = Some((c, e.weight.clone()));
                break;
            }
        }
        let (c, w) = next.expect("an optimal completion always exists");
        prefix = prefix + w;
        on_path[c.0] = true;
        path.push(c);
        u = c;
    }
    Ok(CanonicalOptimalPath { path, cost: opt })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::InstanceDraft;

    fn inst(n: usize, edges: &[(usize, usize, i64)]) -> PathInstance<i64> {
        let mut d = InstanceDraft::with_default_labels(n);
        d.edges = edges.to_vec();
        PathInstance::new(d).unwrap()
    }

    fn ids(v: &[usize]) -> Vec<VertexId> {
        v.iter().copied().map(VertexId).collect()
    }

    #[test]
    fn picks_lexicographically_least_optimum() {
        // Optimal paths of cost 2: s-1-2-t, s-1-t, s-2-t.
        let x = inst(4, &[(0, 2, 1), (2, 3, 1), (0, 1, 1), (1, 2, 0), (1, 3, 1)]);
        let p = dijkstra_opt(&x).unwrap();
        assert_eq!(p.cost, 2);
        assert_eq!(p.path, ids(&[0, 1, 2, 3]));
    }

    #[test]
    fn zero_weight_cycles_do_not_produce_walks() {
        // s->a (0), a->s (0), a->t (1), s->t (1).
        let x = inst(3, &[(0, 1, 0), (1, 0, 0), (1, 2, 1), (0, 2, 1)]);
        let p = dijkstra_opt(&x).unwrap();
        assert_eq!(p.cost, 1);
        assert_eq!(p.path, ids(&[0, 1, 2]));
    }

    #[test]
    fn backward_distances() {
        let x = inst(3, &[(0, 1, 2), (1, 2, 3), (0, 2, 7)]);
        let d = distances(&x, VertexId(2), Direction::Backward, None);
        assert_eq!(d, vec![Some(5), Some(3), Some(0)]);
    }
}
