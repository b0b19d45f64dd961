//! Inconsistency of a heuristic along the canonical optimal path, the
//! resulting certificate `Cost ≤ Opt + Δ`, and the per-iteration ledger that
//! witnesses why the certificate holds for A* with or without reopening.

use thiserror::Error;

use crate::instance::{HeuristicVector, PathInstance, VertexId};
use crate::optimal::{dijkstra_opt, distances, CanonicalOptimalPath, Direction, Unreachable};
use crate::scalar::Scalar;
use crate::search::{run_astar, SearchError, SearchTrace};

/// How one edge contributes to `Δ`.
#[doc(hidden)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TermRule {
    /// `max{ρ_v − ρ_c − w, 0}`.
    #[default]
    Hinge,
    /// `min{ρ_v − ρ_c − w, 0}`; a deliberately wrong rule used to exercise
    /// the violation paths.
    FlippedMin,
}

/// `Inc(v, c) = max{ρ_v − ρ_c − w(v, c), 0}`.
pub fn edge_inconsistency<T: Scalar>(rho: &HeuristicVector<T>, from: VertexId, to: VertexId, weight: &T) -> T {
    apply_rule(TermRule::Hinge, rho.get(from).clone() - rho.get(to).clone() - weight.clone())
}

fn apply_rule<T: Scalar>(rule: TermRule, diff: T) -> T {
    let zero = T::zero();
    match rule {
        TermRule::Hinge if diff > zero => diff,
        TermRule::Hinge => zero,
        TermRule::FlippedMin if diff < zero => diff,
        TermRule::FlippedMin => zero,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EdgeTerm<T> {
    pub from: VertexId,
    pub to: VertexId,
    pub value: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InconsistencyReport<T> {
    /// `Δ_ρ(x)`, the sum of `terms`.
    pub delta: T,
    /// One term per edge of `S*(x)` except the edge leaving the start.
    pub terms: Vec<EdgeTerm<T>>,
    pub optimal: CanonicalOptimalPath<T>,
    /// Cost of the path A* returned, when a run was made.
    pub cost: Option<T>,
    /// `Opt + Δ − Cost`, when a run was made.
    pub slack: Option<T>,
}

impl<T: Scalar> InconsistencyReport<T> {
    pub fn opt(&self) -> &T {
        &self.optimal.cost
    }
}

/// Terms of `Δ_ρ` along a fixed optimal path.
pub fn inconsistency_terms<T: Scalar>(
    instance: &PathInstance<T>,
    path: &[VertexId],
    rho: &HeuristicVector<T>,
    rule: TermRule,
) -> Vec<EdgeTerm<T>> {
    path.windows(2)
        .skip(1)
        .map(|w| {
            let weight = instance.weight(w[0], w[1]).expect("path follows instance edges");
            let diff = rho.get(w[0]).clone() - rho.get(w[1]).clone() - weight.clone();
            EdgeTerm {
                from: w[0],
                to: w[1],
                value: apply_rule(rule, diff),
            }
        })
        .collect()
}

/// `Δ_ρ(x)` along a fixed optimal path.
pub fn inconsistency_on_path<T: Scalar>(
    instance: &PathInstance<T>,
    path: &[VertexId],
    rho: &HeuristicVector<T>,
) -> T {
    inconsistency_terms(instance, path, rho, TermRule::Hinge)
        .into_iter()
        .fold(T::zero(), |acc, t| acc + t.value)
}

/// `Δ_ρ(x)` on the canonical optimal path.
pub fn inconsistency<T: Scalar>(
    instance: &PathInstance<T>,
    rho: &HeuristicVector<T>,
) -> Result<InconsistencyReport<T>, Unreachable> {
    let optimal = dijkstra_opt(instance)?;
    Ok(report_on(instance, optimal, rho, TermRule::Hinge))
}

fn report_on<T: Scalar>(
    instance: &PathInstance<T>,
    optimal: CanonicalOptimalPath<T>,
    rho: &HeuristicVector<T>,
    rule: TermRule,
) -> InconsistencyReport<T> {
    let terms = inconsistency_terms(instance, &optimal.path, rho, rule);
    let delta = terms.iter().fold(T::zero(), |acc, t| acc + t.value.clone());
    InconsistencyReport {
        delta,
        terms,
        optimal,
        cost: None,
        slack: None,
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum BoundError<T: Scalar> {
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Unreachable(#[from] Unreachable),
    #[error("certificate violated: cost {cost} > opt {opt} + delta {delta}")]
    CertificateViolation { cost: T, opt: T, delta: T },
}

/// Runs A* and checks `Cost ≤ Opt + Δ`.
pub fn check_suboptimality_bound<T: Scalar>(
    instance: &PathInstance<T>,
    rho: &HeuristicVector<T>,
    reopening: bool,
) -> Result<InconsistencyReport<T>, BoundError<T>> {
    check_suboptimality_bound_with(instance, rho, reopening, TermRule::Hinge)
}

#[doc(hidden)]
pub fn check_suboptimality_bound_with<T: Scalar>(
    instance: &PathInstance<T>,
    rho: &HeuristicVector<T>,
    reopening: bool,
    rule: TermRule,
) -> Result<InconsistencyReport<T>, BoundError<T>> {
    let trace = run_astar(instance, rho, reopening)?;
    let optimal = dijkstra_opt(instance)?;
    let mut report = report_on(instance, optimal, rho, rule);
    let slack = report.optimal.cost.clone() + report.delta.clone() - trace.cost.clone();
    if slack < T::zero() {
        return Err(BoundError::CertificateViolation {
            cost: trace.cost,
            opt: report.optimal.cost,
            delta: report.delta,
        });
    }
    report.cost = Some(trace.cost);
    report.slack = Some(slack);
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LedgerCheck {
    /// Some optimal-path vertex is in OPEN, unselected, with all shallower
    /// optimal-path vertices already selected.
    ShallowestVertex,
    /// `δg(v_i) ≤ Σ_{1 ≤ j < i} Inc(v_j, v_{j+1})` for selected `v_i`.
    GCostError,
    /// g-costs never increase between iterations.
    MonotoneG,
    /// The selected list only grows.
    MonotoneSelected,
    /// `ρ_{v_i} − ρ*_{v_i} − ρ_t ≤ Σ_{j ≥ i} Inc(v_j, v_{j+1})`.
    TailInadmissibility,
    /// `Cost ≤ Opt + δg(v_i) + ρ_{v_i} − ρ*_{v_i} − ρ_t` at the last iteration.
    Decomposition,
    /// `Cost ≤ Opt + Σ Inc`.
    FinalBound,
}

#[derive(Debug, Error, PartialEq)]
pub enum LedgerError {
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Unreachable(#[from] Unreachable),
    #[error("ledger check {check:?} failed after iteration {tau}: {detail}")]
    Violation {
        check: LedgerCheck,
        tau: usize,
        detail: String,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct LedgerReport<T> {
    pub optimal: CanonicalOptimalPath<T>,
    /// Index `i` of the shallowest vertex `v_i` after each iteration `τ = 0..=T`.
    pub shallowest: Vec<usize>,
    /// `T`: the goal was selected in iteration `T + 1`.
    pub last_tau: usize,
    pub cost: T,
    pub delta: T,
    pub checks: usize,
}

/// Replays an A* run against the canonical optimal path and checks every
/// intermediate inequality behind `Cost ≤ Opt + Δ`.
pub fn verify_appendix_ledger<T: Scalar>(
    instance: &PathInstance<T>,
    rho: &HeuristicVector<T>,
    reopening: bool,
) -> Result<LedgerReport<T>, LedgerError> {
    let trace = run_astar(instance, rho, reopening)?;
    verify_ledger_on_trace(instance, rho, &trace)
}

/// Ledger checks on an existing A* trace.
pub fn verify_ledger_on_trace<T: Scalar>(
    instance: &PathInstance<T>,
    rho: &HeuristicVector<T>,
    trace: &SearchTrace<T>,
) -> Result<LedgerReport<T>, LedgerError> {
    let optimal = dijkstra_opt(instance)?;
    let path = &optimal.path;
    let k = path.len() - 1;
    let n = instance.num_vertices();
    let (s, t) = (instance.start(), instance.goal());
    let g_star = distances(instance, s, Direction::Forward, None);
    let h_star = distances(instance, t, Direction::Backward, None);
    let zero = T::zero();

    // inc_prefix[i] = Σ_{j=1}^{i-1} Inc(v_j, v_{j+1}); defined for i = 0..=k.
    let incs: Vec<T> = (0..k)
        .map(|j| {
            let w = instance.weight(path[j], path[j + 1]).expect("optimal path edge");
            edge_inconsistency(rho, path[j], path[j + 1], w)
        })
        .collect();
    let mut inc_prefix = vec![zero.clone(); k + 1];
    for i in 2..=k {
        inc_prefix[i] = inc_prefix[i - 1].clone() + incs[i - 1].clone();
    }
    let total_inc = inc_prefix[k].clone();
    let tail_inc = |i: usize| -> T {
        incs[i..].iter().fold(zero.clone(), |a, b| a + b.clone())
    };

    let violation = |check, tau, detail: String| LedgerError::Violation { check, tau, detail };
    let mut checks = 0usize;

    let last_tau = trace.iterations() - 1;
    let mut selected = vec![false; n];
    let mut selected_count = 0usize;
    let mut shallowest = Vec::with_capacity(last_tau + 1);
    let mut prev_g: Vec<Option<T>> = vec![None; n];
    prev_g[s.0] = Some(zero.clone());

    for tau in 0..=last_tau {
        let snap = tau.checked_sub(1).map(|j| &trace.snapshots[j]);
        if let Some(snap) = snap {
            if !selected[snap.selected.0] {
                selected[snap.selected.0] = true;
                selected_count += 1;
            }
        }
        let open_has = |v: VertexId| snap.map_or(v == s, |snap| snap.is_open(v));
        let g_now = match snap {
            Some(snap) => snap.g.clone().expect("A* trace carries g-costs"),
            None => prev_g.clone(),
        };

        checks += 1;
        if trace.selected_order.len() < selected_count
            || trace.selected_order[..selected_count].iter().any(|v| !selected[v.0])
        {
            return Err(violation(LedgerCheck::MonotoneSelected, tau, "selected list shrank".into()));
        }

        for v in 0..n {
            checks += 1;
            let ok = match (&prev_g[v], &g_now[v]) {
                (Some(a), Some(b)) => b <= a,
                (Some(_), None) => false,
                _ => true,
            };
            if !ok {
                return Err(violation(
                    LedgerCheck::MonotoneG,
                    tau,
                    format!("g of {} increased", instance.label(VertexId(v))),
                ));
            }
        }

        checks += 1;
        let i = (0..=k).find(|&i| !selected[path[i].0]).ok_or_else(|| {
            violation(
                LedgerCheck::ShallowestVertex,
                tau,
                "every optimal-path vertex already selected".into(),
            )
        })?;
        if !open_has(path[i]) {
            return Err(violation(
                LedgerCheck::ShallowestVertex,
                tau,
                format!("candidate {} is not in OPEN", instance.label(path[i])),
            ));
        }
        shallowest.push(i);

        for (idx, v) in path.iter().enumerate() {
            if !selected[v.0] {
                continue;
            }
            checks += 1;
            let g = g_now[v.0].clone().ok_or_else(|| {
                violation(LedgerCheck::GCostError, tau, "selected vertex without g".into())
            })?;
            let err = g - g_star[v.0].clone().expect("optimal-path vertex is reachable");
            if err > inc_prefix[idx] {
                return Err(violation(
                    LedgerCheck::GCostError,
                    tau,
                    format!(
                        "g-cost error {} of {} exceeds {}",
                        err,
                        instance.label(*v),
                        inc_prefix[idx]
                    ),
                ));
            }
        }
        prev_g = g_now;
    }

    let i = *shallowest.last().expect("at least one iteration");
    let vi = path[i];
    let rho_gap = rho.get(vi).clone()
        - h_star[vi.0].clone().expect("optimal-path vertex reaches goal")
        - rho.get(t).clone();
    checks += 1;
    if rho_gap > tail_inc(i) {
        return Err(violation(
            LedgerCheck::TailInadmissibility,
            last_tau,
            format!("{} exceeds {}", rho_gap, tail_inc(i)),
        ));
    }
    let g_err = prev_g[vi.0].clone().expect("shallowest vertex is in OPEN")
        - g_star[vi.0].clone().expect("reachable");
    checks += 1;
    if g_err > inc_prefix[i] {
        return Err(violation(
            LedgerCheck::GCostError,
            last_tau,
            format!("shallowest g-cost error {} exceeds {}", g_err, inc_prefix[i]),
        ));
    }
    let opt = optimal.cost.clone();
    checks += 1;
    if trace.cost > opt.clone() + g_err + rho_gap {
        return Err(violation(
            LedgerCheck::Decomposition,
            last_tau,
            format!("cost {} too large", trace.cost),
        ));
    }
    checks += 1;
    if trace.cost > opt.clone() + total_inc.clone() {
        return Err(violation(
            LedgerCheck::FinalBound,
            last_tau,
            format!("cost {} > opt {} + inc {}", trace.cost, opt, total_inc),
        ));
    }
    Ok(LedgerReport {
        optimal,
        shallowest,
        last_tau,
        cost: trace.cost.clone(),
        delta: total_inc,
        checks,
    })
}
