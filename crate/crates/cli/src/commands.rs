use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use heurdim::distribution::{DistributionKind, WeightModel};
use heurdim::generalization::{report_bound_shape, run_gap_experiment, GapExperimentConfig};
use heurdim::inconsistency::{check_suboptimality_bound_with, BoundError, LedgerError, TermRule};
use heurdim::io::{corpus_files, parse_instance, parse_rho, trace_to_json, validate_instance_text, write_instance, write_rho};
use heurdim::lab::{
    astar_behavior_census, build_lower_bound_family, gbfs_behavior_census, gcost_catalog, rho_for_subset,
    verify_shattering, LabError, RhoSampling, ShatterMode,
};
use heurdim::learn::InitMode;
use heurdim::scalar::{format_rational, parse_rational, rational_from_f64, rational_from_int};
use heurdim::search::run;
use heurdim::utility::{MeasureKind, UtilityMeasure};
use heurdim::{
    dijkstra_opt, inconsistency, minimize_empirical_inconsistency, sample_instance, verify_appendix_ledger, Algorithm,
    Heuristic, HeuristicVector, Instance, InstanceDistributionSpec, LearnerConfig, Rational, TrainingSet, VertexId,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::args::{AlgoChoice, Algo, Command, Global, Init, InstanceRho, Measure};
use crate::output::{csv_table, input, pretty, to_json, Failure, Io, Outcome};

fn q(x: &Rational) -> String {
    format_rational(x)
}

fn path_labels(x: &Instance, path: &[VertexId]) -> Vec<String> {
    path.iter().map(|&v| x.label(v).to_string()).collect()
}

fn load_instance(io: &mut Io, path: &Path) -> Result<Instance, Failure> {
    let text = io.read(path)?;
    parse_instance(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_pair(io: &mut Io, files: &InstanceRho) -> Result<(Instance, Heuristic), Failure> {
    let x = load_instance(io, &files.instance)?;
    let text = io.read(&files.rho)?;
    let rho = parse_rho(&text, &x).map_err(|e| Failure::Input(format!("{}: {e}", files.rho.display())))?;
    Ok((x, rho))
}

fn load_corpus(io: &mut Io, dir: &Path) -> Result<Vec<Instance>, Failure> {
    corpus_files(dir)
        .map_err(input)?
        .iter()
        .map(|p| load_instance(io, p))
        .collect()
}

fn lab_failure(e: LabError) -> Failure {
    match e {
        LabError::ConstructionViolation(_) | LabError::CensusViolation(_) | LabError::BoundViolation(_) => {
            Failure::Violation(e.to_string())
        }
        _ => Failure::Input(e.to_string()),
    }
}

fn required_out(global: &Global, what: &str) -> Result<PathBuf, Failure> {
    global
        .out
        .clone()
        .ok_or_else(|| Failure::Usage(format!("--out {what} is required")))
}

pub fn execute(command: &Command, global: &Global, io: &mut Io) -> Result<Outcome, Failure> {
    let seed = global.seed.unwrap_or(0);
    match command {
        Command::Validate { instance } => validate(io, instance),
        Command::Run { files, algo, emit_trace } => run_once(io, files, algo, emit_trace.as_deref()),
        Command::Opt { instance } => opt(io, instance),
        Command::Eval { files, algo, measure, cap } => eval(io, files, algo, *measure, cap.as_deref()),
        Command::Inconsistency { files } => inconsistency_report(io, files),
        Command::CheckBound { instance, rho, reopen, sweep, max_n, ell, inject_fault } => {
            let rule = if *inject_fault { TermRule::FlippedMin } else { TermRule::Hinge };
            match (instance, rho, sweep) {
                (Some(instance), Some(rho), None) => {
                    let files = InstanceRho { instance: instance.clone(), rho: rho.clone() };
                    check_bound(io, &files, *reopen, rule)
                }
                (None, None, Some(k)) => Ok(sweep_bound(*k, *max_n, *ell, seed, rule)?),
                _ => Err(Failure::Usage("give --instance and --rho, or --sweep K".into())),
            }
        }
        Command::Ledger { files, reopen } => ledger(io, files, *reopen),
        Command::Learn { corpus, eta, decay, steps, init, low, high } => {
            let init = match init {
                Init::Zeros => InitMode::Zeros,
                Init::Exact => InitMode::ExactDistances,
                Init::Random => InitMode::Random { low: *low, high: *high },
            };
            let config = LearnerConfig { eta: *eta, decay: *decay, max_steps: *steps, init, seed, tolerance: 0.0 };
            learn(io, corpus, &config, &required_out(global, "FILE")?)
        }
        Command::LowerBound { n, subset } => lower_bound(io, *n, subset.as_deref(), &required_out(global, "DIR")?),
        Command::Shatter { n, algo, exhaustive: _, samples, witnesses } => {
            let mode = match samples {
                Some(count) => ShatterMode::Sampled { count: *count, seed },
                None => ShatterMode::Exhaustive,
            };
            shatter(*n, algo.algorithm(), mode, *witnesses)
        }
        Command::Census { algo, corpus, permutations, samples, cap } => {
            census(io, algo, corpus, *permutations, *samples, *cap, seed)
        }
        Command::Gcosts { instance, cap } => gcosts(io, instance, *cap),
        Command::Gap { config, shape } => gap(io, config, global.seed, &required_out(global, "FILE")?, shape.as_deref()),
    }
}

fn validate(io: &mut Io, path: &Path) -> Result<Outcome, Failure> {
    let text = io.read(path)?;
    let report = validate_instance_text(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let violations: Vec<String> = report.violations.iter().map(ToString::to_string).collect();
    let status = if report.is_ok() {
        Ok(())
    } else {
        Err(Failure::Input(format!("{}: {report}", path.display())))
    };
    let csv = csv_table(&["violation"], violations.iter().map(|v| vec![v.clone()]));
    Ok(Outcome::ok(json!({ "valid": report.is_ok(), "violations": violations }))
        .with_csv(csv)
        .with_status(status))
}

fn run_once(io: &mut Io, files: &InstanceRho, algo: &AlgoChoice, trace_out: Option<&Path>) -> Result<Outcome, Failure> {
    let (x, rho) = load_pair(io, files)?;
    let algorithm = algo.algorithm();
    let trace = run(algorithm, &x, &rho).map_err(input)?;
    if let Some(path) = trace_out {
        io.write(path, &pretty(&trace_to_json(&x, &trace)))?;
    }
    let path = path_labels(&x, &trace.path);
    let csv = csv_table(
        &["algorithm", "cost", "iterations", "path", "fingerprint"],
        [vec![
            algorithm.tag().to_string(),
            q(&trace.cost),
            trace.iterations().to_string(),
            path.join(" "),
            trace.fingerprint().to_string(),
        ]],
    );
    Ok(Outcome::ok(json!({
        "algorithm": algorithm,
        "path": path,
        "cost": q(&trace.cost),
        "iterations": trace.iterations(),
        "reopened": trace.reopened_any(),
        "fingerprint": trace.fingerprint().to_string(),
    }))
    .with_csv(csv))
}

fn opt(io: &mut Io, path: &Path) -> Result<Outcome, Failure> {
    let x = load_instance(io, path)?;
    let opt = dijkstra_opt(&x).map_err(input)?;
    Ok(Outcome::ok(json!({ "cost": q(&opt.cost), "path": path_labels(&x, &opt.path) })))
}

fn eval(io: &mut Io, files: &InstanceRho, algo: &AlgoChoice, measure: Measure, cap: Option<&str>) -> Result<Outcome, Failure> {
    let (x, rho) = load_pair(io, files)?;
    let kind = match measure {
        Measure::PathCost => MeasureKind::PathCost,
        Measure::Subopt => MeasureKind::Suboptimality,
        Measure::Expansions => MeasureKind::Expansions,
    };
    let n = x.num_vertices() as i64;
    let cap = match cap {
        Some(text) => parse_rational(text).map_err(|e| Failure::Input(format!("--cap: {e}")))?,
        None if kind == MeasureKind::Expansions => rational_from_int(n),
        None => {
            let max_w = x.edges().iter().map(|e| e.weight.clone()).max().unwrap_or_else(|| rational_from_int(1));
            let cap = max_w * rational_from_int(n - 1);
            if cap > rational_from_int(0) {
                cap
            } else {
                rational_from_int(1)
            }
        }
    };
    let m = UtilityMeasure::new(kind, cap).map_err(input)?;
    let trace = run(algo.algorithm(), &x, &rho).map_err(input)?;
    let v = m.evaluate(&x, &trace).map_err(input)?;
    Ok(Outcome::ok(json!({
        "algorithm": algo.algorithm(),
        "measure": kind,
        "cap": q(m.cap()),
        "value": q(&v.value),
        "raw": q(&v.raw),
        "clipped": v.clipped,
    })))
}

fn inconsistency_report(io: &mut Io, files: &InstanceRho) -> Result<Outcome, Failure> {
    let (x, rho) = load_pair(io, files)?;
    let report = inconsistency(&x, &rho).map_err(input)?;
    let terms: Vec<Vec<String>> = report
        .terms
        .iter()
        .map(|t| vec![x.label(t.from).to_string(), x.label(t.to).to_string(), q(&t.value)])
        .collect();
    let csv = csv_table(&["from", "to", "inc"], terms.clone());
    Ok(Outcome::ok(json!({
        "delta": q(&report.delta),
        "opt": q(report.opt()),
        "optimal_path": path_labels(&x, &report.optimal.path),
        "terms": terms.iter().map(|t| json!({ "from": t[0], "to": t[1], "inc": t[2] })).collect::<Vec<_>>(),
    }))
    .with_csv(csv))
}

struct BoundRow {
    cost: Rational,
    opt: Rational,
    delta: Rational,
    violated: bool,
}

fn bound_row(x: &Instance, rho: &Heuristic, reopen: bool, rule: TermRule) -> Result<BoundRow, Failure> {
    match check_suboptimality_bound_with(x, rho, reopen, rule) {
        Ok(r) => Ok(BoundRow {
            cost: r.cost.clone().expect("run was made"),
            opt: r.opt().clone(),
            delta: r.delta,
            violated: false,
        }),
        Err(BoundError::CertificateViolation { cost, opt, delta }) => Ok(BoundRow { cost, opt, delta, violated: true }),
        Err(e) => Err(input(e)),
    }
}

impl BoundRow {
    fn slack(&self) -> Rational {
        self.opt.clone() + self.delta.clone() - self.cost.clone()
    }
}

fn check_bound(io: &mut Io, files: &InstanceRho, reopen: bool, rule: TermRule) -> Result<Outcome, Failure> {
    let (x, rho) = load_pair(io, files)?;
    let row = bound_row(&x, &rho, reopen, rule)?;
    let status = if row.violated {
        Err(Failure::Violation(format!(
            "cost {} > opt {} + delta {}",
            q(&row.cost),
            q(&row.opt),
            q(&row.delta)
        )))
    } else {
        Ok(())
    };
    Ok(Outcome::ok(json!({
        "algorithm": Algorithm::astar(reopen),
        "cost": q(&row.cost),
        "opt": q(&row.opt),
        "delta": q(&row.delta),
        "slack": q(&row.slack()),
        "holds": !row.violated,
    }))
    .with_status(status))
}

fn sweep_case(i: u64, max_n: usize, ell: u32, seed: u64) -> Result<(Instance, Heuristic), Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i);
    let n = rng.gen_range(3..=max_n.max(3));
    let mut spec = InstanceDistributionSpec::new(DistributionKind::ErdosRenyi, n, WeightModel::Integer { ell }, seed);
    spec.edge_prob = rng.gen_range(0.2..0.7);
    let x = sample_instance(&spec, i).map_err(input)?;
    let values = (0..n).map(|_| rational_from_int(rng.gen_range(0..=3 * i64::from(ell)))).collect();
    Ok((x, HeuristicVector::new(values).expect("integers are finite")))
}

fn sweep_bound(k: usize, max_n: usize, ell: u32, seed: u64, rule: TermRule) -> Result<Outcome, Failure> {
    let rows: Vec<Vec<(usize, bool, BoundRow)>> = (0..k as u64)
        .into_par_iter()
        .map(|i| {
            let (x, rho) = sweep_case(i, max_n, ell, seed)?;
            [false, true]
                .into_iter()
                .map(|reopen| Ok((x.num_vertices(), reopen, bound_row(&x, &rho, reopen, rule)?)))
                .collect()
        })
        .collect::<Result<_, Failure>>()?;
    let mut table = Vec::new();
    let mut violations = Vec::new();
    let mut min_slack: Option<Rational> = None;
    for (case, checks) in rows.iter().enumerate() {
        for (n, reopen, row) in checks {
            let slack = row.slack();
            if min_slack.as_ref().is_none_or(|m| slack < *m) {
                min_slack = Some(slack.clone());
            }
            if row.violated && violations.len() < 10 {
                violations.push(json!({
                    "case": case,
                    "n": n,
                    "reopen": reopen,
                    "cost": q(&row.cost),
                    "opt": q(&row.opt),
                    "delta": q(&row.delta),
                }));
            }
            table.push(vec![
                case.to_string(),
                n.to_string(),
                reopen.to_string(),
                q(&row.cost),
                q(&row.opt),
                q(&row.delta),
                q(&slack),
            ]);
        }
    }
    let violated = rows.iter().flatten().filter(|(_, _, r)| r.violated).count();
    let status = if violated > 0 {
        Err(Failure::Violation(format!("{violated} of {} checks violated the certificate", table.len())))
    } else {
        Ok(())
    };
    let csv = csv_table(&["case", "n", "reopen", "cost", "opt", "delta", "slack"], table.iter().cloned());
    Ok(Outcome::ok(json!({
        "cases": k,
        "checks": table.len(),
        "violations": violated,
        "min_slack": min_slack.as_ref().map(q),
        "first_violations": violations,
    }))
    .with_csv(csv)
    .with_status(status))
}

fn ledger(io: &mut Io, files: &InstanceRho, reopen: bool) -> Result<Outcome, Failure> {
    let (x, rho) = load_pair(io, files)?;
    match verify_appendix_ledger(&x, &rho, reopen) {
        Ok(r) => Ok(Outcome::ok(json!({
            "algorithm": Algorithm::astar(reopen),
            "holds": true,
            "cost": q(&r.cost),
            "opt": q(&r.optimal.cost),
            "delta": q(&r.delta),
            "iterations": r.last_tau + 1,
            "checks": r.checks,
            "shallowest": r.shallowest,
        }))),
        Err(LedgerError::Violation { check, tau, detail }) => {
            let msg = format!("ledger check {check:?} failed after iteration {tau}: {detail}");
            Ok(Outcome::ok(json!({
                "algorithm": Algorithm::astar(reopen),
                "holds": false,
                "check": format!("{check:?}"),
                "tau": tau,
                "detail": detail,
            }))
            .with_status(Err(Failure::Violation(msg))))
        }
        Err(e) => Err(input(e)),
    }
}

fn learn(io: &mut Io, corpus: &Path, config: &LearnerConfig, out: &Path) -> Result<Outcome, Failure> {
    let instances = load_corpus(io, corpus)?;
    let labels = instances[0].labels().to_vec();
    let exact = TrainingSet::new(instances).map_err(input)?;
    let training = exact.map_scalar(|v: &Rational| heurdim::scalar::convert::<Rational, f64>(v));
    let outcome = minimize_empirical_inconsistency(&training, config).map_err(input)?;
    let values = outcome
        .rho
        .values()
        .iter()
        .map(|&v| rational_from_f64(v).ok_or_else(|| Failure::Input(format!("learned value {v} is not finite"))))
        .collect::<Result<Vec<_>, _>>()?;
    let rho = HeuristicVector::new(values).expect("finite");
    io.write(out, &write_rho(&rho, &labels))?;
    let best = outcome.best_history();
    let csv = csv_table(
        &["step", "objective", "best"],
        outcome
            .history
            .iter()
            .zip(&best)
            .enumerate()
            .map(|(t, (v, b))| vec![t.to_string(), v.to_string(), b.to_string()]),
    );
    Ok(Outcome::ok(json!({
        "instances": exact.len(),
        "n": exact.num_vertices(),
        "objective": outcome.objective,
        "exact_objective": q(&exact.empirical_inconsistency(&rho)),
        "initial_objective": outcome.history[0],
        "best_iteration": outcome.best_iteration,
        "steps": outcome.history.len() - 1,
        "converged": outcome.converged,
        "rho": out,
    }))
    .with_csv(csv))
}

fn lower_bound(io: &mut Io, n: usize, subset: Option<&[usize]>, dir: &Path) -> Result<Outcome, Failure> {
    let family = build_lower_bound_family::<Rational>(n).map_err(lab_failure)?;
    std::fs::create_dir_all(dir).map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))?;
    let mut files = Vec::new();
    for (i, x) in family.iter().enumerate() {
        let path = dir.join(format!("x{}.json", i + 1));
        io.write(&path, &write_instance(x))?;
        files.push(path);
    }
    let mut rho_file = None;
    if let Some(subset) = subset {
        let set: BTreeSet<usize> = subset.iter().copied().collect();
        let rho = rho_for_subset::<Rational>(n, &set).map_err(lab_failure)?;
        let path = dir.join("rho.json");
        io.write(&path, &write_rho(&rho, family[0].labels()))?;
        rho_file = Some(path);
    }
    Ok(Outcome::ok(json!({
        "n": n,
        "instances": files,
        "rho": rho_file,
        "threshold": "5/2",
    })))
}

fn pattern_bits(pattern: u64, size: usize) -> String {
    (0..size).map(|b| if pattern >> b & 1 == 1 { '1' } else { '0' }).collect()
}

fn mask_subset(mask: u64, size: usize) -> Vec<usize> {
    (0..size).filter(|b| mask >> b & 1 == 1).map(|b| b + 1).collect()
}

fn shatter(n: usize, algorithm: Algorithm, mode: ShatterMode, witnesses: bool) -> Result<Outcome, Failure> {
    let res = verify_shattering(n, algorithm, mode).map_err(lab_failure)?;
    let size = res.instance_count;
    let table: Vec<Vec<String>> = res
        .achieved
        .iter()
        .map(|(&p, &m)| {
            let subset: Vec<String> = mask_subset(m, size).iter().map(ToString::to_string).collect();
            vec![pattern_bits(p, size), subset.join(" ")]
        })
        .collect();
    let mut report = json!({
        "n": n,
        "algorithm": algorithm,
        "instances": size,
        "threshold": "5/2",
        "exhaustive": mode == ShatterMode::Exhaustive,
        "subsets_checked": res.subsets_checked,
        "achieved": res.achieved_count(),
        "patterns": 1u128 << size,
        "missing_count": res.missing_count,
        "missing": res.missing.iter().map(|&p| pattern_bits(p, size)).collect::<Vec<_>>(),
        "shattered": res.shattered,
    });
    if witnesses {
        let map: serde_json::Map<String, Value> = table.iter().map(|r| (r[0].clone(), Value::String(r[1].clone()))).collect();
        report["witnesses"] = Value::Object(map);
    }
    let status = if mode == ShatterMode::Exhaustive && !res.shattered {
        Err(Failure::Violation(format!(
            "only {} of {} patterns achieved",
            res.achieved_count(),
            1u128 << size
        )))
    } else {
        Ok(())
    };
    Ok(Outcome::ok(report).with_csv(csv_table(&["pattern", "subset"], table)).with_status(status))
}

fn census(
    io: &mut Io,
    algo: &AlgoChoice,
    corpus: &Path,
    permutations: bool,
    samples: Option<usize>,
    cap: u64,
    seed: u64,
) -> Result<Outcome, Failure> {
    let instances = load_corpus(io, corpus)?;
    match algo.algo {
        Algo::Gbfs => {
            if samples.is_some() {
                return Err(Failure::Usage("GBFS census enumerates orders; --samples applies to A*".into()));
            }
            let c = gbfs_behavior_census(&instances, seed).map_err(lab_failure)?;
            Ok(Outcome::ok(to_json(&c)))
        }
        Algo::Astar => {
            if permutations {
                return Err(Failure::Usage("--permutations applies to the GBFS census".into()));
            }
            let sampling = RhoSampling {
                random: samples.unwrap_or(RhoSampling::default().random),
                seed,
                ..RhoSampling::default()
            };
            let c = astar_behavior_census(&instances, algo.reopen, &sampling, cap).map_err(lab_failure)?;
            Ok(Outcome::ok(to_json(&c)))
        }
    }
}

fn gcosts(io: &mut Io, path: &Path, cap: u64) -> Result<Outcome, Failure> {
    let x = load_instance(io, path)?;
    let catalog = gcost_catalog(&x, cap).map_err(lab_failure)?;
    let table = (0..catalog.n).map(|v| {
        vec![
            x.labels()[v].clone(),
            catalog.distinct_counts[v].to_string(),
            catalog.path_counts[v].to_string(),
            catalog.costs[v].join(" "),
        ]
    });
    let csv = csv_table(&["vertex", "distinct", "paths", "costs"], table);
    let failed: Vec<&str> = catalog.checks.iter().filter(|c| !c.holds).map(|c| c.name).collect();
    let status = if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Violation(format!("bounds violated: {}", failed.join(", "))))
    };
    Ok(Outcome::ok(to_json(&catalog)).with_csv(csv).with_status(status))
}

fn gap(io: &mut Io, config: &Path, seed: Option<u64>, out: &Path, shape: Option<&Path>) -> Result<Outcome, Failure> {
    let text = io.read(config)?;
    let mut cfg: GapExperimentConfig =
        serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", config.display())))?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    let curve = run_gap_experiment(&cfg).map_err(input)?;
    io.write(out, &curve.to_csv())?;
    if let Some(path) = shape {
        io.write(path, &report_bound_shape(&curve).to_csv())?;
    }
    let status = if curve.domination_violations > 0 {
        Err(Failure::Violation(format!(
            "{} held-out runs had suboptimality above their inconsistency",
            curve.domination_violations
        )))
    } else {
        Ok(())
    };
    Ok(Outcome::ok(json!({
        "mode": curve.mode,
        "n": curve.n,
        "heldout": curve.heldout,
        "seed": cfg.seed,
        "sizes": curve.points.iter().map(|p| p.n_train).collect::<Vec<_>>(),
        "mean_gaps": curve.mean_gaps(),
        "gap_increases": curve.gap_inversions(),
        "domination_violations": curve.domination_violations,
        "evaluated": curve.evaluated,
        "points": curve.points,
        "curve": out,
    }))
    .with_status(status))
}
