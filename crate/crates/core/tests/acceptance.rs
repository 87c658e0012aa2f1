//! End-to-end acceptance checks. Runs without the libtest harness and prints one
//! PASS or FAIL line per criterion; the exit code is nonzero if any fails.
//! Set `ACCEPTANCE_ONLY=1,4` to run a subset.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use common::{random, rel};
use ddro_core::algorithms::{
    check_bounds, pregenerate_scenarios, run, Algorithm, AlgorithmConfig, OutcomeStatus, SolveOutcome,
};
use ddro_core::evaluation::{compare_variants, EvaluationSpec, PlanVariant};
use ddro_core::instances::{
    default_case_study_path, generate_random, load_case_study, with_vertex_support, CaseStudyOptions, GeneratorSpec,
};
use ddro_core::model::{InvestmentPlan, NetworkInstance, NodeRole, Scenario, ScenarioOrigin, SupportKind};
use ddro_core::reformulation::{build_deterministic, SecondStage};
use ddro_core::solver::{HighsBackend, SolveOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

/// Outcomes of every decomposition run, kept for the log checks.
#[derive(Default)]
struct Runs {
    outcomes: Vec<(String, f64, SolveOutcome)>,
}

impl Runs {
    fn solve(&mut self, tag: String, inst: &NetworkInstance, cfg: &AlgorithmConfig) -> Result<SolveOutcome, String> {
        let out = run(inst, cfg, &HighsBackend).map_err(|e| format!("{tag}: {e}"))?;
        self.outcomes.push((tag, cfg.stop_gap, out.clone()));
        Ok(out)
    }
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn median(v: &mut [usize]) -> f64 {
    v.sort_unstable();
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2] as f64
    } else {
        (v[n / 2 - 1] + v[n / 2]) as f64 / 2.0
    }
}

fn discrete_oracle(runs: &mut Runs) -> Check {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for seed in 0..20u64 {
        let (ns, nd) = (2 + seed as usize % 2, 3 + (seed as usize / 2) % 2);
        let inst = with_vertex_support(&random(ns, nd, 2, 100 + seed), 9, seed).map_err(|e| e.to_string())?;
        let mono = runs.solve(format!("monolithic {seed}"), &inst, &AlgorithmConfig::new(Algorithm::Monolithic).with_stop_gap(1e-9))?;
        let plus = runs.solve(format!("ccg+ discrete {seed}"), &inst, &AlgorithmConfig::new(Algorithm::CcgPlus).with_stop_gap(1e-9))?;
        let r = rel(mono.objective, plus.objective);
        ensure(r <= 1e-6, || format!("seed {seed}: {} vs {}", mono.objective, plus.objective))?;
        worst = worst.max(r);
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 120.0, || format!("took {secs:.0}s"))?;
    Ok(format!("20 instances, worst relative difference {worst:.1e}, {secs:.0}s"))
}

const AGREEMENT_SIZES: [(usize, usize, usize); 10] =
    [(2, 3, 2), (2, 4, 2), (3, 4, 2), (3, 5, 2), (2, 3, 3), (3, 4, 3), (3, 6, 3), (4, 6, 3), (4, 8, 3), (6, 12, 3)];

fn cross_agreement(runs: &mut Runs) -> Check {
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for (k, &(ns, nd, nt)) in AGREEMENT_SIZES.iter().enumerate() {
        let inst = random(ns, nd, nt, 200 + k as u64);
        let budget = Instant::now();
        let mut objectives = Vec::new();
        for alg in [Algorithm::CcgPlus, Algorithm::CcgClassic, Algorithm::Benders] {
            let left = (600.0 - budget.elapsed().as_secs_f64()).max(1.0);
            let cfg = AlgorithmConfig::new(alg).with_stop_gap(1e-3).with_time_limit(left);
            let out = runs.solve(format!("{alg} {ns}/{nd}/{nt}"), &inst, &cfg)?;
            if out.gap > 1e-3 {
                failures.push(format!("{alg} at {ns}/{nd}/{nt} stopped {:?} at gap {:.2}%", out.status, 100.0 * out.gap));
            }
            objectives.push(out.objective);
        }
        let spread = objectives.iter().map(|o| rel(*o, objectives[0])).fold(0.0, f64::max);
        if spread > 2e-3 {
            failures.push(format!("{ns}/{nd}/{nt} objectives {objectives:?}"));
        }
        worst = worst.max(spread);
    }
    ensure(failures.is_empty(), || failures.join("; "))?;
    Ok(format!("{} instances up to 6/12/3, worst spread {:.3}%", AGREEMENT_SIZES.len(), 100.0 * worst))
}

/// Classic and Benders stop one iteration past C&CG+; an unfinished run then needs
/// strictly more iterations than C&CG+, which is all the median comparison uses.
fn iteration_advantage(runs: &mut Runs) -> Check {
    let (mut plus, mut classic, mut benders) = (Vec::new(), Vec::new(), Vec::new());
    let mut censored = 0;
    for seed in 0..5u64 {
        let inst = random(4, 8, 3, 300 + seed);
        let p = runs.solve(format!("ccg+ 4/8/3 seed {seed}"), &inst, &AlgorithmConfig::new(Algorithm::CcgPlus))?;
        ensure(p.status == OutcomeStatus::Converged, || format!("C&CG+ seed {seed} ended {:?}", p.status))?;
        plus.push(p.iterations);
        for (alg, counts) in [(Algorithm::CcgClassic, &mut classic), (Algorithm::Benders, &mut benders)] {
            let cfg = AlgorithmConfig { max_iterations: Some(p.iterations + 1), ..AlgorithmConfig::new(alg) };
            let o = runs.solve(format!("{alg} 4/8/3 seed {seed}"), &inst, &cfg)?;
            match o.status {
                OutcomeStatus::Converged => counts.push(o.iterations),
                OutcomeStatus::IterationLimit => {
                    censored += 1;
                    counts.push(o.iterations + 1);
                }
                s => return Err(format!("{alg} seed {seed} ended {s:?}")),
            }
        }
    }
    let (mp, mc, mb) = (median(&mut plus), median(&mut classic), median(&mut benders));
    ensure(mp < mc && mp < mb, || format!("medians C&CG+ {mp}, classic {mc}, Benders {mb}"))?;
    Ok(format!("median iterations C&CG+ {mp}, classic > {}, Benders > {} ({censored} of 10 runs capped)", mc - 1.0, mb - 1.0))
}

fn random_plan(inst: &NetworkInstance, rng: &mut ChaCha8Rng) -> InvestmentPlan {
    let (ns, nt) = (inst.n_supply(), inst.periods);
    let mut p = InvestmentPlan::empty(ns, nt);
    for i in 0..ns {
        let from = rng.gen_range(0..=nt);
        for t in from..nt {
            p.open[i][t] = true;
            p.capacity[i][t] = rng.gen_range(0.0..=inst.costs.capacity_limit[i][t] * 0.3);
        }
    }
    p
}

fn strong_duality(_: &mut Runs) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for seed in 0..10u64 {
        let inst = random(3, 5, 3, 400 + seed);
        let stage = SecondStage::new(&inst);
        for _ in 0..10 {
            let plan = random_plan(&inst, &mut rng);
            let s = &inst.support;
            let xi: Vec<Vec<f64>> = s
                .lower
                .iter()
                .zip(&s.upper)
                .map(|(lo, hi)| lo.iter().zip(hi).map(|(&l, &u)| rng.gen_range(l..=u)).collect())
                .collect();
            let primal = stage.solve(&plan, &xi, &HighsBackend).map_err(|e| e.to_string())?.value;
            let dual = stage.solve_dual(&plan, &xi, &HighsBackend).map_err(|e| e.to_string())?;
            let r = rel(primal, dual);
            ensure(r <= 1e-6, || format!("seed {seed}: primal {primal}, dual {dual}"))?;
            worst = worst.max(r);
        }
    }
    Ok(format!("100 pairs, worst relative difference {worst:.1e}"))
}

fn complementarity(runs: &mut Runs) -> Check {
    for seed in 0..3u64 {
        let inst = random(3, 4, 2, 500 + seed);
        for alg in [Algorithm::CcgPlus, Algorithm::CcgClassic, Algorithm::Benders] {
            runs.solve(format!("{alg} kkt {seed}"), &inst, &AlgorithmConfig::new(alg))?;
        }
    }
    let (mut subproblems, mut products, mut worst_c, mut worst_p) = (0, 0, 0.0f64, 0.0f64);
    for (tag, _, out) in &runs.outcomes {
        for r in &out.log {
            if let Some(c) = r.complementarity {
                ensure(c <= 1e-5, || format!("{tag} iteration {}: residual {c:.2e}", r.iter))?;
                subproblems += 1;
                worst_c = worst_c.max(c);
            }
        }
        let Some(d) = &out.duals else { continue };
        if out.plan.range.is_some() {
            continue;
        }
        for (i, open) in out.plan.open.iter().enumerate() {
            for t in 0..open.len() {
                let x = out.plan.x(i, t);
                for j in 0..d.beta1.len() {
                    for (phi, beta) in [(d.phi1[i][0][j][t], d.beta1[j][t]), (d.phi2[i][0][j][t], d.beta2[j][t])] {
                        let err = (phi - x * beta).abs() / beta.abs().max(1.0);
                        ensure(err <= 1e-6, || format!("{tag}: product ({i},{j},{t}) off by {err:.2e}"))?;
                        worst_p = worst_p.max(err);
                        products += 1;
                    }
                }
            }
        }
    }
    ensure(subproblems > 0, || "no subproblem was solved".into())?;
    Ok(format!(
        "{subproblems} subproblem solves, worst residual {worst_c:.1e}; {products} products, worst {worst_p:.1e}"
    ))
}

fn degenerate_collapses(runs: &mut Runs) -> Check {
    let inst = random(3, 4, 2, 600).without_dependency();
    let cfg = AlgorithmConfig::new(Algorithm::CcgPlus).with_stop_gap(1e-6);
    let ddu = runs.solve("ccg+ lambda zero".into(), &inst, &cfg)?;
    let spec = EvaluationSpec { n_scenarios: 10, variants: vec![PlanVariant::Dro], ..EvaluationSpec::default() };
    let report = compare_variants(&inst, &spec, &cfg, &HighsBackend).map_err(|e| e.to_string())?;
    let dro = report.row(PlanVariant::Dro).ok_or("no DRO row")?.objective;
    let a = rel(ddu.objective, dro);
    ensure(a <= 1e-9, || format!("lambda zero: {} vs {dro}", ddu.objective))?;

    let mut point = random(3, 4, 2, 601).without_dependency();
    for v in point.moment.epsilon.iter_mut().flatten() {
        *v = 0.0;
    }
    point.support.lower = point.moment.base_mean.clone();
    point.support.upper = point.moment.base_mean.clone();
    let det = build_deterministic(&point, point.moment.variant, false)
        .and_then(|m| m.solve(&HighsBackend, &SolveOptions::with_gap(1e-9)))
        .map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for alg in [Algorithm::CcgPlus, Algorithm::CcgClassic, Algorithm::Benders] {
        let out = runs.solve(format!("{alg} point support"), &point, &AlgorithmConfig::new(alg).with_stop_gap(1e-8))?;
        let b = rel(out.objective, det.objective);
        ensure(b <= 1e-6, || format!("{alg} point support: {} vs {}", out.objective, det.objective))?;
        worst = worst.max(b);
    }
    let mut listed = point.clone();
    listed.support.kind = SupportKind::Discrete(vec![Scenario::new(point.moment.base_mean.clone(), ScenarioOrigin::Listed)]);
    let mono = runs.solve("monolithic point support".into(), &listed, &AlgorithmConfig::new(Algorithm::Monolithic).with_stop_gap(1e-9))?;
    worst = worst.max(rel(mono.objective, det.objective));
    ensure(worst <= 1e-6, || format!("monolithic point support: {} vs {}", mono.objective, det.objective))?;
    Ok(format!("lambda zero difference {a:.1e}; point support vs deterministic {worst:.1e}"))
}

fn bounds_discipline(runs: &mut Runs) -> Check {
    ensure(!runs.outcomes.is_empty(), || "no runs were logged".into())?;
    let mut records = 0;
    for (tag, stop, out) in &runs.outcomes {
        check_bounds(&out.log, 1e-6).map_err(|e| format!("{tag}: {e}"))?;
        if out.status == OutcomeStatus::Converged {
            ensure(out.gap <= *stop, || format!("{tag}: converged at gap {:.2e} above {stop:.0e}", out.gap))?;
        }
        records += out.log.len();
    }
    Ok(format!("{} runs, {records} iteration records", runs.outcomes.len()))
}

fn pregeneration(_: &mut Runs) -> Check {
    for (ns, nd, nt, seed) in [(2, 2, 2, 0), (4, 8, 3, 1), (6, 12, 3, 2), (1, 1, 1, 3), (3, 13, 5, 4)] {
        let inst = random(ns, nd, nt, 800 + seed);
        let pool = pregenerate_scenarios(&inst.support);
        ensure(pool.len() == nd * nt, || format!("{nd}x{nt}: pool of {}", pool.len()))?;
        for s in &pool {
            let mut at_upper = 0;
            for j in 0..nd {
                for t in 0..nt {
                    let v = s.demand[j][t];
                    ensure(v >= inst.support.lower[j][t] && v <= inst.support.upper[j][t], || "outside the support".into())?;
                    at_upper += usize::from(v == inst.support.upper[j][t]);
                }
            }
            ensure(at_upper == 1, || format!("{nd}x{nt}: {at_upper} cells at the upper end"))?;
        }
    }
    Ok("pool sizes and upper-end pattern hold on 5 shapes".into())
}

fn out_of_sample_order(_: &mut Runs) -> Check {
    let gen = GeneratorSpec { target_sum: 0.25, ..GeneratorSpec::new(6, 12, 3, 900) };
    let inst = generate_random(&gen).map_err(|e| e.to_string())?;
    let spec = EvaluationSpec { n_scenarios: 1000, seed: 9, ..EvaluationSpec::default() };
    // Reaching 0.1% at this size takes far longer than a desk run, so plan to 1% within 20 minutes.
    let cfg = AlgorithmConfig::new(Algorithm::CcgPlus).with_stop_gap(0.01).with_time_limit(1200.0);
    let report = compare_variants(&inst, &spec, &cfg, &HighsBackend)
        .map_err(|e| e.to_string())?;
    ensure(report.failures.is_empty(), || format!("{:?}", report.failures))?;
    let avg = |v| report.row(v).map(|r| r.evaluation.statistics.average).ok_or(format!("no {v} row"));
    let (dd, d, td, t) = (avg(PlanVariant::DroDdu)?, avg(PlanVariant::Dro)?, avg(PlanVariant::DetDdu)?, avg(PlanVariant::Det)?);
    let le = |a: f64, b: f64| a <= b + 0.005 * b.abs();
    let mut broken = Vec::new();
    for (name, a, b) in [("DRO+DDU<=DET+DDU", dd, td), ("DET+DDU<=DET", td, t), ("DRO+DDU<=DRO", dd, d), ("DRO<=DET", d, t)] {
        if !le(a, b) {
            broken.push(format!("{name} ({a:.1} vs {b:.1})"));
        }
    }
    for r in &report.rows {
        let s = r.evaluation.statistics;
        if !(s.average <= s.cvar50 + 1e-9 && s.cvar50 <= s.cvar75 + 1e-9 && s.cvar75 <= s.cvar90 + 1e-9) {
            broken.push(format!("{} tail order", r.variant));
        }
    }
    let summary = format!("averages DRO+DDU {dd:.1}, DRO {d:.1}, DET+DDU {td:.1}, DET {t:.1}");
    ensure(broken.is_empty(), || format!("{summary}; violated {}", broken.join(", ")))?;
    Ok(summary)
}

fn case_study_fidelity(_: &mut Runs) -> Check {
    let inst = load_case_study(default_case_study_path(), &CaseStudyOptions::default()).map_err(|e| e.to_string())?;
    let count = |r| inst.nodes.iter().filter(|n| n.role == r).count();
    let shape = (count(NodeRole::Supply), count(NodeRole::Port), count(NodeRole::Demand));
    ensure(shape == (5, 1, 13), || format!("node counts {shape:?}"))?;
    let s1 = inst.nodes.iter().find(|n| n.id == "S1").ok_or("no S1")?;
    ensure(s1.coordinates == [53.44059, 6.82363], || format!("S1 at {:?}", s1.coordinates))?;
    let d1 = inst.demand_ids().iter().position(|&id| id == "D1").ok_or("no D1")?;
    ensure(inst.moment.base_mean[d1][0] == 120000.0 * 1000.0, || format!("D1 2030 {}", inst.moment.base_mean[d1][0]))?;
    let y2040 = inst.period_labels.iter().position(|l| l == "2040").ok_or("no 2040")?;
    let p = inst.costs.production[0][y2040];
    ensure((p - 3.0).abs() < 1e-12, || format!("2040 production cost {p}"))?;
    Ok("node counts, S1, D1 2030 and the 2040 production cost match".into())
}

fn dependency_trend(runs: &mut Runs) -> Check {
    let mut capacity = Vec::new();
    for target in [0.0, 0.1, 0.25] {
        // With one year of operations per period nothing is ever built, so weigh each by the ten years it spans.
        let opts = CaseStudyOptions {
            years: Some(vec![2030, 2040, 2050]),
            target_sum: target,
            operating_years: 10.0,
            ..CaseStudyOptions::default()
        };
        let inst = load_case_study(default_case_study_path(), &opts).map_err(|e| e.to_string())?;
        let out = runs.solve(format!("case study target {target}"), &inst, &AlgorithmConfig::new(Algorithm::CcgPlus).with_stop_gap(0.01))?;
        ensure(out.status.is_success(), || format!("target {target} ended {:?}", out.status))?;
        capacity.push(out.plan.total_capacity());
    }
    let summary = format!("installed MW at target 0 / 0.1 / 0.25: {:.1} / {:.1} / {:.1}", capacity[0], capacity[1], capacity[2]);
    ensure(capacity[2] >= capacity[0] - 1e-6, || summary.clone())?;
    Ok(summary)
}

fn main() {
    type Criterion = (usize, &'static str, fn(&mut Runs) -> Check);
    // Log checks run last so they see every other run.
    let criteria: [Criterion; 11] = [
        (1, "discrete oracle equivalence", discrete_oracle),
        (2, "cross-algorithm agreement", cross_agreement),
        (3, "iteration-count advantage", iteration_advantage),
        (4, "strong duality", strong_duality),
        (5, "complementarity and products", complementarity),
        (6, "degenerate collapses", degenerate_collapses),
        (8, "pregeneration", pregeneration),
        (9, "out-of-sample ordering", out_of_sample_order),
        (10, "case-study fidelity", case_study_fidelity),
        (11, "decision-dependency trend", dependency_trend),
        (7, "bounds discipline", bounds_discipline),
    ];
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|p| p.trim().parse().ok()).collect());
    let mut runs = Runs::default();
    let mut failed = 0;
    for (id, name, check) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(|| check(&mut runs))).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {id:>2} PASS {name}: {detail} [{secs:.0}s]"),
            Err(detail) => {
                failed += 1;
                println!("criterion {id:>2} FAIL {name}: {detail} [{secs:.0}s]");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
