mod common;

use common::{random, rel};
use ddro_core::algorithms::{Algorithm, AlgorithmConfig};
use ddro_core::evaluation::{
    compare_variants, evaluate_plan, sample_scenarios, EvaluationSpec, PlanVariant, CSV_HEADER,
};
use ddro_core::model::{moment_mean, InvestmentPlan, MomentVariant};
use ddro_core::reformulation::build_deterministic;
use ddro_core::solver::{HighsBackend, SolveOptions};

fn spec(n: usize, cv: f64) -> EvaluationSpec {
    EvaluationSpec { n_scenarios: n, cv, seed: 11, ..EvaluationSpec::default() }
}

fn open_all(ns: usize, nt: usize, cap: f64) -> InvestmentPlan {
    let mut p = InvestmentPlan::empty(ns, nt);
    for i in 0..ns {
        p.open[i] = vec![true; nt];
        p.capacity[i][0] = cap;
    }
    p
}

#[test]
fn zero_cv_samples_the_mean() {
    let inst = random(2, 3, 2, 1);
    let plan = open_all(2, 2, 10.0);
    let scen = sample_scenarios(&inst, &plan, &spec(5, 0.0)).unwrap();
    for s in &scen {
        for j in 0..3 {
            for t in 0..2 {
                assert_eq!(s.demand[j][t], moment_mean(&inst.moment, &plan, j, t).unwrap());
            }
        }
    }
}

#[test]
fn sampling_is_seeded_and_nonnegative() {
    let inst = random(2, 3, 2, 1);
    let plan = InvestmentPlan::empty(2, 2);
    let a = sample_scenarios(&inst, &plan, &spec(50, 2.0)).unwrap();
    let b = sample_scenarios(&inst, &plan, &spec(50, 2.0)).unwrap();
    let c = sample_scenarios(&inst, &plan, &EvaluationSpec { seed: 12, ..spec(50, 2.0) }).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert!(a.iter().flat_map(|s| s.demand.iter().flatten()).all(|v| *v >= 0.0));
    assert!(a.iter().flat_map(|s| s.demand.iter().flatten()).any(|v| *v == 0.0), "cv 2 should hit the floor");
}

#[test]
fn bad_specs_are_rejected() {
    let inst = random(1, 1, 1, 0);
    let plan = InvestmentPlan::empty(1, 1);
    assert!(sample_scenarios(&inst, &plan, &spec(0, 0.1)).is_err());
    assert!(sample_scenarios(&inst, &plan, &spec(3, -0.1)).is_err());
    assert!(sample_scenarios(&inst, &plan, &spec(3, f64::NAN)).is_err());
}

#[test]
fn evaluation_is_deterministic_and_tails_are_ordered() {
    let inst = random(2, 3, 2, 2);
    let plan = open_all(2, 2, 30.0);
    let scen = sample_scenarios(&inst, &plan, &spec(200, 0.2)).unwrap();
    let a = evaluate_plan(&inst, &plan, &scen, &HighsBackend).unwrap();
    let b = evaluate_plan(&inst, &plan, &scen, &HighsBackend).unwrap();
    assert_eq!(a, b);
    let s = a.statistics;
    assert!(s.average <= s.cvar50 + 1e-9);
    assert!(s.cvar50 <= s.cvar75 + 1e-9 && s.cvar75 <= s.cvar90 + 1e-9);
    assert!(s.quantile50 <= s.quantile75 && s.quantile75 <= s.quantile90);
    assert!(s.quantile90 <= s.cvar90 + 1e-9);
}

#[test]
fn revenue_enters_linearly() {
    // Demand is always met (imports are unlimited), so revenue scales out of the cost.
    let inst = random(2, 2, 2, 3);
    let plan = InvestmentPlan::empty(2, 2);
    let scen = sample_scenarios(&inst, &plan, &spec(20, 0.1)).unwrap();
    let mut richer = inst.clone();
    for row in &mut richer.costs.revenue {
        for v in row.iter_mut() {
            *v += 1.0;
        }
    }
    let base = evaluate_plan(&inst, &plan, &scen, &HighsBackend).unwrap();
    let more = evaluate_plan(&richer, &plan, &scen, &HighsBackend).unwrap();
    for (k, s) in scen.iter().enumerate() {
        let served: f64 = s.demand.iter().flatten().sum();
        assert!(rel(base.values[k] - served, more.values[k]) < 1e-7, "scenario {k}");
    }
}

#[test]
fn infeasible_plan_is_rejected() {
    let inst = random(2, 2, 2, 3);
    let mut plan = InvestmentPlan::empty(2, 2);
    plan.capacity[0][0] = 5.0;
    let scen = sample_scenarios(&inst, &InvestmentPlan::empty(2, 2), &spec(2, 0.1)).unwrap();
    assert!(evaluate_plan(&inst, &plan, &scen, &HighsBackend).is_err());
}

#[test]
fn zero_cv_reproduces_the_deterministic_objective() {
    let inst = random(2, 3, 2, 4);
    for ddu in [true, false] {
        let sol = build_deterministic(&inst, MomentVariant::Location, ddu)
            .unwrap()
            .solve(&HighsBackend, &SolveOptions::with_gap(1e-9))
            .unwrap();
        let model = if ddu { inst.clone() } else { inst.without_dependency() };
        let scen = sample_scenarios(&model, &sol.plan, &spec(1, 0.0)).unwrap();
        let ev = evaluate_plan(&inst, &sol.plan, &scen, &HighsBackend).unwrap();
        assert!(rel(ev.statistics.average, sol.objective) < 1e-6, "ddu {ddu}: {} vs {}", ev.statistics.average, sol.objective);
    }
}

#[test]
fn compare_without_dependency_gives_equal_pairs() {
    let inst = random(2, 3, 2, 5).without_dependency();
    let cfg = AlgorithmConfig::new(Algorithm::CcgPlus);
    let report = compare_variants(&inst, &spec(100, 0.1), &cfg, &HighsBackend).unwrap();
    assert!(report.failures.is_empty(), "{:?}", report.failures);
    assert_eq!(report.rows.len(), 4);
    let avg = |v| report.row(v).unwrap().evaluation.statistics.average;
    let obj = |v| report.row(v).unwrap().objective;
    assert!(rel(obj(PlanVariant::DroDdu), obj(PlanVariant::Dro)) < 1e-9);
    assert!(rel(obj(PlanVariant::DetDdu), obj(PlanVariant::Det)) < 1e-9);
    assert!(rel(avg(PlanVariant::DroDdu), avg(PlanVariant::Dro)) < 1e-9);
    assert!(rel(avg(PlanVariant::DetDdu), avg(PlanVariant::Det)) < 1e-9);
    let csv = report.to_csv();
    assert_eq!(csv.lines().next().unwrap(), CSV_HEADER);
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn common_mean_scores_every_plan_on_one_sample() {
    let inst = random(2, 2, 2, 6);
    let cfg = AlgorithmConfig::new(Algorithm::CcgPlus);
    let s = EvaluationSpec { common_mean: true, variants: vec![PlanVariant::Det, PlanVariant::DroDdu], ..spec(30, 0.1) };
    let report = compare_variants(&inst, &s, &cfg, &HighsBackend).unwrap();
    let reference = &report.row(PlanVariant::DroDdu).unwrap().plan;
    let scen = sample_scenarios(&inst, reference, &s).unwrap();
    let det = report.row(PlanVariant::Det).unwrap();
    let direct = evaluate_plan(&inst, &det.plan, &scen, &HighsBackend).unwrap();
    assert_eq!(direct.values, det.evaluation.values);
}

#[test]
fn variant_labels_round_trip() {
    for v in PlanVariant::ALL {
        assert_eq!(v.label().parse::<PlanVariant>().unwrap(), v);
    }
    assert_eq!("dro_ddu".parse::<PlanVariant>().unwrap(), PlanVariant::DroDdu);
    assert!("stochastic".parse::<PlanVariant>().is_err());
}
