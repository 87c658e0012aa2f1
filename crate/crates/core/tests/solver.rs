use ddro_core::solver::{
    backend_from_name, to_lp_string, Backend, Cmp, HighsBackend, LinearModel, Sense, SolveOptions, SolveStatus,
    SolverConfig, VarKind,
};

fn solve(m: &LinearModel) -> ddro_core::solver::SolveResult {
    HighsBackend.solve(m, &SolveOptions::default()).unwrap()
}

#[test]
fn single_bound_lp() {
    let mut m = LinearModel::new("lp", Sense::Minimize);
    let x = m.continuous("x", f64::NEG_INFINITY, f64::INFINITY, 1.0);
    m.add_constraint("c", [(x, 1.0)], Cmp::Ge, 3.0);
    let r = solve(&m);
    assert_eq!(r.status, SolveStatus::Optimal);
    assert!((r.objective - 3.0).abs() < 1e-9);
    assert!((r.value(x) - 3.0).abs() < 1e-9);
}

#[test]
fn binary_knapsack() {
    let mut m = LinearModel::new("knap", Sense::Maximize);
    let x = m.binary("x", 1.0);
    let y = m.binary("y", 1.0);
    m.add_constraint("c", [(x, 1.0), (y, 1.0)], Cmp::Le, 1.0);
    let r = solve(&m);
    assert_eq!(r.status, SolveStatus::Optimal);
    assert!((r.objective - 1.0).abs() < 1e-9);
}

#[test]
fn infeasible_pair() {
    let mut m = LinearModel::new("bad", Sense::Minimize);
    let x = m.continuous("x", f64::NEG_INFINITY, f64::INFINITY, 0.0);
    m.add_constraint("a", [(x, 1.0)], Cmp::Le, 0.0);
    m.add_constraint("b", [(x, 1.0)], Cmp::Ge, 1.0);
    let r = solve(&m);
    assert_eq!(r.status, SolveStatus::Infeasible);
    assert!(r.require_solution("bad").is_err());
}

#[test]
fn unbounded_lp() {
    let mut m = LinearModel::new("free", Sense::Minimize);
    let x = m.continuous("x", f64::NEG_INFINITY, f64::INFINITY, 1.0);
    m.add_constraint("a", [(x, 1.0)], Cmp::Le, 5.0);
    let r = solve(&m);
    assert!(matches!(r.status, SolveStatus::Unbounded | SolveStatus::Infeasible), "{:?}", r.status);
    assert!(r.require_solution("free").is_err());
}

#[test]
fn binary_bounds_are_clamped() {
    let mut m = LinearModel::new("b", Sense::Minimize);
    let x = m.add_var("x", VarKind::Binary, -3.0, 7.0, 1.0);
    let v = &m.variables()[x.index()];
    assert_eq!((v.lower, v.upper), (0.0, 1.0));
}

#[test]
fn repeated_terms_merge() {
    let mut m = LinearModel::new("m", Sense::Minimize);
    let x = m.continuous("x", 0.0, 10.0, 1.0);
    let y = m.continuous("y", 0.0, 10.0, 0.0);
    m.add_constraint("c", [(x, 1.0), (y, 2.0), (x, 1.0), (y, -2.0)], Cmp::Ge, 4.0);
    assert_eq!(m.constraints()[0].terms, vec![(x, 2.0)]);
    assert!((solve(&m).objective - 2.0).abs() < 1e-9);
}

fn knapsack(n: usize) -> LinearModel {
    let mut m = LinearModel::new("knapsack", Sense::Minimize);
    let xs: Vec<_> = (0..n).map(|k| m.binary(format!("x{k}"), -((k * 37 % 23) as f64 + 1.0))).collect();
    m.add_constraint(
        "weight",
        xs.iter().enumerate().map(|(k, &x)| (x, (k * 17 % 13) as f64 + 2.0)),
        Cmp::Le,
        (n * 3) as f64,
    );
    m
}

#[test]
fn identical_builds_are_identical() {
    assert_eq!(to_lp_string(&knapsack(12)), to_lp_string(&knapsack(12)));
}

#[test]
fn gap_result_respects_gap_and_tightening_never_worsens_bound() {
    let m = knapsack(30);
    let loose = HighsBackend.solve(&m, &SolveOptions::with_gap(0.05)).unwrap();
    let tight = HighsBackend.solve(&m, &SolveOptions::with_gap(1e-9)).unwrap();
    assert!(loose.best_bound <= loose.objective + 1e-9);
    assert!((loose.objective - loose.best_bound) / loose.objective.abs() <= 0.05 + 1e-9);
    assert!(tight.best_bound >= loose.best_bound - 1e-9);
    assert!(tight.objective <= loose.objective + 1e-9);
}

#[test]
fn lp_format_lists_sections() {
    let mut m = LinearModel::new("fmt", Sense::Maximize);
    let x = m.binary("x", 2.0);
    let y = m.continuous("y", 0.0, 4.0, 1.0);
    m.add_constraint("row", [(x, 1.0), (y, 1.0)], Cmp::Le, 3.0);
    let text = to_lp_string(&m);
    for key in ["Maximize", "Subject To", "Bounds", "Binar", "End"] {
        assert!(text.contains(key), "missing {key} in\n{text}");
    }
}

#[test]
fn engine_selection() {
    assert_eq!(backend_from_name("HiGHS").unwrap().name(), "highs");
    assert!(backend_from_name("cplex").is_err());
    let cfg: SolverConfig = serde_json::from_str(r#"{"engine": "highs", "threads": 2}"#).unwrap();
    assert_eq!(cfg.threads, Some(2));
}
