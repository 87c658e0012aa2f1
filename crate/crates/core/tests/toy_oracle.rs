//! Single-node instances checked against their closed-form optimum.

mod common;

use common::{rel, Toy};
use ddro_core::algorithms::{run, Algorithm, AlgorithmConfig};
use ddro_core::solver::HighsBackend;

fn cases() -> Vec<(&'static str, Toy)> {
    vec![
        ("default", Toy::default()),
        ("costly capacity", Toy { capacity_cost: 15.0, ..Toy::default() }),
        ("costly setup", Toy { setup: 5000.0, ..Toy::default() }),
        ("no dependency", Toy { lambda: 0.0, ..Toy::default() }),
        ("wide band", Toy { epsilon: 30.0, lambda: 0.4, ..Toy::default() }),
        ("tight limit", Toy { capacity_limit: 50.0, conversion: 2.0, ..Toy::default() }),
        ("import cheaper", Toy { production: 25.0, ..Toy::default() }),
    ]
}

fn tight(alg: Algorithm) -> AlgorithmConfig {
    AlgorithmConfig::new(alg).with_stop_gap(1e-7)
}

#[test]
fn decompositions_match_closed_form() {
    for (name, toy) in cases() {
        let (expected, _, _) = toy.optimum();
        let inst = toy.instance();
        for alg in [Algorithm::CcgPlus, Algorithm::CcgClassic, Algorithm::Benders] {
            let out = run(&inst, &tight(alg), &HighsBackend).unwrap();
            assert!(out.status.is_success(), "{name} {alg}: {:?}", out.status);
            assert!(
                rel(out.objective, expected) < 1e-6,
                "{name} {alg}: {} vs closed form {expected}",
                out.objective
            );
        }
    }
}

#[test]
fn closed_form_plan_is_recovered() {
    for (name, toy) in cases() {
        let (_, open, y) = toy.optimum();
        let out = run(&toy.instance(), &tight(Algorithm::CcgPlus), &HighsBackend).unwrap();
        assert_eq!(out.plan.open[0][0], open, "{name}");
        assert!((out.plan.capacity[0][0] - y).abs() <= 1e-5 * y.max(1.0), "{name}: {} vs {y}", out.plan.capacity[0][0]);
    }
}

#[test]
fn endpoint_support_matches_interval() {
    // On a line, distributions on the two endpoints already attain the interval bound.
    for (name, toy) in cases() {
        let (expected, _, _) = toy.optimum();
        let inst = toy.endpoint_instance();
        for alg in [Algorithm::Monolithic, Algorithm::CcgPlus, Algorithm::CcgClassic] {
            let out = run(&inst, &tight(alg), &HighsBackend).unwrap();
            assert!(rel(out.objective, expected) < 1e-6, "{name} {alg}: {} vs {expected}", out.objective);
        }
    }
}

#[test]
fn frozen_default_optimum() {
    // open, 140 MW: 100 + 280 + chord at mean 98 between Q(60) = -2040 and Q(140) = -4760
    let (value, open, y) = Toy::default().optimum();
    assert!(open);
    assert_eq!(y, 140.0);
    assert!((value - -2952.0).abs() < 1e-9);
}
