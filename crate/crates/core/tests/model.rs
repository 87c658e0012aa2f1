mod common;

use common::{random, with_bound, with_capacity_moment};
use ddro_core::model::{
    lambda_from_distances, moment_mean, moment_mean_as, validate_instance, CapacityRange, InvestmentPlan, MomentVariant,
};
use proptest::prelude::*;

fn plan_with(ns: usize, nt: usize, open: &[usize], cap: f64) -> InvestmentPlan {
    let mut p = InvestmentPlan::empty(ns, nt);
    for &i in open {
        for t in 0..nt {
            p.open[i][t] = true;
        }
        p.capacity[i][0] = cap;
    }
    p
}

#[test]
fn generated_instance_is_valid() {
    assert!(validate_instance(&random(2, 3, 2, 0)).is_empty());
}

#[test]
fn inverted_support_names_the_cell() {
    let mut inst = random(2, 3, 2, 0);
    inst.support.lower[0][0] = inst.support.upper[0][0] + 1.0;
    let v = validate_instance(&inst);
    assert_eq!(v.len(), 1, "{v:?}");
    assert_eq!(v[0].field, "SupportSet");
    assert_eq!(v[0].index, vec![0, 0]);
}

#[test]
fn overlapping_capacity_ranges_are_reported() {
    let mut inst = with_capacity_moment(random(2, 3, 2, 0), 200.0);
    inst.moment.capacity.as_mut().unwrap().ranges[1][0] = vec![
        CapacityRange { lower: 0.0, upper: Some(200.0) },
        CapacityRange { lower: 150.0, upper: Some(400.0) },
    ];
    let v = validate_instance(&inst);
    assert_eq!(v.len(), 1, "{v:?}");
    assert_eq!(v[0].field, "moment.capacity.ranges");
    assert_eq!(v[0].index, vec![1, 0]);
}

#[test]
fn negative_cost_and_lambda_above_one_are_reported() {
    let mut inst = random(2, 3, 2, 0);
    inst.costs.production[1][1] = -1.0;
    inst.moment.lambda[0][2] = 1.5;
    let fields: Vec<String> = validate_instance(&inst).into_iter().map(|v| v.field).collect();
    assert!(fields.contains(&"costs.production".to_string()), "{fields:?}");
    assert!(fields.contains(&"moment.lambda".to_string()), "{fields:?}");
}

#[test]
fn closed_sites_leave_base_mean() {
    let inst = with_capacity_moment(with_bound(random(3, 4, 2, 1), 0.5), 50.0);
    let plan = InvestmentPlan::empty(3, 2);
    for variant in [MomentVariant::Location, MomentVariant::LocationBounded, MomentVariant::Capacity] {
        for j in 0..4 {
            for t in 0..2 {
                let m = moment_mean_as(&inst.moment, variant, &plan, j, t).unwrap();
                assert_eq!(m, inst.moment.base_mean[j][t], "{variant}");
            }
        }
    }
}

#[test]
fn bounded_mean_caps_the_uplift() {
    // Base 50, open impacts summing to 0.6, cap 0.5.
    let mut inst = with_bound(random(2, 1, 1, 0), 0.5);
    inst.moment.base_mean = vec![vec![50.0]];
    inst.moment.lambda = vec![vec![0.35], vec![0.25]];
    let plan = plan_with(2, 1, &[0, 1], 1.0);
    assert_eq!(moment_mean_as(&inst.moment, MomentVariant::LocationBounded, &plan, 0, 0).unwrap(), 75.0);
    assert!((moment_mean_as(&inst.moment, MomentVariant::Location, &plan, 0, 0).unwrap() - 80.0).abs() < 1e-12);
}

#[test]
fn capacity_mean_follows_the_range() {
    let mut inst = with_capacity_moment(random(1, 1, 1, 0), 50.0);
    inst.moment.capacity.as_mut().unwrap().lambda[0][0] = vec![0.0, 0.2];
    inst.moment.base_mean = vec![vec![40.0]];
    let small = plan_with(1, 1, &[0], 10.0);
    let large = plan_with(1, 1, &[0], 80.0);
    assert_eq!(moment_mean_as(&inst.moment, MomentVariant::Capacity, &small, 0, 0).unwrap(), 40.0);
    assert!((moment_mean_as(&inst.moment, MomentVariant::Capacity, &large, 0, 0).unwrap() - 48.0).abs() < 1e-12);
}

#[test]
fn moment_index_out_of_range() {
    let inst = random(1, 2, 1, 0);
    let plan = InvestmentPlan::empty(1, 1);
    assert!(moment_mean(&inst.moment, &plan, 2, 0).is_err());
    assert!(moment_mean(&inst.moment, &plan, 0, 1).is_err());
}

#[test]
fn lambda_two_sites() {
    let l = lambda_from_distances(&vec![vec![0.0], vec![25.0]], 25.0, 0.5).unwrap();
    assert!((l[0][0] - 0.36552928931500245).abs() < 1e-15);
    assert!((l[1][0] - 0.13447071068499755).abs() < 1e-15);
}

#[test]
fn lambda_single_site_and_zero_target() {
    let l = lambda_from_distances(&vec![vec![3.0, 70.0]], 25.0, 0.25).unwrap();
    assert_eq!(l, vec![vec![0.25, 0.25]]);
    let z = lambda_from_distances(&vec![vec![1.0], vec![2.0]], 25.0, 0.0).unwrap();
    assert_eq!(z, vec![vec![0.0], vec![0.0]]);
}

#[test]
fn lambda_rejects_bad_arguments() {
    assert!(lambda_from_distances(&vec![vec![1.0]], 0.0, 0.25).is_err());
    assert!(lambda_from_distances(&vec![vec![1.0]], 25.0, 1.5).is_err());
    // Every weight underflows to zero.
    assert!(lambda_from_distances(&vec![vec![1e6]], 1.0, 0.25).is_err());
}

#[test]
fn plan_invariants() {
    let inst = random(2, 2, 2, 0);
    let mut p = plan_with(2, 2, &[0], 5.0);
    assert!(p.check(&inst).is_empty());
    p.open[0][1] = false;
    assert!(!p.check(&inst).is_empty(), "closing a site must be flagged");
    let mut q = InvestmentPlan::empty(2, 2);
    q.capacity[1][0] = 1.0;
    assert!(!q.check(&inst).is_empty(), "capacity at a closed site must be flagged");
}

#[test]
fn investment_cost_counts_setup_once() {
    let inst = random(1, 1, 3, 0);
    let p = plan_with(1, 3, &[0], 2.0);
    let c = &inst.costs;
    let expected = c.setup[0][0] + 2.0 * c.capacity[0][0];
    assert!((p.investment_cost(&inst) - expected).abs() < 1e-9);
}

proptest! {
    #[test]
    fn lambda_columns_sum_to_target(
        d in proptest::collection::vec(proptest::collection::vec(0.0f64..200.0, 4), 1..6),
        target in 0.0f64..=1.0,
    ) {
        let l = lambda_from_distances(&d, 25.0, target).unwrap();
        for j in 0..4 {
            let s: f64 = l.iter().map(|row| row[j]).sum();
            prop_assert!((s - target).abs() <= 1e-12);
        }
    }

    #[test]
    fn location_mean_is_monotone(seed in 0u64..50, mask in 0u8..16, extra in 0usize..4) {
        let inst = with_bound(random(4, 3, 2, seed), 0.3);
        let open: Vec<usize> = (0..4).filter(|i| mask & (1 << i) != 0).collect();
        let mut more = open.clone();
        if !more.contains(&extra) {
            more.push(extra);
        }
        let (a, b) = (plan_with(4, 2, &open, 1.0), plan_with(4, 2, &more, 1.0));
        for variant in [MomentVariant::Location, MomentVariant::LocationBounded] {
            for j in 0..3 {
                for t in 0..2 {
                    let ma = moment_mean_as(&inst.moment, variant, &a, j, t).unwrap();
                    let mb = moment_mean_as(&inst.moment, variant, &b, j, t).unwrap();
                    prop_assert!(mb >= ma - 1e-12);
                    if variant == MomentVariant::LocationBounded {
                        prop_assert!(mb <= inst.moment.base_mean[j][t] * 1.3 + 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn capacity_mean_is_monotone_in_capacity(seed in 0u64..50, y in 0.0f64..100.0, dy in 0.0f64..100.0) {
        let inst = with_capacity_moment(random(2, 3, 1, seed), 60.0);
        let (a, b) = (plan_with(2, 1, &[0, 1], y), plan_with(2, 1, &[0, 1], y + dy));
        for j in 0..3 {
            let ma = moment_mean_as(&inst.moment, MomentVariant::Capacity, &a, j, 0).unwrap();
            let mb = moment_mean_as(&inst.moment, MomentVariant::Capacity, &b, j, 0).unwrap();
            prop_assert!(mb >= ma - 1e-12);
        }
    }

    #[test]
    fn zero_lambda_gives_base_mean(seed in 0u64..50, mask in 0u8..8) {
        let inst = random(3, 2, 2, seed).without_dependency();
        let open: Vec<usize> = (0..3).filter(|i| mask & (1 << i) != 0).collect();
        let p = plan_with(3, 2, &open, 1.0);
        for j in 0..2 {
            for t in 0..2 {
                prop_assert_eq!(moment_mean(&inst.moment, &p, j, t).unwrap(), inst.moment.base_mean[j][t]);
            }
        }
    }
}
