#![allow(dead_code)]

use ddro_core::instances::{generate_random, GeneratorSpec};
use ddro_core::model::{
    CapacityMoment, CapacityRange, CostSchedule, Grid, MomentSpec, MomentVariant, NetworkInstance, Node, NodeRole, Scenario, ScenarioOrigin, SupportKind,
    SupportSet,
};

/// One supply site, one port, one demand node, one period.
#[derive(Debug, Clone, Copy)]
pub struct Toy {
    pub setup: f64,
    pub capacity_cost: f64,
    pub production: f64,
    pub import: f64,
    pub transport_supply: f64,
    pub transport_port: f64,
    pub revenue: f64,
    pub capacity_limit: f64,
    pub conversion: f64,
    pub lower: f64,
    pub upper: f64,
    pub mean: f64,
    pub epsilon: f64,
    pub lambda: f64,
}

impl Default for Toy {
    fn default() -> Self {
        Self {
            setup: 100.0,
            capacity_cost: 2.0,
            production: 5.0,
            import: 20.0,
            transport_supply: 1.0,
            transport_port: 2.0,
            revenue: 40.0,
            capacity_limit: 200.0,
            conversion: 1.0,
            lower: 60.0,
            upper: 140.0,
            mean: 90.0,
            epsilon: 10.0,
            lambda: 0.2,
        }
    }
}

impl Toy {
    pub fn instance(&self) -> NetworkInstance {
        let g = |v: f64| vec![vec![v]];
        NetworkInstance {
            name: "toy".into(),
            nodes: vec![
                Node { id: "S1".into(), role: NodeRole::Supply, coordinates: [0.0, 0.0], label: String::new() },
                Node { id: "P1".into(), role: NodeRole::Port, coordinates: [10.0, 0.0], label: String::new() },
                Node { id: "D1".into(), role: NodeRole::Demand, coordinates: [5.0, 5.0], label: String::new() },
            ],
            periods: 1,
            period_labels: vec!["1".into()],
            conversion: self.conversion,
            costs: CostSchedule {
                setup: g(self.setup),
                capacity: g(self.capacity_cost),
                production: g(self.production),
                import: g(self.import),
                transport: vec![g(self.transport_supply), g(self.transport_port)],
                revenue: g(self.revenue),
                capacity_limit: g(self.capacity_limit),
                distance: vec![vec![7.0], vec![7.0]],
            },
            support: SupportSet { lower: g(self.lower), upper: g(self.upper), kind: SupportKind::Continuous },
            moment: MomentSpec {
                base_mean: g(self.mean),
                epsilon: g(self.epsilon),
                variant: MomentVariant::Location,
                lambda: g(self.lambda),
                bound: None,
                capacity: None,
            },
            big_m: None,
        }
    }

    /// Same data with the support replaced by its two endpoints.
    pub fn endpoint_instance(&self) -> NetworkInstance {
        let mut inst = self.instance();
        inst.support.kind = SupportKind::Discrete(vec![
            Scenario::new(vec![vec![self.lower]], ScenarioOrigin::Listed),
            Scenario::new(vec![vec![self.upper]], ScenarioOrigin::Listed),
        ]);
        inst
    }

    /// Recourse cost at capacity `y` MW and demand `xi`.
    pub fn recourse(&self, y: f64, xi: f64) -> f64 {
        let own = self.production + self.transport_supply;
        let bought = self.import + self.transport_port;
        let served_own = if own < bought { xi.min(self.conversion * y) } else { 0.0 };
        own * served_own + bought * (xi - served_own) - self.revenue * xi
    }

    /// Worst expected recourse: a convex recourse over an interval is maximised by a
    /// two-point law on the endpoints, and the chord is linear in the mean.
    pub fn worst_expectation(&self, open: bool, y: f64) -> f64 {
        let mu = self.mean * (1.0 + if open { self.lambda } else { 0.0 });
        let lo = (mu - self.epsilon).max(self.lower);
        let hi = (mu + self.epsilon).min(self.upper);
        assert!(lo <= hi, "mean band misses the support");
        let ql = self.recourse(y, self.lower);
        let qu = self.recourse(y, self.upper);
        let chord = |m: f64| ql + (qu - ql) * (m - self.lower) / (self.upper - self.lower);
        chord(lo).max(chord(hi))
    }

    /// Optimum over `x ∈ {0,1}` and the breakpoints of the piecewise-linear objective in `y`.
    pub fn optimum(&self) -> (f64, bool, f64) {
        let mut best = (self.worst_expectation(false, 0.0), false, 0.0);
        let mut ys = vec![0.0, self.capacity_limit];
        for xi in [self.lower, self.upper] {
            ys.push(xi / self.conversion);
        }
        for y in ys.into_iter().filter(|y| (0.0..=self.capacity_limit).contains(y)) {
            let v = self.setup + self.capacity_cost * y + self.worst_expectation(true, y);
            if v < best.0 {
                best = (v, true, y);
            }
        }
        best
    }
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

pub fn random(ns: usize, nd: usize, nt: usize, seed: u64) -> NetworkInstance {
    generate_random(&GeneratorSpec::new(ns, nd, nt, seed)).unwrap()
}

/// Adds a uniform uplift cap `b` for the bounded variants.
pub fn with_bound(mut inst: NetworkInstance, b: f64) -> NetworkInstance {
    inst.moment.bound = Some(vec![vec![b; inst.periods]; inst.n_demand()]);
    inst
}

/// Two capacity ranges per site split at `split` MW; the upper range carries the location
/// impact and the lower one none.
pub fn with_capacity_moment(mut inst: NetworkInstance, split: f64) -> NetworkInstance {
    let (ns, nt) = (inst.n_supply(), inst.periods);
    let ranges = (0..ns)
        .map(|_| {
            (0..nt)
                .map(|_| {
                    vec![
                        CapacityRange { lower: 0.0, upper: Some(split) },
                        CapacityRange { lower: split, upper: None },
                    ]
                })
                .collect()
        })
        .collect();
    let lambda: Vec<Grid> = inst
        .moment
        .lambda
        .iter()
        .map(|row| row.iter().map(|&l| vec![0.0, l]).collect())
        .collect();
    inst.moment.capacity = Some(CapacityMoment { ranges, lambda });
    inst
}
