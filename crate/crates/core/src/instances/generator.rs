//! Seeded random instances on a 100×100 plane.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    lambda_from_distances, CostSchedule, Grid, MomentSpec, MomentVariant, NetworkInstance, Node, NodeRole, Scenario,
    ScenarioOrigin, SupportKind, SupportSet,
};
use crate::reformulation::same_scenario;

/// Mean and standard deviation of a normal draw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalParams {
    pub mean: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct GeneratorSpec {
    pub n_supply: usize,
    pub n_demand: usize,
    pub n_port: usize,
    pub n_periods: usize,
    pub seed: u64,
    pub setup_cost: NormalParams,
    pub capacity_cost: NormalParams,
    /// Per-period factor on setup and capacity costs.
    pub investment_decay: f64,
    pub production_cost: f64,
    pub import_cost: f64,
    /// Transport cost per unit distance.
    pub transport_rate: f64,
    /// Per-period factor on production, import and transport costs.
    pub operating_decay: f64,
    pub revenue: f64,
    pub base_mean: NormalParams,
    /// Per-period factor on the base mean.
    pub demand_growth: f64,
    pub support_lower: f64,
    pub support_upper: f64,
    /// Mean deviation bound as a share of the base mean; derived from `target_sum` when absent.
    pub epsilon_factor: Option<f64>,
    pub lambda_scale: f64,
    pub target_sum: f64,
    pub conversion: f64,
    pub variant: MomentVariant,
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        Self {
            n_supply: 4,
            n_demand: 8,
            n_port: 1,
            n_periods: 3,
            seed: 0,
            setup_cost: NormalParams { mean: 4000.0, sd: 400.0 },
            capacity_cost: NormalParams { mean: 20.0, sd: 2.0 },
            investment_decay: 0.5,
            production_cost: 10.0,
            import_cost: 150.0,
            transport_rate: 0.5,
            operating_decay: 0.9,
            revenue: 100.0,
            base_mean: NormalParams { mean: 50.0, sd: 5.0 },
            demand_growth: 1.5,
            support_lower: 0.75,
            support_upper: 1.25,
            epsilon_factor: None,
            lambda_scale: 25.0,
            target_sum: 0.5,
            conversion: 1.0,
            variant: MomentVariant::Location,
        }
    }
}

impl GeneratorSpec {
    pub fn new(n_supply: usize, n_demand: usize, n_periods: usize, seed: u64) -> Self {
        Self {
            n_supply,
            n_demand,
            n_periods,
            seed,
            ..Self::default()
        }
    }

    /// Share of the base mean used as ε: wide enough that the mean band always meets the support.
    pub fn epsilon_share(&self) -> f64 {
        self.epsilon_factor.unwrap_or_else(|| (self.target_sum - 0.25).max(0.1))
    }

    pub fn check(&self) -> Result<()> {
        let mut bad = Vec::new();
        if self.n_supply == 0 || self.n_demand == 0 || self.n_port == 0 || self.n_periods == 0 {
            bad.push("node and period counts must be at least 1".to_string());
        }
        for (name, p) in [("setupCost", self.setup_cost), ("capacityCost", self.capacity_cost), ("baseMean", self.base_mean)] {
            if !(p.mean.is_finite() && p.sd >= 0.0 && p.sd.is_finite()) {
                bad.push(format!("{name} needs a finite mean and nonnegative sd"));
            }
        }
        for (name, r) in [
            ("investmentDecay", self.investment_decay),
            ("operatingDecay", self.operating_decay),
            ("demandGrowth", self.demand_growth),
        ] {
            if !(r > 0.0 && r <= 10.0) {
                bad.push(format!("{name} must lie in (0, 10]"));
            }
        }
        if !(self.support_lower >= 0.0 && self.support_lower <= self.support_upper) {
            bad.push("support factors need 0 <= lower <= upper".into());
        }
        if !(0.0..=1.0).contains(&self.target_sum) {
            bad.push("targetSum must lie in [0, 1]".into());
        }
        if !(self.lambda_scale > 0.0) {
            bad.push("lambdaScale must be positive".into());
        }
        if !(self.conversion > 0.0) {
            bad.push("conversion must be positive".into());
        }
        if self.epsilon_factor.is_some_and(|e| !(e >= 0.0)) {
            bad.push("epsilonFactor must be nonnegative".into());
        }
        for v in [self.production_cost, self.import_cost, self.transport_rate, self.revenue] {
            if !(v >= 0.0 && v.is_finite()) {
                bad.push("operating costs and revenue must be finite and nonnegative".into());
                break;
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidInput(bad.join("; ")))
        }
    }
}

fn draw(rng: &mut ChaCha8Rng, p: NormalParams) -> f64 {
    Normal::new(p.mean, p.sd).expect("checked parameters").sample(rng).max(0.0)
}

fn euclid(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

pub fn generate_random(spec: &GeneratorSpec) -> Result<NetworkInstance> {
    spec.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (ns, np, nd, nt) = (spec.n_supply, spec.n_port, spec.n_demand, spec.n_periods);
    let mut nodes = Vec::with_capacity(ns + np + nd);
    for (prefix, role, n) in [("S", NodeRole::Supply, ns), ("P", NodeRole::Port, np), ("D", NodeRole::Demand, nd)] {
        for k in 0..n {
            nodes.push(Node {
                id: format!("{prefix}{}", k + 1),
                role,
                coordinates: [rng.gen_range(0.0..=100.0), rng.gen_range(0.0..=100.0)],
                label: String::new(),
            });
        }
    }
    let at = |role: NodeRole| nodes.iter().filter(move |n| n.role == role).map(|n| n.coordinates);
    let demand_xy: Vec<[f64; 2]> = at(NodeRole::Demand).collect();
    let source_xy: Vec<[f64; 2]> = at(NodeRole::Supply).chain(at(NodeRole::Port)).collect();
    let distance: Grid = source_xy
        .iter()
        .map(|&s| demand_xy.iter().map(|&d| euclid(s, d)).collect())
        .collect();

    let decayed = |first: f64, rate: f64| -> Vec<f64> { (0..nt).map(|t| first * rate.powi(t as i32)).collect() };
    let setup: Grid = (0..ns).map(|_| decayed(draw(&mut rng, spec.setup_cost), spec.investment_decay)).collect();
    let capacity: Grid = (0..ns).map(|_| decayed(draw(&mut rng, spec.capacity_cost), spec.investment_decay)).collect();
    let base_mean: Grid = (0..nd).map(|_| decayed(draw(&mut rng, spec.base_mean), spec.demand_growth)).collect();

    let op = spec.operating_decay;
    let production = vec![decayed(spec.production_cost, op); ns];
    let import = vec![decayed(spec.import_cost, op); np];
    let transport: Vec<Grid> = distance
        .iter()
        .map(|row| row.iter().map(|&dist| decayed(spec.transport_rate * dist, op)).collect())
        .collect();
    let revenue = vec![vec![spec.revenue; nt]; nd];
    let scale = |f: f64| -> Grid { base_mean.iter().map(|row| row.iter().map(|m| f * m).collect()).collect() };
    let lower = scale(spec.support_lower);
    let upper = scale(spec.support_upper);
    let epsilon = scale(spec.epsilon_share());
    let final_upper: f64 = upper.iter().map(|row| row[nt - 1]).sum();
    let capacity_limit = vec![vec![final_upper / spec.conversion; nt]; ns];
    let lambda = lambda_from_distances(&distance[..ns].to_vec(), spec.lambda_scale, spec.target_sum)?;

    Ok(NetworkInstance {
        name: format!("random-s{ns}-d{nd}-p{np}-t{nt}-seed{}", spec.seed),
        nodes,
        periods: nt,
        period_labels: (1..=nt).map(|t| t.to_string()).collect(),
        conversion: spec.conversion,
        costs: CostSchedule {
            setup,
            capacity,
            production,
            import,
            transport,
            revenue,
            capacity_limit,
            distance,
        },
        support: SupportSet {
            lower,
            upper,
            kind: SupportKind::Continuous,
        },
        moment: MomentSpec {
            base_mean,
            epsilon,
            variant: spec.variant,
            lambda,
            bound: None,
            capacity: None,
        },
        big_m: None,
    })
}

/// Replaces the support of `instance` by `count` distinct box vertices: the all-lower and
/// all-upper corners plus random corners, so the list's hull contains the box centre.
pub fn with_vertex_support(instance: &NetworkInstance, count: usize, seed: u64) -> Result<NetworkInstance> {
    let nd = instance.n_demand();
    let nt = instance.periods;
    let cells = nd * nt;
    let max = if cells >= 63 { usize::MAX } else { 1usize << cells };
    if count < 2 || count > max {
        return Err(Error::InvalidInput(format!("need between 2 and {max} vertex scenarios")));
    }
    let (lo, hi) = (&instance.support.lower, &instance.support.upper);
    let corner = |pick: &dyn Fn(usize, usize) -> bool| -> Grid {
        (0..nd).map(|j| (0..nt).map(|t| if pick(j, t) { hi[j][t] } else { lo[j][t] }).collect()).collect()
    };
    let mut list: Vec<Grid> = vec![corner(&|_, _| false), corner(&|_, _| true)];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut attempts = 0;
    while list.len() < count {
        attempts += 1;
        let bits: Vec<bool> = (0..cells).map(|_| rng.gen_bool(0.5)).collect();
        let g = corner(&|j, t| bits[j * nt + t]);
        if !list.iter().any(|s| same_scenario(s, &g)) {
            list.push(g);
        } else if attempts > 100 * count {
            return Err(Error::InvalidInput("support too degenerate for distinct vertices".into()));
        }
    }
    // Interleave so the corners do not always sit first.
    list[2..].shuffle(&mut rng);
    let mut out = instance.clone();
    out.support.kind = SupportKind::Discrete(list.into_iter().map(|g| Scenario::new(g, ScenarioOrigin::Listed)).collect());
    Ok(out)
}
