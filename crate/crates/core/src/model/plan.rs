//! Decisions and realizations: investment plans, scenarios, operations and dual values.

use serde::{Deserialize, Serialize};

use super::instance::{Grid, NetworkInstance};

/// Where a scenario came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "index")]
pub enum ScenarioOrigin {
    Pregenerated,
    Iteration(usize),
    Sampled,
    Listed,
}

/// One demand realization `[demand][period]` in kg.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub demand: Grid,
    pub origin: ScenarioOrigin,
}

impl Scenario {
    pub fn new(demand: Grid, origin: ScenarioOrigin) -> Self {
        Self { demand, origin }
    }

    /// Componentwise equality within `tol`.
    pub fn same_demand(&self, other: &Scenario, tol: f64) -> bool {
        self.demand.len() == other.demand.len()
            && self.demand.iter().zip(&other.demand).all(|(a, b)| {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
            })
    }

    pub fn within(&self, lower: &Grid, upper: &Grid, tol: f64) -> bool {
        self.demand.len() == lower.len()
            && self.demand.iter().enumerate().all(|(j, row)| {
                row.len() == lower[j].len()
                    && row
                        .iter()
                        .enumerate()
                        .all(|(t, &v)| v >= lower[j][t] - tol && v <= upper[j][t] + tol)
            })
    }
}

/// First-stage decisions. `open[i][t]` and `capacity[i][t]` follow the supply order;
/// `range[i][t]` is the selected capacity range for the capacity-based moment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvestmentPlan {
    pub open: Vec<Vec<bool>>,
    pub capacity: Grid,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<Vec<Vec<usize>>>,
}

impl InvestmentPlan {
    pub fn empty(n_supply: usize, periods: usize) -> Self {
        Self {
            open: vec![vec![false; periods]; n_supply],
            capacity: vec![vec![0.0; periods]; n_supply],
            range: None,
        }
    }

    pub fn x(&self, i: usize, t: usize) -> f64 {
        if self.open[i][t] {
            1.0
        } else {
            0.0
        }
    }

    /// Installed capacity at `i` up to and including period `t` (MW).
    pub fn cumulative(&self, i: usize, t: usize) -> f64 {
        self.capacity[i][..=t].iter().sum()
    }

    /// Total capacity installed over the horizon (MW).
    pub fn total_capacity(&self) -> f64 {
        self.capacity.iter().flatten().sum()
    }

    /// Setup plus capacity cost: `Σ c^F (x_t − x_{t−1}) + c^V y`.
    pub fn investment_cost(&self, instance: &NetworkInstance) -> f64 {
        let c = &instance.costs;
        let mut total = 0.0;
        for (i, row) in self.open.iter().enumerate() {
            let mut prev = 0.0;
            for t in 0..row.len() {
                let x = self.x(i, t);
                total += c.setup[i][t] * (x - prev) + c.capacity[i][t] * self.capacity[i][t];
                prev = x;
            }
        }
        total
    }

    /// Violations of the plan invariants against an instance.
    pub fn check(&self, instance: &NetworkInstance) -> Vec<String> {
        let (ns, nt) = (instance.n_supply(), instance.periods);
        let mut out = Vec::new();
        if self.open.len() != ns || self.capacity.len() != ns {
            out.push(format!("plan has {} supply rows, instance has {ns}", self.open.len()));
            return out;
        }
        for i in 0..ns {
            if self.open[i].len() != nt || self.capacity[i].len() != nt {
                out.push(format!("plan row {i} has wrong period count"));
                continue;
            }
            for t in 0..nt {
                let y = self.capacity[i][t];
                let limit = instance.costs.capacity_limit[i][t] * self.x(i, t);
                if y < -1e-9 || y > limit + 1e-6 * limit.max(1.0) {
                    out.push(format!("capacity({i},{t}) = {y} outside [0, {limit}]"));
                }
                if t > 0 && self.open[i][t - 1] && !self.open[i][t] {
                    out.push(format!("open({i},{t}) closes a site opened earlier"));
                }
            }
        }
        if let (Some(range), Some(cap)) = (&self.range, &instance.moment.capacity) {
            for i in 0..ns {
                for t in 0..nt {
                    let Some(&r) = range.get(i).and_then(|row| row.get(t)) else {
                        out.push(format!("range({i},{t}) missing"));
                        continue;
                    };
                    match cap.ranges[i][t].get(r) {
                        Some(bounds) if bounds.contains(self.cumulative(i, t), 1e-6) => {}
                        Some(_) => out.push(format!("range({i},{t}) does not contain cumulative capacity")),
                        None => out.push(format!("range({i},{t}) index {r} out of range")),
                    }
                }
            }
        }
        out
    }
}

/// Second-stage decisions for one scenario (kg).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperationalPlan {
    /// `[supply][period]`
    pub production: Grid,
    /// `[port][period]`
    pub import: Grid,
    /// `[source][demand][period]`
    pub flow: Vec<Grid>,
}

/// Products of a binary selector with a dual, indexed `[supply][range]` then `[demand][period]`.
/// Location variants use a single range.
pub type Products = Vec<Vec<Grid>>;

/// Dual variables of the inner moment problem at a master solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualMomentVars {
    /// One entry per period with per-period cuts, otherwise a single entry.
    pub alpha: Vec<f64>,
    pub beta1: Grid,
    pub beta2: Grid,
    pub phi1: Products,
    pub phi2: Products,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upsilon1: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upsilon2: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap_active: Option<Vec<Vec<bool>>>,
}

/// Dual values of the second stage for one period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubproblemDualVars {
    /// `[supply]`
    pub nu: Vec<f64>,
    pub tau: Vec<f64>,
    /// `[port]`
    pub eta: Vec<f64>,
    /// `[demand]`
    pub psi: Vec<f64>,
}
