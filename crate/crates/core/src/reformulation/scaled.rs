//! Instance data rescaled to solver-friendly magnitudes.
//!
//! Masses are divided by `mass` and money by `money`, so per-kg prices and the moment
//! duals are multiplied by `mass / money`. Capacities stay in MW.

use crate::model::{CapacityMoment, Grid, MomentVariant, NetworkInstance};

use super::bigm::BigMPolicy;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Units {
    pub mass: f64,
    pub money: f64,
}

fn pow10_floor(v: f64) -> f64 {
    if v > 0.0 && v.is_finite() {
        10f64.powf(v.log10().floor())
    } else {
        1.0
    }
}

impl Units {
    pub const IDENTITY: Units = Units { mass: 1.0, money: 1.0 };

    /// Picks powers of ten putting demand in the hundreds and unit prices near one.
    pub fn for_instance(instance: &NetworkInstance) -> Self {
        let max_demand = instance.support.upper.iter().flatten().fold(0.0f64, |a, &b| a.max(b));
        let mass = (pow10_floor(max_demand) / 100.0).max(1.0);
        let c = &instance.costs;
        let max_price = c
            .production
            .iter()
            .chain(&c.import)
            .chain(&c.revenue)
            .flatten()
            .fold(0.0f64, |a, &b| a.max(b));
        let money = mass * pow10_floor(max_price);
        Self { mass, money }
    }

    /// Factor turning a price per kg into a price per scaled mass unit in scaled money.
    pub fn price(&self) -> f64 {
        self.mass / self.money
    }
}

fn scale(grid: &Grid, f: f64) -> Grid {
    grid.iter().map(|row| row.iter().map(|v| v * f).collect()).collect()
}

/// Everything a model builder needs, already in scaled units.
#[derive(Debug, Clone)]
pub struct ScaledData {
    pub units: Units,
    pub ns: usize,
    pub np: usize,
    pub nd: usize,
    pub nt: usize,
    pub setup: Grid,
    pub capacity_cost: Grid,
    pub production: Grid,
    pub import: Grid,
    pub transport: Vec<Grid>,
    pub revenue: Grid,
    pub capacity_limit: Grid,
    pub conversion: f64,
    pub lower: Grid,
    pub upper: Grid,
    pub base_mean: Grid,
    pub epsilon: Grid,
    pub lambda: Grid,
    pub bound: Option<Grid>,
    pub capacity_moment: Option<CapacityMoment>,
    pub m_primal: Grid,
    pub m_flow: Vec<f64>,
    pub m_dual: f64,
    pub beta_bar1: Grid,
    pub beta_bar2: Grid,
}

impl ScaledData {
    pub fn new(instance: &NetworkInstance, big_m: &BigMPolicy) -> Self {
        Self::with_units(instance, big_m, Units::for_instance(instance))
    }

    pub fn with_units(instance: &NetworkInstance, big_m: &BigMPolicy, units: Units) -> Self {
        let c = &instance.costs;
        let price = units.price();
        let mass = 1.0 / units.mass;
        let money = 1.0 / units.money;
        Self {
            units,
            ns: instance.n_supply(),
            np: instance.n_ports(),
            nd: instance.n_demand(),
            nt: instance.periods,
            setup: scale(&c.setup, money),
            capacity_cost: scale(&c.capacity, money),
            production: scale(&c.production, price),
            import: scale(&c.import, price),
            transport: c.transport.iter().map(|g| scale(g, price)).collect(),
            revenue: scale(&c.revenue, price),
            capacity_limit: c.capacity_limit.clone(),
            conversion: instance.conversion * mass,
            lower: scale(&instance.support.lower, mass),
            upper: scale(&instance.support.upper, mass),
            base_mean: scale(&instance.moment.base_mean, mass),
            epsilon: scale(&instance.moment.epsilon, mass),
            lambda: instance.moment.lambda.clone(),
            bound: instance.moment.bound.clone(),
            capacity_moment: instance.moment.capacity.clone(),
            m_primal: scale(&big_m.m_primal, mass),
            m_flow: big_m.m_flow.iter().map(|v| v * mass).collect(),
            m_dual: big_m.m_dual * price,
            beta_bar1: scale(&big_m.beta_bar1, price),
            beta_bar2: scale(&big_m.beta_bar2, price),
        }
    }

    /// Number of sources (supply then ports).
    pub fn n_sources(&self) -> usize {
        self.ns + self.np
    }

    /// Largest number of capacity ranges used by `variant` (1 for location variants).
    pub fn range_count(&self, variant: MomentVariant, i: usize) -> usize {
        match (variant, &self.capacity_moment) {
            (MomentVariant::Capacity, Some(cap)) => cap.range_count(i),
            _ => 1,
        }
    }

    /// Impact coefficient of selector `(i, r)` on demand `j`.
    pub fn impact(&self, variant: MomentVariant, i: usize, r: usize, j: usize) -> f64 {
        match (variant, &self.capacity_moment) {
            (MomentVariant::Capacity, Some(cap)) => cap.lambda[i][j][r],
            _ => self.lambda[i][j],
        }
    }

    pub fn scenario_to_scaled(&self, demand: &Grid) -> Grid {
        scale(demand, 1.0 / self.units.mass)
    }

    pub fn scenario_from_scaled(&self, demand: &Grid) -> Grid {
        scale(demand, self.units.mass)
    }
}
