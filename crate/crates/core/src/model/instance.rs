//! Network instance data: nodes, cost schedules, demand support and moment data.

use serde::{Deserialize, Serialize};

use super::plan::Scenario;

/// Dense table indexed `[row][period]` (or `[source][demand]` for distances).
pub type Grid = Vec<Vec<f64>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeRole {
    Supply,
    Port,
    Demand,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    pub role: NodeRole,
    /// Planar position for generated instances, (latitude, longitude) for the case study.
    pub coordinates: [f64; 2],
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub label: String,
}

/// Per-period costs. Supply-indexed tables follow the order of supply nodes,
/// `transport` and `distance` index sources as all supply nodes followed by all ports.
#[derive(Debug, Clone, PartialEq)]
pub struct CostSchedule {
    pub setup: Grid,
    /// Currency per MW.
    pub capacity: Grid,
    /// Currency per kg.
    pub production: Grid,
    pub import: Grid,
    /// `[source][demand][period]`, currency per kg.
    pub transport: Vec<Grid>,
    pub revenue: Grid,
    /// Maximum capacity added per period, MW.
    pub capacity_limit: Grid,
    /// `[source][demand]` in km.
    pub distance: Grid,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SupportKind {
    Continuous,
    Discrete(Vec<Scenario>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupportSet {
    pub lower: Grid,
    pub upper: Grid,
    pub kind: SupportKind,
}

impl SupportSet {
    pub fn is_discrete(&self) -> bool {
        matches!(self.kind, SupportKind::Discrete(_))
    }
}

/// Cumulative-capacity interval `[lower, upper]` in MW; `upper = None` is open ended.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityRange {
    pub lower: f64,
    pub upper: Option<f64>,
}

impl CapacityRange {
    pub fn contains(&self, value: f64, tol: f64) -> bool {
        value >= self.lower - tol && self.upper.map_or(true, |u| value <= u + tol)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityMoment {
    /// `[supply][period][range]`
    pub ranges: Vec<Vec<Vec<CapacityRange>>>,
    /// `[supply][demand][range]`
    pub lambda: Vec<Grid>,
}

impl CapacityMoment {
    pub fn range_count(&self, i: usize) -> usize {
        self.lambda.get(i).and_then(|row| row.first()).map_or(0, Vec::len)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MomentVariant {
    Location,
    LocationBounded,
    Capacity,
}

impl std::str::FromStr for MomentVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "location" => Ok(Self::Location),
            "location-bounded" => Ok(Self::LocationBounded),
            "capacity" => Ok(Self::Capacity),
            other => Err(format!("unknown moment variant `{other}`")),
        }
    }
}

impl std::fmt::Display for MomentVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Location => "location",
            Self::LocationBounded => "location-bounded",
            Self::Capacity => "capacity",
        })
    }
}

/// Mean-demand model. `lambda` is the location impact `[supply][demand]`,
/// `bound` the cap on the relative uplift `[demand][period]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSpec {
    pub base_mean: Grid,
    pub epsilon: Grid,
    pub variant: MomentVariant,
    pub lambda: Grid,
    pub bound: Option<Grid>,
    pub capacity: Option<CapacityMoment>,
}

impl MomentSpec {
    /// Whether the uplift is capped for the given variant.
    pub fn is_bounded(&self, variant: MomentVariant) -> bool {
        match variant {
            MomentVariant::Location => false,
            MomentVariant::LocationBounded => true,
            MomentVariant::Capacity => self.bound.is_some(),
        }
    }

    pub fn lambda_is_zero(&self) -> bool {
        let loc = self.lambda.iter().flatten().all(|&v| v == 0.0);
        let cap = self
            .capacity
            .as_ref()
            .map_or(true, |c| c.lambda.iter().flatten().flatten().all(|&v| v == 0.0));
        loc && cap
    }
}

/// Optional big-M overrides carried by an instance file. Any value given wins verbatim.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct BigMOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub safety_factor: Option<f64>,
    /// `[supply][period]`, kg.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_primal: Option<Grid>,
    /// `[period]`, kg.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_flow: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_dual: Option<f64>,
    /// `[demand][period]`
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_bar1: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_bar2: Option<Grid>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkInstance {
    pub name: String,
    pub nodes: Vec<Node>,
    pub periods: usize,
    pub period_labels: Vec<String>,
    /// kg of hydrogen producible per MW of electrolysis per period.
    pub conversion: f64,
    pub costs: CostSchedule,
    pub support: SupportSet,
    pub moment: MomentSpec,
    pub big_m: Option<BigMOverrides>,
}

impl NetworkInstance {
    fn ids(&self, role: NodeRole) -> Vec<&str> {
        self.nodes
            .iter()
            .filter(|n| n.role == role)
            .map(|n| n.id.as_str())
            .collect()
    }

    pub fn supply_ids(&self) -> Vec<&str> {
        self.ids(NodeRole::Supply)
    }

    pub fn port_ids(&self) -> Vec<&str> {
        self.ids(NodeRole::Port)
    }

    pub fn demand_ids(&self) -> Vec<&str> {
        self.ids(NodeRole::Demand)
    }

    /// Supply ids followed by port ids, the order of the transport table.
    pub fn source_ids(&self) -> Vec<&str> {
        let mut ids = self.supply_ids();
        ids.extend(self.port_ids());
        ids
    }

    pub fn n_supply(&self) -> usize {
        self.nodes.iter().filter(|n| n.role == NodeRole::Supply).count()
    }

    pub fn n_ports(&self) -> usize {
        self.nodes.iter().filter(|n| n.role == NodeRole::Port).count()
    }

    pub fn n_demand(&self) -> usize {
        self.nodes.iter().filter(|n| n.role == NodeRole::Demand).count()
    }

    /// Transport cost from source `s` (supply first, then ports) to demand `j`.
    pub fn transport(&self, s: usize, j: usize, t: usize) -> f64 {
        self.costs.transport[s][j][t]
    }

    /// Copy with every decision-dependency coefficient set to zero.
    pub fn without_dependency(&self) -> Self {
        let mut out = self.clone();
        for v in out.moment.lambda.iter_mut().flatten() {
            *v = 0.0;
        }
        if let Some(cap) = out.moment.capacity.as_mut() {
            for v in cap.lambda.iter_mut().flatten().flatten() {
                *v = 0.0;
            }
        }
        out
    }
}
