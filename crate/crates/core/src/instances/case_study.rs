//! The Northern Netherlands case: 5 electrolyser sites, 1 import port, 13 demand clusters.

use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    lambda_from_distances, CostSchedule, Grid, MomentSpec, MomentVariant, NetworkInstance, Node, NodeRole, SupportKind,
    SupportSet,
};

/// Hours per year over the electricity needed per kg (55 kWh/kg), in kg per MW-year.
pub const DEFAULT_CONVERSION: f64 = 8760.0 * 1000.0 / 55.0;

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
struct SourceRow {
    id: String,
    role: NodeRole,
    city: String,
    coordinates: [f64; 2],
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
struct DemandRow {
    id: String,
    city: String,
    coordinates: [f64; 2],
    cluster: String,
    demand2030: f64,
    demand2050: f64,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
struct CostRow {
    setup: f64,
    capacity_per_kw: [f64; 2],
    production: [f64; 2],
    transport_per_kg_km: [f64; 2],
    revenue_markup: f64,
    import_premium: [f64; 2],
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
struct CaseFile {
    name: String,
    years: Vec<u32>,
    sources: Vec<SourceRow>,
    demands: Vec<DemandRow>,
    distance_km: IndexMap<String, IndexMap<String, f64>>,
    costs: CostRow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct CaseStudyOptions {
    pub target_sum: f64,
    pub lambda_scale: f64,
    /// Import cost over production cost in the last year.
    pub import_premium_2050: f64,
    /// Keep only these years; all years when absent.
    pub years: Option<Vec<u32>>,
    /// Capacity that may be added per site and period, MW.
    pub capacity_limit: f64,
    pub conversion: f64,
    /// Weight of one period's operations relative to one year.
    pub operating_years: f64,
    pub epsilon_factor: f64,
    pub variant: MomentVariant,
}

impl Default for CaseStudyOptions {
    fn default() -> Self {
        Self {
            target_sum: 0.25,
            lambda_scale: 25.0,
            import_premium_2050: 1.3,
            years: None,
            capacity_limit: 2500.0,
            conversion: DEFAULT_CONVERSION,
            operating_years: 1.0,
            epsilon_factor: 0.1,
            variant: MomentVariant::Location,
        }
    }
}

/// The shipped data file `data/heavenn.json`.
pub fn default_case_study_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/heavenn.json")
}

/// Linear interpolation between the first- and last-year values, weighted so the
/// endpoints are reproduced exactly.
fn interpolate(ends: [f64; 2], year: u32, first: u32, last: u32) -> f64 {
    if last == first {
        return ends[0];
    }
    let w = (year - first) as f64 / (last - first) as f64;
    ends[0] * (1.0 - w) + ends[1] * w
}

pub fn load_case_study(path: impl AsRef<Path>, options: &CaseStudyOptions) -> Result<NetworkInstance> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: CaseFile = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    build(file, options).map_err(|e| e.context(path.display().to_string()))
}

fn build(file: CaseFile, o: &CaseStudyOptions) -> Result<NetworkInstance> {
    let (&first, &last) = match (file.years.first(), file.years.last()) {
        (Some(a), Some(b)) if a <= b => (a, b),
        _ => return Err(Error::Parse("case file needs increasing years".into())),
    };
    let years: Vec<u32> = match &o.years {
        None => file.years.clone(),
        Some(keep) => {
            if keep.is_empty() || keep.iter().any(|y| !file.years.contains(y)) || keep.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidInput(format!("years {keep:?} must be an increasing subset of {:?}", file.years)));
            }
            keep.clone()
        }
    };
    if !(o.operating_years > 0.0 && o.conversion > 0.0 && o.capacity_limit > 0.0 && o.import_premium_2050 > 0.0) {
        return Err(Error::InvalidInput("case-study options must be positive".into()));
    }
    let nt = years.len();
    let at = |ends: [f64; 2]| -> Vec<f64> { years.iter().map(|&y| interpolate(ends, y, first, last)).collect() };

    let mut nodes: Vec<Node> = Vec::new();
    let mut supply = Vec::new();
    let mut ports = Vec::new();
    for s in &file.sources {
        match s.role {
            NodeRole::Supply => supply.push(s),
            NodeRole::Port => ports.push(s),
            NodeRole::Demand => return Err(Error::Parse(format!("source `{}` has the demand role", s.id))),
        }
    }
    for s in supply.iter().chain(&ports) {
        nodes.push(Node {
            id: s.id.clone(),
            role: s.role,
            coordinates: s.coordinates,
            label: s.city.clone(),
        });
    }
    for d in &file.demands {
        nodes.push(Node {
            id: d.id.clone(),
            role: NodeRole::Demand,
            coordinates: d.coordinates,
            label: format!("{} ({})", d.cluster, d.city),
        });
    }
    let distance: Grid = supply
        .iter()
        .chain(&ports)
        .map(|s| {
            let row = file
                .distance_km
                .get(&s.id)
                .ok_or_else(|| Error::Parse(format!("no distances for `{}`", s.id)))?;
            file.demands
                .iter()
                .map(|d| row.get(&d.id).copied().ok_or_else(|| Error::Parse(format!("no distance {} -> {}", s.id, d.id))))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;

    let c = &file.costs;
    let ops = o.operating_years;
    let production = at(c.production);
    let premium = at([c.import_premium[0], o.import_premium_2050]);
    let import: Vec<f64> = production.iter().zip(&premium).map(|(p, k)| p * k).collect();
    let revenue: Vec<f64> = production.iter().map(|p| p * c.revenue_markup).collect();
    let rate = at(c.transport_per_kg_km);
    let capacity: Vec<f64> = at(c.capacity_per_kw).iter().map(|v| v * 1000.0).collect();
    let weigh = |v: &Vec<f64>| -> Vec<f64> { v.iter().map(|x| x * ops).collect() };
    let ns = supply.len();
    let costs = CostSchedule {
        setup: vec![vec![c.setup; nt]; ns],
        capacity: vec![capacity; ns],
        production: vec![weigh(&production); ns],
        import: vec![weigh(&import); ports.len()],
        transport: distance
            .iter()
            .map(|row| row.iter().map(|&km| rate.iter().map(|r| r * km * ops).collect()).collect())
            .collect(),
        revenue: vec![weigh(&revenue); file.demands.len()],
        capacity_limit: vec![vec![o.capacity_limit; nt]; ns],
        distance: distance.clone(),
    };
    let base_mean: Grid = file
        .demands
        .iter()
        .map(|d| at([d.demand2030 * 1000.0, d.demand2050 * 1000.0]))
        .collect();
    let scale = |f: f64| -> Grid { base_mean.iter().map(|row| row.iter().map(|m| f * m).collect()).collect() };
    let lambda = lambda_from_distances(&distance[..ns].to_vec(), o.lambda_scale, o.target_sum)?;
    Ok(NetworkInstance {
        name: file.name,
        nodes,
        periods: nt,
        period_labels: years.iter().map(ToString::to_string).collect(),
        conversion: o.conversion,
        costs,
        support: SupportSet {
            lower: scale(0.75),
            upper: scale(1.25),
            kind: SupportKind::Continuous,
        },
        moment: MomentSpec {
            epsilon: scale(o.epsilon_factor),
            base_mean,
            variant: o.variant,
            lambda,
            bound: None,
            capacity: None,
        },
        big_m: None,
    })
}
