//! Instance files: JSON with `schema: 1`, tables keyed by node id.

use std::path::Path;

use indexmap::IndexMap;
use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    validate_instance, BigMOverrides, CapacityMoment, CapacityRange, CostSchedule, Grid, MomentSpec, MomentVariant,
    NetworkInstance, Node, Scenario, ScenarioOrigin, SupportKind, SupportSet,
};

pub const SCHEMA_VERSION: u64 = 1;

type Series = IndexMap<String, Vec<f64>>;
type Table<T> = IndexMap<String, IndexMap<String, T>>;

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct PeriodsDoc {
    count: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    labels: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct CostsDoc {
    setup: Series,
    capacity: Series,
    production: Series,
    import: Series,
    transport: Table<Vec<f64>>,
    revenue: Series,
    capacity_limit: Series,
    distance: Table<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct SupportDoc {
    lower: Series,
    upper: Series,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scenarios: Option<Vec<Series>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct CapacityDoc {
    ranges: IndexMap<String, Vec<Vec<CapacityRange>>>,
    lambda: Table<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct MomentDoc {
    variant: MomentVariant,
    base_mean: Series,
    epsilon: Series,
    lambda: Table<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bound: Option<Series>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    capacity: Option<CapacityDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct InstanceDoc {
    schema: Option<u64>,
    #[serde(default)]
    name: String,
    nodes: Option<Vec<Node>>,
    periods: Option<PeriodsDoc>,
    conversion: Option<f64>,
    costs: Option<CostsDoc>,
    support: Option<SupportDoc>,
    moment: Option<MomentDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    big_m: Option<BigMOverrides>,
    /// Provenance written by tools; not part of the instance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    manifest: Option<serde_json::Value>,
}

fn series(ids: &[&str], grid: &Grid) -> Series {
    ids.iter().zip(grid).map(|(id, row)| (id.to_string(), row.clone())).collect()
}

fn table<T: Clone>(rows: &[&str], cols: &[&str], get: impl Fn(usize, usize) -> T) -> Table<T> {
    rows.iter()
        .enumerate()
        .map(|(r, rid)| {
            let inner = cols.iter().enumerate().map(|(c, cid)| (cid.to_string(), get(r, c))).collect();
            (rid.to_string(), inner)
        })
        .collect()
}

fn to_doc(x: &NetworkInstance) -> InstanceDoc {
    let supply = x.supply_ids();
    let ports = x.port_ids();
    let demand = x.demand_ids();
    let sources = x.source_ids();
    let c = &x.costs;
    let m = &x.moment;
    InstanceDoc {
        schema: Some(SCHEMA_VERSION),
        name: x.name.clone(),
        nodes: Some(x.nodes.clone()),
        periods: Some(PeriodsDoc {
            count: x.periods,
            labels: x.period_labels.clone(),
        }),
        conversion: Some(x.conversion),
        costs: Some(CostsDoc {
            setup: series(&supply, &c.setup),
            capacity: series(&supply, &c.capacity),
            production: series(&supply, &c.production),
            import: series(&ports, &c.import),
            transport: table(&sources, &demand, |s, j| c.transport[s][j].clone()),
            revenue: series(&demand, &c.revenue),
            capacity_limit: series(&supply, &c.capacity_limit),
            distance: table(&sources, &demand, |s, j| c.distance[s][j]),
        }),
        support: Some(SupportDoc {
            lower: series(&demand, &x.support.lower),
            upper: series(&demand, &x.support.upper),
            scenarios: match &x.support.kind {
                SupportKind::Continuous => None,
                SupportKind::Discrete(list) => Some(list.iter().map(|s| series(&demand, &s.demand)).collect()),
            },
        }),
        moment: Some(MomentDoc {
            variant: m.variant,
            base_mean: series(&demand, &m.base_mean),
            epsilon: series(&demand, &m.epsilon),
            lambda: table(&supply, &demand, |i, j| m.lambda[i][j]),
            bound: m.bound.as_ref().map(|b| series(&demand, b)),
            capacity: m.capacity.as_ref().map(|cap| CapacityDoc {
                ranges: supply.iter().zip(&cap.ranges).map(|(id, r)| (id.to_string(), r.clone())).collect(),
                lambda: table(&supply, &demand, |i, j| cap.lambda[i][j].clone()),
            }),
        }),
        big_m: x.big_m.clone(),
        manifest: None,
    }
}

fn lookup<'a, T>(map: &'a IndexMap<String, T>, id: &str, section: &str) -> Result<&'a T> {
    map.get(id)
        .ok_or_else(|| Error::Parse(format!("`{section}` has no entry for node `{id}`")))
}

fn grid(map: &Series, ids: &[&str], section: &str) -> Result<Grid> {
    ids.iter().map(|id| lookup(map, id, section).cloned()).collect()
}

fn nested<T: Clone>(map: &Table<T>, rows: &[&str], cols: &[&str], section: &str) -> Result<Vec<Vec<T>>> {
    rows.iter()
        .map(|r| {
            let inner = lookup(map, r, section)?;
            cols.iter().map(|c| lookup(inner, c, section).cloned()).collect()
        })
        .collect()
}

fn from_doc(doc: InstanceDoc) -> Result<NetworkInstance> {
    match doc.schema {
        Some(SCHEMA_VERSION) => {}
        Some(found) => {
            return Err(Error::SchemaVersion {
                found,
                expected: SCHEMA_VERSION,
            })
        }
        None => return Err(Error::MissingSection("schema".into())),
    }
    let missing = |s: &str| Error::MissingSection(s.to_string());
    let nodes = doc.nodes.ok_or_else(|| missing("nodes"))?;
    let periods = doc.periods.ok_or_else(|| missing("periods"))?;
    let conversion = doc.conversion.ok_or_else(|| missing("conversion"))?;
    let costs = doc.costs.ok_or_else(|| missing("costs"))?;
    let support = doc.support.ok_or_else(|| missing("support"))?;
    let moment = doc.moment.ok_or_else(|| missing("moment"))?;

    let mut x = NetworkInstance {
        name: doc.name,
        nodes,
        periods: periods.count,
        period_labels: periods.labels,
        conversion,
        costs: CostSchedule {
            setup: Vec::new(),
            capacity: Vec::new(),
            production: Vec::new(),
            import: Vec::new(),
            transport: Vec::new(),
            revenue: Vec::new(),
            capacity_limit: Vec::new(),
            distance: Vec::new(),
        },
        support: SupportSet {
            lower: Vec::new(),
            upper: Vec::new(),
            kind: SupportKind::Continuous,
        },
        moment: MomentSpec {
            base_mean: Vec::new(),
            epsilon: Vec::new(),
            variant: moment.variant,
            lambda: Vec::new(),
            bound: None,
            capacity: None,
        },
        big_m: doc.big_m,
    };
    let supply = x.supply_ids();
    let ports = x.port_ids();
    let demand = x.demand_ids();
    let sources = x.source_ids();
    let c = CostSchedule {
        setup: grid(&costs.setup, &supply, "costs.setup")?,
        capacity: grid(&costs.capacity, &supply, "costs.capacity")?,
        production: grid(&costs.production, &supply, "costs.production")?,
        import: grid(&costs.import, &ports, "costs.import")?,
        transport: nested(&costs.transport, &sources, &demand, "costs.transport")?,
        revenue: grid(&costs.revenue, &demand, "costs.revenue")?,
        capacity_limit: grid(&costs.capacity_limit, &supply, "costs.capacityLimit")?,
        distance: nested(&costs.distance, &sources, &demand, "costs.distance")?,
    };
    let kind = match &support.scenarios {
        None => SupportKind::Continuous,
        Some(list) => SupportKind::Discrete(
            list.iter()
                .map(|s| Ok(Scenario::new(grid(s, &demand, "support.scenarios")?, ScenarioOrigin::Listed)))
                .collect::<Result<_>>()?,
        ),
    };
    let s = SupportSet {
        lower: grid(&support.lower, &demand, "support.lower")?,
        upper: grid(&support.upper, &demand, "support.upper")?,
        kind,
    };
    let m = MomentSpec {
        base_mean: grid(&moment.base_mean, &demand, "moment.baseMean")?,
        epsilon: grid(&moment.epsilon, &demand, "moment.epsilon")?,
        variant: moment.variant,
        lambda: nested(&moment.lambda, &supply, &demand, "moment.lambda")?,
        bound: moment.bound.as_ref().map(|b| grid(b, &demand, "moment.bound")).transpose()?,
        capacity: moment
            .capacity
            .as_ref()
            .map(|cap| -> Result<CapacityMoment> {
                Ok(CapacityMoment {
                    ranges: supply
                        .iter()
                        .map(|id| lookup(&cap.ranges, id, "moment.capacity.ranges").cloned())
                        .collect::<Result<_>>()?,
                    lambda: nested(&cap.lambda, &supply, &demand, "moment.capacity.lambda")?,
                })
            })
            .transpose()?,
    };
    x.costs = c;
    x.support = s;
    x.moment = m;
    Ok(x)
}

pub fn instance_to_json(instance: &NetworkInstance) -> String {
    instance_to_json_with_manifest(instance, None)
}

/// As [`instance_to_json`], embedding a provenance record under `manifest`.
pub fn instance_to_json_with_manifest(instance: &NetworkInstance, manifest: Option<serde_json::Value>) -> String {
    let mut doc = to_doc(instance);
    doc.manifest = manifest;
    let mut text = serde_json::to_string_pretty(&doc).expect("instance documents always serialize");
    text.push('\n');
    text
}

/// Parses an instance document, returning it with the paths of ignored keys.
/// The instance is validated.
pub fn instance_from_json(text: &str) -> Result<(NetworkInstance, Vec<String>)> {
    let mut ignored = Vec::new();
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: InstanceDoc =
        serde_ignored::deserialize(de, |path| ignored.push(path.to_string())).map_err(|e| Error::Parse(e.to_string()))?;
    let instance = from_doc(doc)?;
    let violations = validate_instance(&instance);
    if !violations.is_empty() {
        return Err(Error::Validation(violations));
    }
    Ok((instance, ignored))
}

pub fn save_instance(instance: &NetworkInstance, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, instance_to_json(instance)).map_err(|e| Error::io(path, e))
}

/// Loads and validates an instance file. Unknown keys are logged as warnings.
pub fn load_instance(path: impl AsRef<Path>) -> Result<NetworkInstance> {
    let (instance, ignored) = load_instance_with_warnings(path)?;
    for key in ignored {
        warn!("ignoring unknown key `{key}`");
    }
    Ok(instance)
}

pub fn load_instance_with_warnings(path: impl AsRef<Path>) -> Result<(NetworkInstance, Vec<String>)> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    instance_from_json(&text).map_err(|e| e.context(path.display().to_string()))
}
