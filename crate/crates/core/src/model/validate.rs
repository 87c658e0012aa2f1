//! Structural and numeric checks on instances.

use std::collections::HashSet;
use std::fmt;

use super::instance::{Grid, MomentVariant, NetworkInstance, NodeRole, SupportKind};

/// One failed invariant, naming the field and the offending index.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub field: String,
    pub index: Vec<usize>,
    pub message: String,
}

impl Violation {
    fn new(field: &str, index: &[usize], message: impl Into<String>) -> Self {
        Self {
            field: field.to_string(),
            index: index.to_vec(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let idx: Vec<String> = self.index.iter().map(ToString::to_string).collect();
        write!(f, "{}({}): {}", self.field, idx.join(","), self.message)
    }
}

struct Checker {
    out: Vec<Violation>,
}

impl Checker {
    fn push(&mut self, field: &str, index: &[usize], message: impl Into<String>) {
        self.out.push(Violation::new(field, index, message));
    }

    /// Shape `rows × cols` with finite nonnegative entries.
    fn grid(&mut self, field: &str, grid: &Grid, rows: usize, cols: usize) -> bool {
        if grid.len() != rows {
            self.push(field, &[], format!("expected {rows} rows, found {}", grid.len()));
            return false;
        }
        let mut ok = true;
        for (r, row) in grid.iter().enumerate() {
            if row.len() != cols {
                self.push(field, &[r], format!("expected {cols} entries, found {}", row.len()));
                ok = false;
                continue;
            }
            for (c, &v) in row.iter().enumerate() {
                if !v.is_finite() || v < 0.0 {
                    self.push(field, &[r, c], format!("value {v} must be finite and nonnegative"));
                }
            }
        }
        ok
    }
}

/// All invariant violations of `instance`; empty iff it is well formed.
pub fn validate_instance(instance: &NetworkInstance) -> Vec<Violation> {
    let mut ck = Checker { out: Vec::new() };
    let (ns, np, nd, nt) = (
        instance.n_supply(),
        instance.n_ports(),
        instance.n_demand(),
        instance.periods,
    );

    let mut seen = HashSet::new();
    for (k, node) in instance.nodes.iter().enumerate() {
        if !seen.insert(node.id.as_str()) {
            ck.push("nodes", &[k], format!("duplicate id `{}`", node.id));
        }
        if node.coordinates.iter().any(|c| !c.is_finite()) {
            ck.push("nodes", &[k], "coordinates must be finite");
        }
    }
    for (role, count) in [
        (NodeRole::Supply, ns),
        (NodeRole::Port, np),
        (NodeRole::Demand, nd),
    ] {
        if count == 0 {
            ck.push("nodes", &[], format!("no {role:?} nodes"));
        }
    }
    if nt == 0 {
        ck.push("periods", &[], "at least one period required");
    }
    if instance.period_labels.len() != nt {
        ck.push("periods", &[], "one label per period required");
    }
    if !(instance.conversion > 0.0 && instance.conversion.is_finite()) {
        ck.push("conversion", &[], "must be positive");
    }
    if !ck.out.is_empty() {
        return ck.out;
    }

    let c = &instance.costs;
    ck.grid("costs.setup", &c.setup, ns, nt);
    ck.grid("costs.capacity", &c.capacity, ns, nt);
    ck.grid("costs.production", &c.production, ns, nt);
    ck.grid("costs.capacityLimit", &c.capacity_limit, ns, nt);
    ck.grid("costs.import", &c.import, np, nt);
    ck.grid("costs.revenue", &c.revenue, nd, nt);
    ck.grid("costs.distance", &c.distance, ns + np, nd);
    if c.transport.len() != ns + np {
        ck.push("costs.transport", &[], format!("expected {} sources", ns + np));
    } else {
        for (s, table) in c.transport.iter().enumerate() {
            ck.grid(&format!("costs.transport[{s}]"), table, nd, nt);
        }
    }

    let sup = &instance.support;
    let shaped = ck.grid("support.lower", &sup.lower, nd, nt) & ck.grid("support.upper", &sup.upper, nd, nt);
    if shaped {
        for j in 0..nd {
            for t in 0..nt {
                if sup.lower[j][t] > sup.upper[j][t] {
                    ck.push(
                        "SupportSet",
                        &[j, t],
                        format!("lower {} exceeds upper {}", sup.lower[j][t], sup.upper[j][t]),
                    );
                }
            }
        }
        if let SupportKind::Discrete(list) = &sup.kind {
            if list.is_empty() {
                ck.push("support.scenarios", &[], "discrete support needs at least one scenario");
            }
            for (k, s) in list.iter().enumerate() {
                if !s.within(&sup.lower, &sup.upper, 1e-9) {
                    ck.push("support.scenarios", &[k], "scenario outside [lower, upper] or misshaped");
                }
            }
        }
    }

    let m = &instance.moment;
    ck.grid("moment.baseMean", &m.base_mean, nd, nt);
    ck.grid("moment.epsilon", &m.epsilon, nd, nt);
    if ck.grid("moment.lambda", &m.lambda, ns, nd) {
        for (i, row) in m.lambda.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v > 1.0 {
                    ck.push("moment.lambda", &[i, j], format!("{v} exceeds 1"));
                }
            }
        }
    }
    if let Some(bound) = &m.bound {
        ck.grid("moment.bound", bound, nd, nt);
    } else if m.variant == MomentVariant::LocationBounded {
        ck.push("moment.bound", &[], "location-bounded variant needs a bound");
    }
    match &m.capacity {
        None if m.variant == MomentVariant::Capacity => {
            ck.push("moment.capacity", &[], "capacity variant needs ranges and impacts");
        }
        None => {}
        Some(cap) => check_capacity(&mut ck, instance, cap),
    }

    if let Some(bm) = &instance.big_m {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if bm.safety_factor.is_some_and(|f| !(f >= 1.0 && f.is_finite())) {
            ck.push("bigM.safetyFactor", &[], "must be at least 1");
        }
        if bm.m_dual.is_some_and(|v| !positive(v)) {
            ck.push("bigM.mDual", &[], "must be positive");
        }
        for (name, grid, rows) in [
            ("bigM.mPrimal", &bm.m_primal, ns),
            ("bigM.betaBar1", &bm.beta_bar1, nd),
            ("bigM.betaBar2", &bm.beta_bar2, nd),
        ] {
            if let Some(g) = grid {
                if ck.grid(name, g, rows, nt) {
                    for (r, row) in g.iter().enumerate() {
                        for (t, &v) in row.iter().enumerate() {
                            if !positive(v) {
                                ck.push(name, &[r, t], "must be positive");
                            }
                        }
                    }
                }
            }
        }
        if let Some(flow) = &bm.m_flow {
            if flow.len() != nt || flow.iter().any(|&v| !positive(v)) {
                ck.push("bigM.mFlow", &[], "one positive value per period required");
            }
        }
    }
    ck.out
}

fn check_capacity(ck: &mut Checker, instance: &NetworkInstance, cap: &super::instance::CapacityMoment) {
    let (ns, nd, nt) = (instance.n_supply(), instance.n_demand(), instance.periods);
    if cap.ranges.len() != ns || cap.lambda.len() != ns {
        ck.push("moment.capacity", &[], format!("expected {ns} supply rows"));
        return;
    }
    for i in 0..ns {
        let nr = cap.range_count(i);
        if cap.lambda[i].len() != nd || nr == 0 {
            ck.push("moment.capacity.lambda", &[i], "misshaped impact table");
            continue;
        }
        for j in 0..nd {
            let row = &cap.lambda[i][j];
            if row.len() != nr {
                ck.push("moment.capacity.lambda", &[i, j], "range count differs");
                continue;
            }
            for r in 0..nr {
                if !(0.0..=1.0).contains(&row[r]) {
                    ck.push("moment.capacity.lambda", &[i, j, r], "must lie in [0, 1]");
                }
                if r > 0 && row[r] < row[r - 1] {
                    ck.push("moment.capacity.lambda", &[i, j, r], "must be nondecreasing in range");
                }
            }
        }
        if cap.ranges[i].len() != nt {
            ck.push("moment.capacity.ranges", &[i], format!("expected {nt} periods"));
            continue;
        }
        let mut cumulative_limit = 0.0;
        for t in 0..nt {
            cumulative_limit += instance.costs.capacity_limit[i][t];
            let ranges = &cap.ranges[i][t];
            if ranges.len() != nr {
                ck.push("moment.capacity.ranges", &[i, t], format!("expected {nr} ranges"));
                continue;
            }
            let mut bad = ranges[0].lower != 0.0;
            for r in 0..nr {
                let upper = ranges[r].upper.unwrap_or(f64::INFINITY);
                if !(ranges[r].lower <= upper) {
                    bad = true;
                }
                if r + 1 < nr {
                    // Consecutive ranges may share an endpoint but not overlap or leave gaps.
                    if ranges[r].upper != Some(ranges[r + 1].lower) {
                        bad = true;
                    }
                }
            }
            if ranges[nr - 1].upper.is_some_and(|u| u < cumulative_limit) {
                bad = true;
            }
            if bad {
                ck.push(
                    "moment.capacity.ranges",
                    &[i, t],
                    "ranges must be ordered, disjoint and cover [0, cumulative limit]",
                );
            }
        }
    }
}
