use serde::{Deserialize, Serialize};

use crate::model::{Grid, NetworkInstance};

pub const DEFAULT_SAFETY_FACTOR: f64 = 1.1;

/// Big-M constants, in instance units.
///
/// `m_primal[i][t]` bounds the capacity slack `Y − h`, `m_flow[t]` bounds production,
/// import and flows, `m_dual` bounds second-stage duals and their reduced costs, and
/// `beta_bar*` bound the moment duals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BigMPolicy {
    pub safety_factor: f64,
    pub m_primal: Grid,
    pub m_flow: Vec<f64>,
    pub m_dual: f64,
    pub beta_bar1: Grid,
    pub beta_bar2: Grid,
    /// Entries that came out nonpositive and were replaced by the 1.0 floor.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub floored: Vec<String>,
}

impl BigMPolicy {
    /// Entries that break the positivity invariant.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let bad = |v: f64| !(v > 0.0 && v.is_finite());
        for (name, grid) in [
            ("mPrimal", &self.m_primal),
            ("betaBar1", &self.beta_bar1),
            ("betaBar2", &self.beta_bar2),
        ] {
            for (r, row) in grid.iter().enumerate() {
                for (t, &v) in row.iter().enumerate() {
                    if bad(v) {
                        out.push(format!("{name}({r},{t}) = {v}"));
                    }
                }
            }
        }
        for (t, &v) in self.m_flow.iter().enumerate() {
            if bad(v) {
                out.push(format!("mFlow({t}) = {v}"));
            }
        }
        if bad(self.m_dual) {
            out.push(format!("mDual = {}", self.m_dual));
        }
        out
    }
}

fn floor(v: f64, what: String, floored: &mut Vec<String>) -> f64 {
    if v > 0.0 {
        v
    } else {
        floored.push(what);
        1.0
    }
}

/// Big-M constants derived from instance data, with instance overrides applied verbatim.
pub fn default_big_m(instance: &NetworkInstance) -> BigMPolicy {
    let c = &instance.costs;
    let (ns, np, nd, nt) = (
        instance.n_supply(),
        instance.n_ports(),
        instance.n_demand(),
        instance.periods,
    );
    let overrides = instance.big_m.clone().unwrap_or_default();
    let sf = overrides.safety_factor.unwrap_or(DEFAULT_SAFETY_FACTOR);
    let mut floored = Vec::new();

    let mut m_primal = vec![vec![0.0; nt]; ns];
    for i in 0..ns {
        let mut cum = 0.0;
        for t in 0..nt {
            cum += c.capacity_limit[i][t];
            m_primal[i][t] = floor(sf * cum * instance.conversion, format!("mPrimal({i},{t})"), &mut floored);
        }
    }

    let m_flow: Vec<f64> = (0..nt)
        .map(|t| {
            let total: f64 = (0..nd).map(|j| instance.support.upper[j][t]).sum();
            floor(sf * total, format!("mFlow({t})"), &mut floored)
        })
        .collect();

    let mut raw_beta = vec![vec![0.0; nt]; nd];
    let mut max_cost = 0.0f64;
    for t in 0..nt {
        let max_prod = (0..ns).map(|i| c.production[i][t]).fold(0.0, f64::max);
        let max_imp = (0..np).map(|p| c.import[p][t]).fold(0.0, f64::max);
        max_cost = max_cost.max(max_prod).max(max_imp);
        for j in 0..nd {
            let max_tr = (0..ns + np).map(|s| c.transport[s][j][t]).fold(0.0, f64::max);
            max_cost = max_cost.max(max_tr).max(c.revenue[j][t]);
            raw_beta[j][t] = c.revenue[j][t] + max_tr + max_prod.max(max_imp);
        }
    }
    let max_beta = raw_beta.iter().flatten().fold(0.0f64, |a, &b| a.max(b));
    let mut beta_bar = vec![vec![0.0; nt]; nd];
    for j in 0..nd {
        for t in 0..nt {
            beta_bar[j][t] = floor(sf * raw_beta[j][t], format!("betaBar({j},{t})"), &mut floored);
        }
    }
    let m_dual = floor(sf * (max_beta + max_cost), "mDual".into(), &mut floored);

    BigMPolicy {
        safety_factor: sf,
        m_primal: overrides.m_primal.unwrap_or(m_primal),
        m_flow: overrides.m_flow.unwrap_or(m_flow),
        m_dual: overrides.m_dual.unwrap_or(m_dual),
        beta_bar1: overrides.beta_bar1.unwrap_or_else(|| beta_bar.clone()),
        beta_bar2: overrides.beta_bar2.unwrap_or(beta_bar),
        floored,
    }
}
