//! The recourse LP at fixed first stage and demand, its dual, and the finite-support
//! worst-case search built on it.

use crate::error::{Error, Result};
use crate::model::{Grid, InvestmentPlan, NetworkInstance, OperationalPlan, Scenario};
use crate::solver::{Backend, Cmp, LinearModel, Sense, SolveOptions, VarRef};

use super::bigm::default_big_m;
use super::scaled::ScaledData;

/// Reusable second-stage evaluator for one instance.
#[derive(Debug, Clone)]
pub struct SecondStage {
    data: ScaledData,
}

/// Recourse value `Σ_t (c^P h + c^I v + c^T z − R ξ)` with the operations that attain it.
#[derive(Debug, Clone)]
pub struct SecondStageValue {
    pub value: f64,
    /// Value per period.
    pub by_period: Vec<f64>,
    pub operations: OperationalPlan,
}

struct PrimalRefs {
    h: Vec<Vec<VarRef>>,
    v: Vec<Vec<VarRef>>,
    z: Vec<Vec<Vec<VarRef>>>,
}

impl SecondStage {
    pub fn new(instance: &NetworkInstance) -> Self {
        Self {
            data: ScaledData::new(instance, &default_big_m(instance)),
        }
    }

    fn limit(&self, plan: &InvestmentPlan, i: usize, t: usize) -> f64 {
        self.data.conversion * plan.cumulative(i, t)
    }

    fn primal_model(&self, plan: &InvestmentPlan, demand: &Grid) -> (LinearModel, PrimalRefs) {
        let d = &self.data;
        let xi = d.scenario_to_scaled(demand);
        let mut m = LinearModel::new("recourse", Sense::Minimize);
        let (ns, np, nd, nt) = (d.ns, d.np, d.nd, d.nt);
        let mut h = vec![Vec::new(); ns];
        let mut v = vec![Vec::new(); np];
        let mut z = vec![vec![Vec::new(); nd]; ns + np];
        for t in 0..nt {
            for i in 0..ns {
                h[i].push(m.continuous(format!("h({i},{t})"), 0.0, self.limit(plan, i, t), d.production[i][t]));
            }
            for p in 0..np {
                v[p].push(m.continuous(format!("v({p},{t})"), 0.0, f64::INFINITY, d.import[p][t]));
            }
            for s in 0..ns + np {
                for j in 0..nd {
                    z[s][j].push(m.continuous(format!("z({s},{j},{t})"), 0.0, f64::INFINITY, d.transport[s][j][t]));
                }
            }
            for i in 0..ns {
                let mut row = vec![(h[i][t], 1.0)];
                row.extend((0..nd).map(|j| (z[i][j][t], -1.0)));
                m.add_constraint(format!("prod_out({i},{t})"), row, Cmp::Eq, 0.0);
            }
            for p in 0..np {
                let mut row = vec![(v[p][t], 1.0)];
                row.extend((0..nd).map(|j| (z[ns + p][j][t], -1.0)));
                m.add_constraint(format!("imp_out({p},{t})"), row, Cmp::Eq, 0.0);
            }
            for j in 0..nd {
                let row: Vec<(VarRef, f64)> = (0..ns + np).map(|s| (z[s][j][t], 1.0)).collect();
                m.add_constraint(format!("demand({j},{t})"), row, Cmp::Eq, xi[j][t]);
                m.offset -= d.revenue[j][t] * xi[j][t];
            }
        }
        (m, PrimalRefs { h, v, z })
    }

    /// Optimal recourse for `plan` under `demand` (kg, `[demand][t]`).
    pub fn solve(&self, plan: &InvestmentPlan, demand: &Grid, backend: &dyn Backend) -> Result<SecondStageValue> {
        let (m, r) = self.primal_model(plan, demand);
        let res = backend.solve(&m, &SolveOptions::default())?;
        let res = match res.status {
            crate::solver::SolveStatus::Optimal => res,
            status => {
                return Err(Error::InvalidInput(format!(
                    "recourse LP ended {status:?}; recourse should always be feasible"
                )))
            }
        };
        let d = &self.data;
        let (mass, money) = (d.units.mass, d.units.money);
        let xi = d.scenario_to_scaled(demand);
        let mut by_period = vec![0.0; d.nt];
        for t in 0..d.nt {
            let mut total = 0.0;
            for i in 0..d.ns {
                total += d.production[i][t] * res.value(r.h[i][t]);
            }
            for p in 0..d.np {
                total += d.import[p][t] * res.value(r.v[p][t]);
            }
            for s in 0..d.n_sources() {
                for j in 0..d.nd {
                    total += d.transport[s][j][t] * res.value(r.z[s][j][t]);
                }
            }
            for j in 0..d.nd {
                total -= d.revenue[j][t] * xi[j][t];
            }
            by_period[t] = total * money;
        }
        let grid = |refs: &Vec<Vec<VarRef>>| -> Grid {
            refs.iter().map(|row| row.iter().map(|&v| res.value(v) * mass).collect()).collect()
        };
        Ok(SecondStageValue {
            value: res.objective * money,
            by_period,
            operations: OperationalPlan {
                production: grid(&r.h),
                import: grid(&r.v),
                flow: r.z.iter().map(grid).collect(),
            },
        })
    }

    /// Optimum of the dual LP `max −Σ Yν + Σ (ψ − R) ξ` over the dual feasible set.
    pub fn solve_dual(&self, plan: &InvestmentPlan, demand: &Grid, backend: &dyn Backend) -> Result<f64> {
        let d = &self.data;
        let xi = d.scenario_to_scaled(demand);
        let (ns, np, nd, nt) = (d.ns, d.np, d.nd, d.nt);
        let mut m = LinearModel::new("recourse_dual", Sense::Maximize);
        let free = f64::INFINITY;
        for t in 0..nt {
            let nu: Vec<VarRef> = (0..ns)
                .map(|i| m.continuous(format!("nu({i},{t})"), 0.0, free, -self.limit(plan, i, t)))
                .collect();
            let tau: Vec<VarRef> = (0..ns).map(|i| m.continuous(format!("tau({i},{t})"), -free, free, 0.0)).collect();
            let eta: Vec<VarRef> = (0..np).map(|p| m.continuous(format!("eta({p},{t})"), -free, free, 0.0)).collect();
            let psi: Vec<VarRef> = (0..nd)
                .map(|j| m.continuous(format!("psi({j},{t})"), -free, free, xi[j][t]))
                .collect();
            for j in 0..nd {
                m.offset -= d.revenue[j][t] * xi[j][t];
            }
            for i in 0..ns {
                m.add_constraint(format!("d_prod({i},{t})"), [(tau[i], 1.0), (nu[i], -1.0)], Cmp::Le, d.production[i][t]);
            }
            for p in 0..np {
                m.add_constraint(format!("d_imp({p},{t})"), [(eta[p], 1.0)], Cmp::Le, d.import[p][t]);
            }
            for j in 0..nd {
                for i in 0..ns {
                    m.add_constraint(format!("d_tr({i},{j},{t})"), [(psi[j], 1.0), (tau[i], -1.0)], Cmp::Le, d.transport[i][j][t]);
                }
                for p in 0..np {
                    let s = ns + p;
                    m.add_constraint(format!("d_tr({s},{j},{t})"), [(psi[j], 1.0), (eta[p], -1.0)], Cmp::Le, d.transport[s][j][t]);
                }
            }
        }
        let res = backend.solve(&m, &SolveOptions::default())?.require_solution("recourse_dual")?;
        Ok(res.objective * d.units.money)
    }
}

/// Best scenario of a finite list for fixed first stage and moment duals:
/// `argmax_k Σ_t [f_t(ξ^k) − Σ_j (β¹ − β²) ξ^k]`, ties to the lowest index.
pub fn build_subproblem_discrete(
    instance: &NetworkInstance,
    plan: &InvestmentPlan,
    beta1: &Grid,
    beta2: &Grid,
    scenarios: &[Scenario],
    backend: &dyn Backend,
) -> Result<(usize, f64)> {
    if scenarios.is_empty() {
        return Err(Error::InvalidInput("discrete subproblem needs at least one scenario".into()));
    }
    let stage = SecondStage::new(instance);
    let mut best: Option<(usize, f64)> = None;
    for (k, s) in scenarios.iter().enumerate() {
        let mut value = stage.solve(plan, &s.demand, backend)?.value;
        for (j, row) in s.demand.iter().enumerate() {
            for (t, xi) in row.iter().enumerate() {
                value -= (beta1[j][t] - beta2[j][t]) * xi;
            }
        }
        let tol = 1e-9 * value.abs().max(1.0);
        if best.map_or(true, |(_, b)| value > b + tol) {
            best = Some((k, value));
        }
    }
    Ok(best.expect("nonempty list"))
}
