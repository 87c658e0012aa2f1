//! Worst-case demand search over the continuous support box.
//!
//! The recourse LP is replaced by its primal and dual feasibility rows plus big-M
//! complementarity, giving a max-sense MIP in `(ξ, h, v, z, ν, τ, η, ψ, κ)`.

use crate::error::Result;
use crate::model::{Grid, InvestmentPlan, NetworkInstance, SubproblemDualVars};
use crate::solver::{Backend, Cmp, LinearModel, Sense, SolveOptions, SolveStatus, VarRef};

use super::bigm::BigMPolicy;
use super::scaled::ScaledData;

#[derive(Debug, Clone)]
struct PeriodVars {
    t: usize,
    xi: Vec<VarRef>,
    h: Vec<VarRef>,
    v: Vec<VarRef>,
    z: Vec<Vec<VarRef>>,
    nu: Vec<VarRef>,
    tau: Vec<VarRef>,
    eta: Vec<VarRef>,
    psi: Vec<VarRef>,
    /// Installed production limit `conversion · Σ_{t'≤t} y` (scaled).
    limit: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SubproblemModel {
    pub model: LinearModel,
    data: ScaledData,
    vars: Vec<PeriodVars>,
}

/// Solution of a subproblem over a set of periods, in instance units.
#[derive(Debug, Clone)]
pub struct SubproblemSolution {
    pub status: SolveStatus,
    /// Incumbent value of `max_ξ Σ_t [f_t(ξ) − (β¹−β²)ξ]` over the covered periods.
    pub value: f64,
    /// Proven upper bound on the same quantity.
    pub bound: f64,
    pub periods: Vec<usize>,
    /// `[demand][k]` for the k-th covered period.
    pub demand: Grid,
    pub duals: Vec<SubproblemDualVars>,
    /// Largest complementarity product, each divided by its two big-M constants.
    pub complementarity: f64,
    pub seconds: f64,
}

/// Subproblem covering every period.
pub fn build_subproblem_continuous(
    instance: &NetworkInstance,
    plan: &InvestmentPlan,
    beta1: &Grid,
    beta2: &Grid,
    big_m: &BigMPolicy,
) -> SubproblemModel {
    let periods: Vec<usize> = (0..instance.periods).collect();
    build_subproblem_periods(instance, plan, beta1, beta2, big_m, &periods)
}

/// Subproblem restricted to the listed periods; periods decouple given the first stage.
pub fn build_subproblem_periods(
    instance: &NetworkInstance,
    plan: &InvestmentPlan,
    beta1: &Grid,
    beta2: &Grid,
    big_m: &BigMPolicy,
    periods: &[usize],
) -> SubproblemModel {
    let d = ScaledData::new(instance, big_m);
    let price = d.units.price();
    let (ns, np, nd) = (d.ns, d.np, d.nd);
    let md = d.m_dual;
    let mut m = LinearModel::new(format!("subproblem{periods:?}"), Sense::Maximize);
    let mut vars = Vec::new();
    for &t in periods {
        let mf = d.m_flow[t];
        let limit: Vec<f64> = (0..ns).map(|i| d.conversion * plan.cumulative(i, t)).collect();
        let xi: Vec<VarRef> = (0..nd)
            .map(|j| {
                let net = d.revenue[j][t] + (beta1[j][t] - beta2[j][t]) * price;
                m.continuous(format!("xi({j},{t})"), d.lower[j][t], d.upper[j][t], -net)
            })
            .collect();
        let h: Vec<VarRef> = (0..ns)
            .map(|i| m.continuous(format!("h({i},{t})"), 0.0, f64::INFINITY, d.production[i][t]))
            .collect();
        let v: Vec<VarRef> = (0..np)
            .map(|p| m.continuous(format!("v({p},{t})"), 0.0, f64::INFINITY, d.import[p][t]))
            .collect();
        let z: Vec<Vec<VarRef>> = (0..ns + np)
            .map(|s| {
                (0..nd)
                    .map(|j| m.continuous(format!("z({s},{j},{t})"), 0.0, f64::INFINITY, d.transport[s][j][t]))
                    .collect()
            })
            .collect();
        let nu: Vec<VarRef> = (0..ns).map(|i| m.continuous(format!("nu({i},{t})"), 0.0, md, 0.0)).collect();
        let tau: Vec<VarRef> = (0..ns).map(|i| m.continuous(format!("tau({i},{t})"), -md, md, 0.0)).collect();
        let eta: Vec<VarRef> = (0..np).map(|p| m.continuous(format!("eta({p},{t})"), -md, md, 0.0)).collect();
        let psi: Vec<VarRef> = (0..nd).map(|j| m.continuous(format!("psi({j},{t})"), -md, md, 0.0)).collect();

        // Primal feasibility.
        for i in 0..ns {
            m.add_constraint(format!("cap({i},{t})"), [(h[i], 1.0)], Cmp::Le, limit[i]);
            let mut row = vec![(h[i], 1.0)];
            row.extend((0..nd).map(|j| (z[i][j], -1.0)));
            m.add_constraint(format!("prod_out({i},{t})"), row, Cmp::Eq, 0.0);
        }
        for p in 0..np {
            let mut row = vec![(v[p], 1.0)];
            row.extend((0..nd).map(|j| (z[ns + p][j], -1.0)));
            m.add_constraint(format!("imp_out({p},{t})"), row, Cmp::Eq, 0.0);
        }
        for j in 0..nd {
            let mut row: Vec<(VarRef, f64)> = (0..ns + np).map(|s| (z[s][j], 1.0)).collect();
            row.push((xi[j], -1.0));
            m.add_constraint(format!("demand({j},{t})"), row, Cmp::Eq, 0.0);
        }
        // Dual feasibility.
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
        // Complementarity: slack ≤ M κ, partner ≤ M (1 − κ).
        for i in 0..ns {
            let mp = d.m_primal[i][t];
            let k1 = m.binary(format!("k1({i},{t})"), 0.0);
            m.add_constraint(format!("cs1a({i},{t})"), [(h[i], -1.0), (k1, -mp)], Cmp::Le, -limit[i]);
            m.add_constraint(format!("cs1b({i},{t})"), [(nu[i], 1.0), (k1, md)], Cmp::Le, md);
            let k2 = m.binary(format!("k2({i},{t})"), 0.0);
            m.add_constraint(format!("cs2a({i},{t})"), [(nu[i], 1.0), (tau[i], -1.0), (k2, -md)], Cmp::Le, -d.production[i][t]);
            m.add_constraint(format!("cs2b({i},{t})"), [(h[i], 1.0), (k2, mf)], Cmp::Le, mf);
        }
        for p in 0..np {
            let k3 = m.binary(format!("k3({p},{t})"), 0.0);
            m.add_constraint(format!("cs3a({p},{t})"), [(eta[p], -1.0), (k3, -md)], Cmp::Le, -d.import[p][t]);
            m.add_constraint(format!("cs3b({p},{t})"), [(v[p], 1.0), (k3, mf)], Cmp::Le, mf);
        }
        for s in 0..ns + np {
            for j in 0..nd {
                let k = m.binary(format!("k{}({s},{j},{t})", if s < ns { 4 } else { 5 }), 0.0);
                let partner = if s < ns { tau[s] } else { eta[s - ns] };
                m.add_constraint(
                    format!("cs45a({s},{j},{t})"),
                    [(partner, 1.0), (psi[j], -1.0), (k, -md)],
                    Cmp::Le,
                    -d.transport[s][j][t],
                );
                m.add_constraint(format!("cs45b({s},{j},{t})"), [(z[s][j], 1.0), (k, mf)], Cmp::Le, mf);
            }
        }
        vars.push(PeriodVars { t, xi, h, v, z, nu, tau, eta, psi, limit });
    }
    SubproblemModel { model: m, data: d, vars }
}

/// Snaps values within rounding of a support bound onto that bound.
fn snap(v: f64, lo: f64, hi: f64) -> f64 {
    let tol = 1e-7 * hi.abs().max(1.0);
    if (v - lo).abs() <= tol {
        lo
    } else if (v - hi).abs() <= tol {
        hi
    } else {
        v.clamp(lo, hi)
    }
}

impl SubproblemModel {
    pub fn solve(&self, instance: &NetworkInstance, backend: &dyn Backend, opts: &SolveOptions) -> Result<SubproblemSolution> {
        let res = backend.solve(&self.model, opts)?.require_solution(&self.model.name)?;
        let d = &self.data;
        let money = d.units.money;
        let inv_price = 1.0 / d.units.price();
        let nd = d.nd;
        let mut demand = vec![Vec::with_capacity(self.vars.len()); nd];
        let mut duals = Vec::new();
        let mut worst = 0.0f64;
        for pv in &self.vars {
            let t = pv.t;
            for j in 0..nd {
                let raw = res.value(pv.xi[j]) * d.units.mass;
                demand[j].push(snap(raw, instance.support.lower[j][t], instance.support.upper[j][t]));
            }
            let val = |v: &VarRef| res.value(*v);
            let md = d.m_dual;
            let mf = d.m_flow[t];
            for i in 0..d.ns {
                let slack = (pv.limit[i] - val(&pv.h[i])).max(0.0);
                worst = worst.max(slack * val(&pv.nu[i]).abs() / (d.m_primal[i][t] * md));
                let rc = (d.production[i][t] + val(&pv.nu[i]) - val(&pv.tau[i])).max(0.0);
                worst = worst.max(rc * val(&pv.h[i]).abs() / (md * mf));
            }
            for p in 0..d.np {
                let rc = (d.import[p][t] - val(&pv.eta[p])).max(0.0);
                worst = worst.max(rc * val(&pv.v[p]).abs() / (md * mf));
            }
            for s in 0..d.n_sources() {
                let partner = if s < d.ns { val(&pv.tau[s]) } else { val(&pv.eta[s - d.ns]) };
                for j in 0..nd {
                    let rc = (d.transport[s][j][t] + partner - val(&pv.psi[j])).max(0.0);
                    worst = worst.max(rc * val(&pv.z[s][j]).abs() / (md * mf));
                }
            }
            duals.push(SubproblemDualVars {
                nu: pv.nu.iter().map(|v| val(v) * inv_price).collect(),
                tau: pv.tau.iter().map(|v| val(v) * inv_price).collect(),
                eta: pv.eta.iter().map(|v| val(v) * inv_price).collect(),
                psi: pv.psi.iter().map(|v| val(v) * inv_price).collect(),
            });
        }
        Ok(SubproblemSolution {
            status: res.status,
            value: res.objective * money,
            bound: res.best_bound * money,
            periods: self.vars.iter().map(|pv| pv.t).collect(),
            demand,
            duals,
            complementarity: worst,
            seconds: res.seconds,
        })
    }
}
