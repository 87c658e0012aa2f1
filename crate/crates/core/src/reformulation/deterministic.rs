//! Deterministic expansion model where demand equals its decision-dependent mean.

use crate::error::{Error, Result};
use crate::model::{InvestmentPlan, MomentVariant, NetworkInstance};
use crate::solver::{Backend, Cmp, LinearModel, Sense, SolveOptions, VarRef};

use super::bigm::default_big_m;
use super::blocks::{add_first_stage, add_recourse, operating_terms, FirstStageVars};
use super::scaled::ScaledData;

#[derive(Debug, Clone)]
pub struct DeterministicModel {
    pub model: LinearModel,
    data: ScaledData,
    first_stage: FirstStageVars,
}

#[derive(Debug, Clone)]
pub struct DeterministicSolution {
    pub objective: f64,
    pub best_bound: f64,
    pub plan: InvestmentPlan,
}

/// Builds the single-level model. With `ddu` off the demand is the base mean.
pub fn build_deterministic(instance: &NetworkInstance, variant: MomentVariant, ddu: bool) -> Result<DeterministicModel> {
    if variant == MomentVariant::Capacity {
        return Err(Error::InvalidInput(
            "the deterministic model is defined for location moments only".into(),
        ));
    }
    super::check_variant(instance, variant)?;
    let d = ScaledData::new(instance, &default_big_m(instance));
    let mut m = LinearModel::new("deterministic", Sense::Minimize);
    let fs = add_first_stage(&mut m, &d, MomentVariant::Location);
    let bounded = ddu && variant == MomentVariant::LocationBounded;

    // u_jt = min(Σ λ x, B̄) through a binary switch.
    let uplift = if bounded {
        let bound = d.bound.as_ref().expect("checked above");
        let mut u = vec![Vec::with_capacity(d.nt); d.nd];
        for j in 0..d.nd {
            let total: f64 = (0..d.ns).map(|i| d.lambda[i][j]).sum();
            for t in 0..d.nt {
                let b = bound[j][t];
                let ujt = m.continuous(format!("u({j},{t})"), 0.0, b, 0.0);
                let a = m.binary(format!("a({j},{t})"), 0.0);
                let lin: Vec<(VarRef, f64)> = (0..d.ns).map(|i| (fs.x[i][t], d.lambda[i][j])).collect();
                let mut row = lin.clone();
                row.push((ujt, -1.0));
                m.add_constraint(format!("u_le_lin({j},{t})"), row, Cmp::Ge, 0.0);
                let big = total + b + 1.0;
                let mut row = lin;
                row.push((ujt, -1.0));
                row.push((a, -big));
                m.add_constraint(format!("u_ge_lin({j},{t})"), row, Cmp::Le, 0.0);
                m.add_constraint(format!("u_ge_cap({j},{t})"), [(ujt, 1.0), (a, -big)], Cmp::Ge, b - big);
                u[j].push(ujt);
            }
        }
        Some(u)
    } else {
        None
    };

    let demand = |j: usize, t: usize| -> (Vec<(VarRef, f64)>, f64) {
        let mu = d.base_mean[j][t];
        if !ddu {
            return (Vec::new(), mu);
        }
        match &uplift {
            Some(u) => (vec![(u[j][t], mu)], mu),
            None => ((0..d.ns).map(|i| (fs.x[i][t], mu * d.lambda[i][j])).collect(), mu),
        }
    };
    let rec = add_recourse(&mut m, &d, "", &fs.y, &demand);
    for t in 0..d.nt {
        for (v, c) in operating_terms(&d, &rec, t) {
            m.add_objective(v, c);
        }
        for j in 0..d.nd {
            // Revenue −R μ̄(1 + uplift).
            let (terms, constant) = demand(j, t);
            let r = d.revenue[j][t];
            m.offset -= r * constant;
            for (v, c) in terms {
                m.add_objective(v, -r * c);
            }
        }
    }
    Ok(DeterministicModel {
        model: m,
        data: d,
        first_stage: fs,
    })
}

impl DeterministicModel {
    pub fn solve(&self, backend: &dyn Backend, opts: &SolveOptions) -> Result<DeterministicSolution> {
        let res = backend.solve(&self.model, opts)?.require_solution("deterministic")?;
        let d = &self.data;
        let open: Vec<Vec<bool>> = self
            .first_stage
            .x
            .iter()
            .map(|row| row.iter().map(|&v| res.value(v) > 0.5).collect())
            .collect();
        let capacity = (0..d.ns)
            .map(|i| {
                (0..d.nt)
                    .map(|t| {
                        if open[i][t] {
                            res.value(self.first_stage.y[i][t]).clamp(0.0, d.capacity_limit[i][t])
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(DeterministicSolution {
            objective: res.objective * d.units.money,
            best_bound: res.best_bound * d.units.money,
            plan: InvestmentPlan { open, capacity, range: None },
        })
    }
}
