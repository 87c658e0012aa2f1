//! Master problems: scenario-based (C&CG), cut-based (Benders) and the monolithic
//! discrete-support model, which is the scenario master holding the full list.

use crate::error::{Error, Result};
use crate::model::{DualMomentVars, Grid, InvestmentPlan, MomentVariant, NetworkInstance, Scenario};
use crate::solver::{Backend, Cmp, LinearModel, Sense, SolveOptions, SolveResult, SolveStatus, VarRef};

use super::bigm::{default_big_m, BigMPolicy};
use super::blocks::{add_first_stage, add_moment_block, add_recourse, operating_terms, values2, FirstStageVars, MomentVars, RecourseVars};
use super::scaled::ScaledData;
use super::check_variant;

/// Componentwise tolerance for treating two scenarios as the same, relative to magnitude.
pub const DEDUP_TOL: f64 = 1e-9;

pub fn same_scenario(a: &Grid, b: &Grid) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(ra, rb)| {
            ra.len() == rb.len()
                && ra
                    .iter()
                    .zip(rb)
                    .all(|(x, y)| (x - y).abs() <= DEDUP_TOL * x.abs().max(y.abs()).max(1.0))
        })
}

/// Whether `demand` lies in the support box, up to relative rounding.
pub fn within_support(instance: &NetworkInstance, demand: &Grid) -> bool {
    let (lo, hi) = (&instance.support.lower, &instance.support.upper);
    demand.len() == lo.len()
        && demand.iter().enumerate().all(|(j, row)| {
            row.len() == lo[j].len()
                && row.iter().enumerate().all(|(t, &v)| {
                    let tol = DEDUP_TOL * hi[j][t].abs().max(1.0);
                    v >= lo[j][t] - tol && v <= hi[j][t] + tol
                })
        })
}

/// A Benders cut: worst-case demand and the second-stage duals that priced it.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BendersCut {
    /// `[demand][t]`, kg.
    pub demand: Grid,
    /// `[supply][t]`, dual of the production capacity row.
    pub nu: Grid,
    /// `[demand][t]`, dual of the demand row.
    pub psi: Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutMode {
    /// One `α_t` per period with per-period cuts.
    PerPeriod,
    /// A single `α`.
    Single,
}

/// Moment and first-stage values of a master solution, used by the candidate upper bound.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MasterValues {
    pub first_stage_cost: f64,
    pub moment_cost: f64,
}

#[derive(Debug, Clone)]
pub struct MasterSolution {
    pub status: SolveStatus,
    pub objective: f64,
    pub best_bound: f64,
    pub plan: InvestmentPlan,
    pub duals: DualMomentVars,
    pub values: MasterValues,
    /// Sum of the `α` variables.
    pub alpha_total: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct MasterModel {
    pub model: LinearModel,
    pub variant: MomentVariant,
    pub mode: CutMode,
    pub data: ScaledData,
    pub first_stage: FirstStageVars,
    pub moment: MomentVars,
    pub alpha: Vec<VarRef>,
    pool: Vec<Scenario>,
    recourse: Vec<RecourseVars>,
    cuts: Vec<BendersCut>,
}

/// Valid lower bound on per-period recourse minus the moment pricing term:
/// `f_t(ξ) − (β¹−β²)ξ ≥ −(R + β̄¹)ξ̄`.
fn alpha_floor(d: &ScaledData, t: usize) -> f64 {
    -(0..d.nd).map(|j| (d.revenue[j][t] + d.beta_bar1[j][t]) * d.upper[j][t]).sum::<f64>()
}

impl MasterModel {
    fn new(instance: &NetworkInstance, big_m: &BigMPolicy, variant: MomentVariant, mode: CutMode, name: &str) -> Result<Self> {
        check_variant(instance, variant)?;
        let data = ScaledData::new(instance, big_m);
        let mut model = LinearModel::new(name, Sense::Minimize);
        let first_stage = add_first_stage(&mut model, &data, variant);
        let moment = add_moment_block(&mut model, &data, variant, instance.moment.is_bounded(variant), &first_stage);
        let alpha = match mode {
            CutMode::PerPeriod => (0..data.nt)
                .map(|t| model.continuous(format!("alpha({t})"), alpha_floor(&data, t), f64::INFINITY, 1.0))
                .collect(),
            CutMode::Single => {
                let floor: f64 = (0..data.nt).map(|t| alpha_floor(&data, t)).sum();
                vec![model.continuous("alpha", floor, f64::INFINITY, 1.0)]
            }
        };
        Ok(Self {
            model,
            variant,
            mode,
            data,
            first_stage,
            moment,
            alpha,
            pool: Vec::new(),
            recourse: Vec::new(),
            cuts: Vec::new(),
        })
    }

    pub fn pool(&self) -> &[Scenario] {
        &self.pool
    }

    pub fn cuts(&self) -> &[BendersCut] {
        &self.cuts
    }

    /// Appends the recourse block and cuts of `s`; returns false for a duplicate.
    pub fn add_scenario(&mut self, instance: &NetworkInstance, s: Scenario) -> Result<bool> {
        if !within_support(instance, &s.demand) {
            return Err(Error::InvalidInput("scenario outside support".into()));
        }
        if self.pool.iter().any(|p| same_scenario(&p.demand, &s.demand)) {
            return Ok(false);
        }
        let k = self.pool.len();
        let xi = self.data.scenario_to_scaled(&s.demand);
        let d = &self.data;
        let rec = add_recourse(&mut self.model, d, &format!("[{k}]"), &self.first_stage.y, &|j, t| (Vec::new(), xi[j][t]));
        // α_t − (c^P h + c^I v + c^T z) + Σ_j ξ_jt (β¹ − β²) ≥ −Σ_j R ξ
        let mut rows: Vec<(Vec<(VarRef, f64)>, f64)> = Vec::new();
        for t in 0..d.nt {
            let mut row: Vec<(VarRef, f64)> = operating_terms(d, &rec, t).into_iter().map(|(v, c)| (v, -c)).collect();
            let mut rhs = 0.0;
            for j in 0..d.nd {
                row.push((self.moment.beta1[j][t], xi[j][t]));
                row.push((self.moment.beta2[j][t], -xi[j][t]));
                rhs -= d.revenue[j][t] * xi[j][t];
            }
            rows.push((row, rhs));
        }
        match self.mode {
            CutMode::PerPeriod => {
                for (t, (mut row, rhs)) in rows.into_iter().enumerate() {
                    row.push((self.alpha[t], 1.0));
                    self.model.add_constraint(format!("cut[{k}]({t})"), row, Cmp::Ge, rhs);
                }
            }
            CutMode::Single => {
                let mut all = vec![(self.alpha[0], 1.0)];
                let mut total = 0.0;
                for (row, rhs) in rows {
                    all.extend(row);
                    total += rhs;
                }
                self.model.add_constraint(format!("cut[{k}]"), all, Cmp::Ge, total);
            }
        }
        self.recourse.push(rec);
        self.pool.push(s);
        Ok(true)
    }

    /// Appends an optimality cut `α ≥ Σ_t (−Y_t ν + Σ_j (ψ − R − β¹ + β²) ξ)`;
    /// returns false for a duplicate.
    pub fn add_cut(&mut self, cut: BendersCut) -> Result<bool> {
        if self.mode != CutMode::Single {
            return Err(Error::InvalidInput("Benders cuts need a single alpha".into()));
        }
        if self
            .cuts
            .iter()
            .any(|c| same_scenario(&c.demand, &cut.demand) && same_scenario(&c.nu, &cut.nu) && same_scenario(&c.psi, &cut.psi))
        {
            return Ok(false);
        }
        let d = &self.data;
        let price = d.units.price();
        let xi = d.scenario_to_scaled(&cut.demand);
        let mut row = vec![(self.alpha[0], 1.0)];
        let mut rhs = 0.0;
        for t in 0..d.nt {
            for i in 0..d.ns {
                let nu = cut.nu[i][t] * price;
                for k in 0..=t {
                    row.push((self.first_stage.y[i][k], nu * d.conversion));
                }
            }
            for j in 0..d.nd {
                row.push((self.moment.beta1[j][t], xi[j][t]));
                row.push((self.moment.beta2[j][t], -xi[j][t]));
                rhs += (cut.psi[j][t] * price - d.revenue[j][t]) * xi[j][t];
            }
        }
        let k = self.cuts.len();
        self.model.add_constraint(format!("benders[{k}]"), row, Cmp::Ge, rhs);
        self.cuts.push(cut);
        Ok(true)
    }

    /// Solves the master and maps the solution back to instance units.
    pub fn solve(&self, backend: &dyn Backend, opts: &SolveOptions) -> Result<MasterSolution> {
        let res = backend.solve(&self.model, opts)?;
        let res = res.require_solution(&self.model.name)?;
        Ok(self.extract(res))
    }

    fn extract(&self, res: SolveResult) -> MasterSolution {
        let d = &self.data;
        let money = d.units.money;
        let inv_price = 1.0 / d.units.price();
        let fs = &self.first_stage;
        let open: Vec<Vec<bool>> = fs.x.iter().map(|row| row.iter().map(|&v| res.value(v) > 0.5).collect()).collect();
        let capacity: Grid = (0..d.ns)
            .map(|i| {
                (0..d.nt)
                    .map(|t| {
                        if open[i][t] {
                            res.value(fs.y[i][t]).clamp(0.0, d.capacity_limit[i][t])
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        let range = fs.e.as_ref().map(|e| {
            e.iter()
                .map(|ei| {
                    ei.iter()
                        .map(|eit| {
                            eit.iter()
                                .enumerate()
                                .max_by(|a, b| res.value(*a.1).total_cmp(&res.value(*b.1)))
                                .map_or(0, |(r, _)| r)
                        })
                        .collect()
                })
                .collect()
        });
        let plan = InvestmentPlan { open, capacity, range };
        let mv = &self.moment;
        let products = |p: &Vec<Vec<super::blocks::Refs2>>| -> Vec<Vec<Grid>> {
            p.iter().map(|pi| pi.iter().map(|q| values2(&res, q, inv_price)).collect()).collect()
        };
        let duals = DualMomentVars {
            alpha: self.alpha.iter().map(|&a| res.value(a) * money).collect(),
            beta1: values2(&res, &mv.beta1, inv_price),
            beta2: values2(&res, &mv.beta2, inv_price),
            phi1: products(&mv.phi1),
            phi2: products(&mv.phi2),
            upsilon1: mv.upsilon1.as_ref().map(|u| values2(&res, u, inv_price)),
            upsilon2: mv.upsilon2.as_ref().map(|u| values2(&res, u, inv_price)),
            cap_active: mv
                .cap_active
                .as_ref()
                .map(|a| a.iter().map(|row| row.iter().map(|&v| res.value(v) > 0.5).collect()).collect()),
        };
        let vars = self.model.variables();
        let moment_cost = mv.priced.iter().map(|&v| vars[v.index()].objective * res.value(v)).sum::<f64>() * money;
        let first_stage_cost = fs
            .x
            .iter()
            .chain(&fs.y)
            .flatten()
            .map(|&v| vars[v.index()].objective * res.value(v))
            .sum::<f64>()
            * money;
        let alpha_total = duals.alpha.iter().sum();
        MasterSolution {
            status: res.status,
            objective: res.objective * money,
            best_bound: res.best_bound * money,
            plan,
            duals,
            values: MasterValues {
                first_stage_cost,
                moment_cost,
            },
            alpha_total,
            seconds: res.seconds,
        }
    }
}

/// Scenario master with per-period cuts when `per_period` is set.
pub fn build_master(
    instance: &NetworkInstance,
    pool: &[Scenario],
    variant: MomentVariant,
    per_period: bool,
) -> Result<MasterModel> {
    build_master_with(instance, &default_big_m(instance), pool, variant, per_period)
}

pub fn build_master_with(
    instance: &NetworkInstance,
    big_m: &BigMPolicy,
    pool: &[Scenario],
    variant: MomentVariant,
    per_period: bool,
) -> Result<MasterModel> {
    let mode = if per_period { CutMode::PerPeriod } else { CutMode::Single };
    let mut master = MasterModel::new(instance, big_m, variant, mode, "master")?;
    for s in pool {
        master.add_scenario(instance, s.clone())?;
    }
    Ok(master)
}

/// Single-level model over a finite support: the scenario master holding every scenario.
pub fn build_monolithic_discrete(
    instance: &NetworkInstance,
    scenarios: &[Scenario],
    variant: MomentVariant,
) -> Result<MasterModel> {
    let big_m = default_big_m(instance);
    let mut master = MasterModel::new(instance, &big_m, variant, CutMode::Single, "monolithic")?;
    for s in scenarios {
        master.add_scenario(instance, s.clone())?;
    }
    Ok(master)
}

/// Benders master holding the given cuts.
pub fn build_benders_master(
    instance: &NetworkInstance,
    cuts: &[BendersCut],
    variant: MomentVariant,
) -> Result<MasterModel> {
    build_benders_master_with(instance, &default_big_m(instance), cuts, variant)
}

pub fn build_benders_master_with(
    instance: &NetworkInstance,
    big_m: &BigMPolicy,
    cuts: &[BendersCut],
    variant: MomentVariant,
) -> Result<MasterModel> {
    let mut master = MasterModel::new(instance, big_m, variant, CutMode::Single, "benders_master")?;
    for c in cuts {
        master.add_cut(c.clone())?;
    }
    Ok(master)
}
