//! The decomposition loop shared by C&CG+, classical C&CG and Benders.

use std::time::Instant;

use log::{debug, info};

use crate::error::{Error, Result};
use crate::model::{DualMomentVars, Grid, InvestmentPlan, NetworkInstance, Scenario, ScenarioOrigin, SupportKind};
use crate::reformulation::{
    build_benders_master_with, build_master_with, build_monolithic_discrete, build_subproblem_discrete,
    build_subproblem_periods, default_big_m, BendersCut, BigMPolicy, MasterModel, Units,
};
use crate::solver::{dump_lp, Backend, SolveOptions, SolveStatus, SolverError};

use super::config::{Algorithm, AlgorithmConfig};
use super::gap::{candidate_upper_bound, relative_gap, update_relative_gap};
use super::log::{IterationRecord, OutcomeStatus, SolveOutcome};
use super::pregen::pregenerate_scenarios;

/// Worst case at a fixed first stage and moment duals.
#[derive(Debug, Clone)]
pub struct WorstCase {
    /// Proven upper bound of each solved block, in block order.
    pub values: Vec<f64>,
    /// `[demand][t]`.
    pub demand: Grid,
    pub cut: Option<BendersCut>,
    pub complementarity: Option<f64>,
    pub seconds: f64,
}

/// How the worst-case search is split.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubproblemMode {
    pub by_period: bool,
    pub parallel: bool,
}

/// Solves the worst-case search for `plan` and moment duals `duals`.
pub fn solve_worst_case(
    instance: &NetworkInstance,
    plan: &InvestmentPlan,
    duals: &DualMomentVars,
    big_m: &BigMPolicy,
    mode: SubproblemMode,
    backend: &dyn Backend,
    opts: &SolveOptions,
    dump: Option<(&std::path::Path, usize)>,
) -> Result<WorstCase> {
    let start = Instant::now();
    if let SupportKind::Discrete(list) = &instance.support.kind {
        let (k, value) = build_subproblem_discrete(instance, plan, &duals.beta1, &duals.beta2, list, backend)?;
        return Ok(WorstCase {
            values: vec![value],
            demand: list[k].demand.clone(),
            cut: None,
            complementarity: None,
            seconds: start.elapsed().as_secs_f64(),
        });
    }
    let nt = instance.periods;
    let groups: Vec<Vec<usize>> = if mode.by_period {
        (0..nt).map(|t| vec![t]).collect()
    } else {
        vec![(0..nt).collect()]
    };
    let solve_group = |periods: &Vec<usize>| {
        let sp = build_subproblem_periods(instance, plan, &duals.beta1, &duals.beta2, big_m, periods);
        if let Some((dir, iter)) = dump {
            let stem = format!("subproblem_{iter}_{}", periods.iter().map(ToString::to_string).collect::<Vec<_>>().join("-"));
            dump_lp(&sp.model, dir, &stem).map_err(|e| Error::io(dir, e))?;
        }
        sp.solve(instance, backend, opts)
    };
    let solutions = if mode.parallel && groups.len() > 1 {
        std::thread::scope(|scope| {
            let handles: Vec<_> = groups.iter().map(|g| scope.spawn(|| solve_group(g))).collect();
            handles
                .into_iter()
                .map(|h| h.join().unwrap_or_else(|_| Err(SolverError::Backend("subproblem worker panicked".into()).into())))
                .collect::<Result<Vec<_>>>()
        })?
    } else {
        groups.iter().map(solve_group).collect::<Result<Vec<_>>>()?
    };

    let nd = instance.n_demand();
    let ns = instance.n_supply();
    let mut demand = vec![vec![0.0; nt]; nd];
    let mut nu = vec![vec![0.0; nt]; ns];
    let mut psi = vec![vec![0.0; nt]; nd];
    let mut worst = 0.0f64;
    for sol in &solutions {
        worst = worst.max(sol.complementarity);
        for (k, &t) in sol.periods.iter().enumerate() {
            for j in 0..nd {
                demand[j][t] = sol.demand[j][k];
                psi[j][t] = sol.duals[k].psi[j];
            }
            for i in 0..ns {
                nu[i][t] = sol.duals[k].nu[i];
            }
        }
    }
    Ok(WorstCase {
        values: solutions.iter().map(|s| s.bound).collect(),
        cut: Some(BendersCut { demand: demand.clone(), nu, psi }),
        demand,
        complementarity: Some(worst),
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Settings of one decomposition run after algorithm-specific overrides.
#[derive(Debug, Clone)]
struct Plan {
    benders: bool,
    inexact: bool,
    pregenerate: bool,
    per_period: bool,
    sub: SubproblemMode,
}

pub type Observer<'a> = &'a mut dyn FnMut(&IterationRecord);

/// Runs `config.algorithm` on `instance`.
pub fn run(instance: &NetworkInstance, config: &AlgorithmConfig, backend: &dyn Backend) -> Result<SolveOutcome> {
    run_with_observer(instance, config, backend, &mut |_| {})
}

/// As [`run`], calling `observer` after every iteration.
pub fn run_with_observer(
    instance: &NetworkInstance,
    config: &AlgorithmConfig,
    backend: &dyn Backend,
    observer: Observer<'_>,
) -> Result<SolveOutcome> {
    config.check()?;
    let discrete = instance.support.is_discrete();
    let plan = match config.algorithm {
        Algorithm::Monolithic => return run_monolithic(instance, config, backend, observer),
        Algorithm::CcgPlus => Plan {
            benders: false,
            inexact: true,
            pregenerate: config.pregenerate,
            per_period: config.per_period_cuts && !discrete,
            sub: SubproblemMode {
                by_period: config.per_period_cuts || config.parallel_subproblems,
                parallel: config.parallel_subproblems,
            },
        },
        Algorithm::CcgClassic => Plan {
            benders: false,
            inexact: false,
            pregenerate: false,
            per_period: false,
            // The search separates by period, so splitting it only changes the runtime.
            sub: SubproblemMode { by_period: true, parallel: false },
        },
        Algorithm::Benders => {
            if discrete {
                return Err(Error::InvalidInput("Benders needs a continuous support".into()));
            }
            Plan {
                benders: true,
                inexact: false,
                pregenerate: false,
                per_period: false,
                sub: SubproblemMode { by_period: true, parallel: false },
            }
        }
    };
    decompose(instance, config, backend, observer, &plan)
}

pub fn run_ccg_plus(instance: &NetworkInstance, config: &AlgorithmConfig, backend: &dyn Backend) -> Result<SolveOutcome> {
    run(instance, &AlgorithmConfig { algorithm: Algorithm::CcgPlus, ..config.clone() }, backend)
}

pub fn run_ccg_classic(instance: &NetworkInstance, config: &AlgorithmConfig, backend: &dyn Backend) -> Result<SolveOutcome> {
    run(instance, &AlgorithmConfig { algorithm: Algorithm::CcgClassic, ..config.clone() }, backend)
}

pub fn run_benders(instance: &NetworkInstance, config: &AlgorithmConfig, backend: &dyn Backend) -> Result<SolveOutcome> {
    run(instance, &AlgorithmConfig { algorithm: Algorithm::Benders, ..config.clone() }, backend)
}

fn remaining(config: &AlgorithmConfig, start: Instant) -> Option<f64> {
    config.time_limit.map(|limit| limit - start.elapsed().as_secs_f64())
}

fn is_time_limit(e: &Error) -> bool {
    matches!(e.root(), Error::Solver(SolverError::Status { status: SolveStatus::TimeLimit, .. }))
}

fn decompose(
    instance: &NetworkInstance,
    config: &AlgorithmConfig,
    backend: &dyn Backend,
    observer: Observer<'_>,
    plan: &Plan,
) -> Result<SolveOutcome> {
    let start = Instant::now();
    let big_m = default_big_m(instance);
    let money = Units::for_instance(instance).money;
    let variant = config.variant;
    let mut master: MasterModel = if plan.benders {
        build_benders_master_with(instance, &big_m, &[], variant)?
    } else {
        build_master_with(instance, &big_m, &[], variant, plan.per_period)?
    };
    if plan.pregenerate {
        for s in pregenerate_scenarios(&instance.support) {
            master.add_scenario(instance, s).map_err(|e| e.context("pregenerated scenario"))?;
        }
    }
    let sub_opts = SolveOptions {
        relative_gap: config.subproblem_gap,
        absolute_gap: 1e-9,
        threads: config.threads,
        ..SolveOptions::default()
    };

    let mut lb = f64::NEG_INFINITY;
    let mut ub = f64::INFINITY;
    let mut incumbent: Option<(InvestmentPlan, DualMomentVars)> = None;
    let mut delta = if plan.inexact { config.initial_gap } else { config.final_gap };
    let mut log = Vec::new();
    let mut iter = 0usize;
    let status = loop {
        if let Some(rest) = remaining(config, start) {
            if rest <= 0.0 {
                break OutcomeStatus::TimeLimit;
            }
        }
        if config.max_iterations.is_some_and(|m| iter >= m) {
            break OutcomeStatus::IterationLimit;
        }
        iter += 1;
        if let Some(dir) = &config.dump_lp {
            dump_lp(&master.model, dir, &format!("master_{iter}")).map_err(|e| Error::io(dir, e))?;
        }
        let opts = SolveOptions {
            relative_gap: delta,
            absolute_gap: 1e-9,
            time_limit: remaining(config, start),
            threads: config.threads,
            ..SolveOptions::default()
        };
        let ms = match master.solve(backend, &opts) {
            Ok(ms) => ms,
            Err(e) if is_time_limit(&e) => break OutcomeStatus::TimeLimit,
            Err(e) => return Err(e.context(format!("iteration {iter}: master"))),
        };
        let improved_lb = ms.best_bound > lb + 1e-9 * lb.abs().max(1.0);
        lb = lb.max(ms.best_bound);

        let dump = config.dump_lp.as_deref().map(|d| (d, iter));
        // Each block may leave a tenth of the stop gap, split evenly, unproven.
        let blocks = if plan.sub.by_period { instance.periods } else { 1 } as f64;
        let slack = 0.1 * config.stop_gap * ms.objective.abs() / blocks / money;
        let sub_opts = SolveOptions {
            absolute_gap: slack.max(sub_opts.absolute_gap),
            ..sub_opts.clone()
        };
        let wc = solve_worst_case(instance, &ms.plan, &ms.duals, &big_m, plan.sub, backend, &sub_opts, dump)
            .map_err(|e| e.context(format!("iteration {iter}: subproblem")))?;
        let candidate = candidate_upper_bound(&ms.values, &wc.values);
        let improved_ub = candidate < ub - 1e-9 * ub.abs().max(1.0);
        if candidate < ub {
            ub = candidate;
            incumbent = Some((ms.plan.clone(), ms.duals.clone()));
        }
        let added = if plan.benders {
            master.add_cut(wc.cut.clone().expect("continuous subproblem yields a cut"))?
        } else {
            master.add_scenario(instance, Scenario::new(wc.demand.clone(), ScenarioOrigin::Iteration(iter)))?
        };
        let gap = relative_gap(lb, ub);
        let record = IterationRecord {
            iter,
            lb,
            ub,
            gap,
            master_bound: ms.best_bound,
            master_objective: ms.objective,
            master_gap_used: delta,
            candidate_ub: candidate,
            scenario_added: added,
            pool_size: if plan.benders { master.cuts().len() } else { master.pool().len() },
            master_time: ms.seconds,
            subproblem_time: wc.seconds,
            complementarity: wc.complementarity,
        };
        debug!("{} iteration {iter}: LB {lb:.6e} UB {ub:.6e} gap {gap:.3e}", config.algorithm);
        observer(&record);
        log.push(record);
        if gap <= config.stop_gap {
            break OutcomeStatus::Converged;
        }
        if ms.status == SolveStatus::TimeLimit {
            break OutcomeStatus::TimeLimit;
        }
        if !added && delta <= config.final_gap {
            break OutcomeStatus::Stalled;
        }
        // An inexact master can keep returning equally good points while neither
        // bound moves; tighten it then, as for a repeated scenario.
        let stuck = !improved_lb && !improved_ub;
        delta = if !added || stuck || !plan.inexact {
            config.final_gap
        } else {
            update_relative_gap(config.initial_gap, config.final_gap, config.gap_factor, lb, ub)
        };
    };
    let seconds = start.elapsed().as_secs_f64();
    info!("{} finished {status:?} after {iter} iterations, {seconds:.2}s", config.algorithm);
    let (plan_out, duals) = match incumbent {
        Some((p, d)) => (p, Some(d)),
        None => (InvestmentPlan::empty(instance.n_supply(), instance.periods), None),
    };
    Ok(SolveOutcome {
        algorithm: config.algorithm,
        status,
        objective: ub,
        bound: lb,
        gap: relative_gap(lb, ub),
        plan: plan_out,
        duals,
        iterations: log.len(),
        seconds,
        log,
        scenario_pool: master.pool().to_vec(),
    })
}

/// Single-level model over the listed scenarios of a finite support.
pub fn run_monolithic(
    instance: &NetworkInstance,
    config: &AlgorithmConfig,
    backend: &dyn Backend,
    observer: Observer<'_>,
) -> Result<SolveOutcome> {
    let start = Instant::now();
    let SupportKind::Discrete(list) = &instance.support.kind else {
        return Err(Error::InvalidInput("the monolithic model needs a finite support".into()));
    };
    let master = build_monolithic_discrete(instance, list, config.variant)?;
    if let Some(dir) = &config.dump_lp {
        dump_lp(&master.model, dir, "monolithic").map_err(|e| Error::io(dir, e))?;
    }
    let opts = SolveOptions {
        relative_gap: config.final_gap.min(config.stop_gap),
        time_limit: config.time_limit,
        threads: config.threads,
        ..SolveOptions::default()
    };
    let ms = master.solve(backend, &opts).map_err(|e| e.context("monolithic"))?;
    let gap = relative_gap(ms.best_bound, ms.objective);
    let status = match ms.status {
        SolveStatus::TimeLimit => OutcomeStatus::TimeLimit,
        _ if gap <= config.stop_gap => OutcomeStatus::Converged,
        _ => OutcomeStatus::GapReached,
    };
    let record = IterationRecord {
        iter: 1,
        lb: ms.best_bound,
        ub: ms.objective,
        gap,
        master_bound: ms.best_bound,
        master_objective: ms.objective,
        master_gap_used: opts.relative_gap,
        candidate_ub: ms.objective,
        scenario_added: false,
        pool_size: master.pool().len(),
        master_time: ms.seconds,
        subproblem_time: 0.0,
        complementarity: None,
    };
    observer(&record);
    Ok(SolveOutcome {
        algorithm: Algorithm::Monolithic,
        status,
        objective: ms.objective,
        bound: ms.best_bound,
        gap,
        plan: ms.plan,
        duals: Some(ms.duals),
        iterations: 1,
        seconds: start.elapsed().as_secs_f64(),
        log: vec![record],
        scenario_pool: master.pool().to_vec(),
    })
}
