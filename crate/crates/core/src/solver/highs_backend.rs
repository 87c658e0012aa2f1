use std::time::Instant;

use highs::{HighsModelStatus, HighsSolutionStatus, RowProblem};

use super::model::{Cmp, LinearModel, Sense, VarKind};
use super::{Backend, SolveOptions, SolveResult, SolveStatus, SolverError};

/// HiGHS through the `highs` crate. Each solve builds a fresh HiGHS instance.
#[derive(Debug, Default, Clone, Copy)]
pub struct HighsBackend;

fn apply_options(model: &mut highs::Model, opts: &SolveOptions, mip: bool) {
    model.make_quiet();
    let _ = model.try_set_option("presolve", "on");
    if mip {
        let _ = model.try_set_option("mip_rel_gap", opts.relative_gap.max(0.0));
        let _ = model.try_set_option("mip_abs_gap", opts.absolute_gap.max(0.0));
        if let Some(tol) = opts.integrality_tolerance {
            let _ = model.try_set_option("mip_feasibility_tolerance", tol);
        }
    }
    if let Some(limit) = opts.time_limit {
        let _ = model.try_set_option("time_limit", limit.max(0.01));
    }
    if let Some(threads) = opts.threads {
        let _ = model.try_set_option("threads", threads.max(1) as i32);
    }
    if let Some(seed) = opts.random_seed {
        let _ = model.try_set_option("random_seed", seed as i32);
    }
}

impl Backend for HighsBackend {
    fn name(&self) -> &'static str {
        "highs"
    }

    fn solve(&self, lm: &LinearModel, opts: &SolveOptions) -> Result<SolveResult, SolverError> {
        let start = Instant::now();
        if lm.num_vars() == 0 {
            return Ok(SolveResult {
                status: SolveStatus::Optimal,
                objective: lm.offset,
                best_bound: lm.offset,
                values: Vec::new(),
                seconds: 0.0,
            });
        }
        let mut pb = RowProblem::default();
        let cols: Vec<_> = lm
            .variables()
            .iter()
            .map(|v| match v.kind {
                VarKind::Continuous => pb.add_column(v.objective, v.lower..=v.upper),
                VarKind::Binary => pb.add_integer_column(v.objective, v.lower..=v.upper),
            })
            .collect();
        for c in lm.constraints() {
            let row: Vec<_> = c.terms.iter().map(|&(v, a)| (cols[v.index()], a)).collect();
            match c.cmp {
                Cmp::Le => pb.add_row(..=c.rhs, &row),
                Cmp::Ge => pb.add_row(c.rhs.., &row),
                Cmp::Eq => pb.add_row(c.rhs..=c.rhs, &row),
            }
        }
        let sense = match lm.sense {
            Sense::Minimize => highs::Sense::Minimise,
            Sense::Maximize => highs::Sense::Maximise,
        };
        let mip = lm.is_mip();
        let mut model = pb
            .try_optimise(sense)
            .map_err(|s| SolverError::Backend(format!("loading model `{}`: {s:?}", lm.name)))?;
        apply_options(&mut model, opts, mip);
        let solved = model
            .try_solve()
            .map_err(|s| SolverError::Backend(format!("running `{}`: {s:?}", lm.name)))?;
        let seconds = start.elapsed().as_secs_f64();
        let has_solution = solved.primal_solution_status() == HighsSolutionStatus::Feasible;
        let values = if has_solution {
            solved.get_solution().columns().to_vec()
        } else {
            Vec::new()
        };
        let objective = if has_solution {
            lm.evaluate(&values)
        } else {
            f64::NAN
        };
        let dual_bound = || -> f64 {
            if mip {
                solved
                    .double_info_value(c"mip_dual_bound")
                    .map(|b| b + lm.offset)
                    .unwrap_or(f64::NAN)
            } else {
                objective
            }
        };
        let status = match solved.status() {
            HighsModelStatus::Optimal => {
                if mip && solved.mip_gap() > 1e-9 {
                    SolveStatus::GapReached
                } else {
                    SolveStatus::Optimal
                }
            }
            HighsModelStatus::ReachedTimeLimit => SolveStatus::TimeLimit,
            HighsModelStatus::Infeasible => SolveStatus::Infeasible,
            HighsModelStatus::Unbounded | HighsModelStatus::UnboundedOrInfeasible => {
                SolveStatus::Unbounded
            }
            other => {
                return Err(SolverError::Backend(format!(
                    "`{}` ended with status {other:?}",
                    lm.name
                )))
            }
        };
        let best_bound = match status {
            SolveStatus::Optimal | SolveStatus::GapReached | SolveStatus::TimeLimit => {
                let b = dual_bound();
                // Clamp to the incumbent so the bound never crosses it on rounding noise.
                match (lm.sense, has_solution && b.is_finite()) {
                    (Sense::Minimize, true) => b.min(objective),
                    (Sense::Maximize, true) => b.max(objective),
                    _ => b,
                }
            }
            _ => f64::NAN,
        };
        if matches!(status, SolveStatus::Optimal | SolveStatus::GapReached) && !has_solution {
            return Err(SolverError::Backend(format!(
                "`{}` reported optimal without a primal solution",
                lm.name
            )));
        }
        Ok(SolveResult {
            status,
            objective,
            best_bound,
            values,
            seconds,
        })
    }
}
