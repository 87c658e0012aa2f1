use serde::{Deserialize, Serialize};

use crate::model::{DualMomentVars, InvestmentPlan, Scenario};

use super::config::Algorithm;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IterationRecord {
    pub iter: usize,
    /// Best proven lower bound so far.
    pub lb: f64,
    /// Best upper bound so far.
    pub ub: f64,
    pub gap: f64,
    /// This iteration's master bound before the running maximum.
    pub master_bound: f64,
    pub master_objective: f64,
    pub master_gap_used: f64,
    pub candidate_ub: f64,
    pub scenario_added: bool,
    pub pool_size: usize,
    pub master_time: f64,
    pub subproblem_time: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub complementarity: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OutcomeStatus {
    Converged,
    /// Monolithic solve stopped by the backend's own gap.
    GapReached,
    TimeLimit,
    IterationLimit,
    /// A duplicate scenario arrived under an exact master with the gap still open.
    Stalled,
}

impl OutcomeStatus {
    pub fn is_success(self) -> bool {
        matches!(self, Self::Converged | Self::GapReached)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SolveOutcome {
    pub algorithm: Algorithm,
    pub status: OutcomeStatus,
    /// Upper bound.
    pub objective: f64,
    /// Lower bound.
    pub bound: f64,
    pub gap: f64,
    pub plan: InvestmentPlan,
    /// Moment duals of the master that produced the incumbent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duals: Option<DualMomentVars>,
    pub iterations: usize,
    pub seconds: f64,
    pub log: Vec<IterationRecord>,
    pub scenario_pool: Vec<Scenario>,
}

/// Checks the bound discipline of a log: LB nondecreasing, UB nonincreasing and
/// `LB ≤ UB + tol·|UB|`. Returns the first offending message.
pub fn check_bounds(log: &[IterationRecord], tol: f64) -> Result<(), String> {
    let mut prev: Option<&IterationRecord> = None;
    for r in log {
        if let Some(p) = prev {
            if r.lb < p.lb {
                return Err(format!("iteration {}: LB decreased {} -> {}", r.iter, p.lb, r.lb));
            }
            if r.ub > p.ub {
                return Err(format!("iteration {}: UB increased {} -> {}", r.iter, p.ub, r.ub));
            }
        }
        if r.ub.is_finite() && r.lb > r.ub + tol * r.ub.abs().max(1.0) {
            return Err(format!("iteration {}: LB {} above UB {}", r.iter, r.lb, r.ub));
        }
        prev = Some(r);
    }
    Ok(())
}
