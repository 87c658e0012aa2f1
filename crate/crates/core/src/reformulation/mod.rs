//! Optimization models built against the solver contract: scenario and Benders masters,
//! the monolithic finite-support model, worst-case subproblems, the recourse LP and its
//! dual, and the deterministic baseline.

mod bigm;
mod blocks;
mod deterministic;
mod master;
mod scaled;
mod second_stage;
mod subproblem;

pub use bigm::{default_big_m, BigMPolicy, DEFAULT_SAFETY_FACTOR};
pub use deterministic::{build_deterministic, DeterministicModel, DeterministicSolution};
pub use master::{
    build_benders_master, build_benders_master_with, build_master, build_master_with,
    build_monolithic_discrete, same_scenario, within_support, BendersCut, CutMode, MasterModel,
    MasterSolution, MasterValues, DEDUP_TOL,
};
pub use scaled::{ScaledData, Units};
pub use second_stage::{build_subproblem_discrete, SecondStage, SecondStageValue};
pub use subproblem::{
    build_subproblem_continuous, build_subproblem_periods, SubproblemModel, SubproblemSolution,
};

use crate::error::{Error, Result};
use crate::model::{MomentVariant, NetworkInstance};

/// Errors if the instance lacks the data `variant` needs.
pub fn check_variant(instance: &NetworkInstance, variant: MomentVariant) -> Result<()> {
    let m = &instance.moment;
    match variant {
        MomentVariant::Location => Ok(()),
        MomentVariant::LocationBounded if m.bound.is_none() => Err(Error::MissingMomentData(variant, "bound")),
        MomentVariant::Capacity if m.capacity.is_none() => Err(Error::MissingMomentData(variant, "capacity")),
        _ => Ok(()),
    }
}
