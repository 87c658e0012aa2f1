//! Domain types, the ambiguity-set parameters and the decision-dependent moment functions.

mod instance;
mod moment;
mod plan;
mod validate;

pub use instance::{
    BigMOverrides, CapacityMoment, CapacityRange, CostSchedule, Grid, MomentSpec, MomentVariant,
    NetworkInstance, Node, NodeRole, SupportKind, SupportSet,
};
pub use moment::{lambda_from_distances, moment_mean, moment_mean_as, selected_range, uplift};
pub use plan::{
    DualMomentVars, InvestmentPlan, OperationalPlan, Products, Scenario, ScenarioOrigin,
    SubproblemDualVars,
};
pub use validate::{validate_instance, Violation};
