//! Decomposition algorithms: C&CG+, classical C&CG, Benders, and the monolithic
//! finite-support model as a reference.

mod config;
mod driver;
mod gap;
mod log;
mod pregen;

pub use config::{Algorithm, AlgorithmConfig};
pub use driver::{
    run, run_benders, run_ccg_classic, run_ccg_plus, run_monolithic, run_with_observer, solve_worst_case,
    Observer, SubproblemMode, WorstCase,
};
pub use gap::{candidate_upper_bound, relative_gap, update_relative_gap};
pub use log::{check_bounds, IterationRecord, OutcomeStatus, SolveOutcome};
pub use pregen::pregenerate_scenarios;
