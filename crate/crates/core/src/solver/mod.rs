//! Solver-agnostic LP/MILP building and solving.
//!
//! Models are assembled in a [`LinearModel`] and handed to a [`Backend`]. The default
//! backend is HiGHS; other engines plug in through [`backend_from_name`].

mod highs_backend;
mod lp_format;
mod model;

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use highs_backend::HighsBackend;
pub use lp_format::to_lp_string;
pub use model::{Cmp, Constraint, LinearModel, Sense, VarKind, VarRef, Variable};

/// Environment variable overriding the configured engine.
pub const ENGINE_ENV: &str = "DDRO_SOLVER";

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("unknown solver engine `{0}`")]
    UnknownEngine(String),
    #[error("{0}")]
    Backend(String),
    #[error("model `{model}` finished with status {status:?}")]
    Status { model: String, status: SolveStatus },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    GapReached,
    TimeLimit,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub relative_gap: f64,
    pub absolute_gap: f64,
    pub time_limit: Option<f64>,
    pub threads: Option<u32>,
    pub integrality_tolerance: Option<f64>,
    pub random_seed: Option<u32>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            relative_gap: 1e-9,
            absolute_gap: 1e-9,
            time_limit: None,
            threads: None,
            integrality_tolerance: None,
            random_seed: None,
        }
    }
}

impl SolveOptions {
    pub fn with_gap(relative_gap: f64) -> Self {
        Self {
            relative_gap,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub status: SolveStatus,
    /// Incumbent objective, NaN when no feasible point is known.
    pub objective: f64,
    /// Proven bound: a lower bound for minimisation, an upper bound for maximisation.
    pub best_bound: f64,
    pub values: Vec<f64>,
    pub seconds: f64,
}

impl SolveResult {
    pub fn value(&self, var: VarRef) -> f64 {
        self.values[var.index()]
    }

    pub fn has_solution(&self) -> bool {
        !self.values.is_empty()
    }

    /// Errors unless the solve ended with a usable solution.
    pub fn require_solution(self, model: &str) -> Result<Self, SolverError> {
        match self.status {
            SolveStatus::Optimal | SolveStatus::GapReached => Ok(self),
            SolveStatus::TimeLimit if self.has_solution() => Ok(self),
            status => Err(SolverError::Status {
                model: model.to_string(),
                status,
            }),
        }
    }
}

/// A MILP engine.
pub trait Backend: Send + Sync {
    fn name(&self) -> &'static str;
    fn solve(&self, model: &LinearModel, opts: &SolveOptions) -> Result<SolveResult, SolverError>;
}

/// Engine selection and threading, from configuration keys `solver.engine` and `solver.threads`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_engine")]
    pub engine: String,
    #[serde(default)]
    pub threads: Option<u32>,
}

fn default_engine() -> String {
    "highs".into()
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            engine: default_engine(),
            threads: None,
        }
    }
}

impl SolverConfig {
    /// Applies the `DDRO_SOLVER` override if set.
    pub fn with_env(mut self) -> Self {
        if let Ok(engine) = std::env::var(ENGINE_ENV) {
            if !engine.trim().is_empty() {
                self.engine = engine.trim().to_string();
            }
        }
        self
    }

    pub fn backend(&self) -> Result<Box<dyn Backend>, SolverError> {
        backend_from_name(&self.engine)
    }
}

pub fn backend_from_name(name: &str) -> Result<Box<dyn Backend>, SolverError> {
    match name.to_ascii_lowercase().as_str() {
        "highs" => Ok(Box::new(HighsBackend)),
        other => Err(SolverError::UnknownEngine(other.to_string())),
    }
}

/// Writes `model` in LP format to `dir/<file_stem>.lp`.
pub fn dump_lp(model: &LinearModel, dir: &Path, file_stem: &str) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(format!("{file_stem}.lp")), to_lp_string(model))
}
