use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::MomentVariant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    #[serde(rename = "ccg+")]
    CcgPlus,
    #[serde(rename = "ccg")]
    CcgClassic,
    Benders,
    Monolithic,
}

impl std::str::FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ccg+" | "ccg-plus" => Ok(Self::CcgPlus),
            "ccg" => Ok(Self::CcgClassic),
            "benders" => Ok(Self::Benders),
            "monolithic" => Ok(Self::Monolithic),
            other => Err(format!("unknown algorithm `{other}`")),
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::CcgPlus => "ccg+",
            Self::CcgClassic => "ccg",
            Self::Benders => "benders",
            Self::Monolithic => "monolithic",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AlgorithmConfig {
    pub algorithm: Algorithm,
    pub variant: MomentVariant,
    /// Stop when `(UB − LB)/|UB|` falls to this value.
    pub stop_gap: f64,
    pub time_limit: Option<f64>,
    pub max_iterations: Option<usize>,
    /// First master gap of the inexact schedule.
    pub initial_gap: f64,
    /// Floor of the inexact schedule, also the gap of exact master solves.
    pub final_gap: f64,
    /// Share of the current optimality gap used as the next master gap.
    pub gap_factor: f64,
    pub pregenerate: bool,
    pub per_period_cuts: bool,
    pub parallel_subproblems: bool,
    /// Relative gap for worst-case subproblems.
    pub subproblem_gap: f64,
    pub threads: Option<u32>,
    #[serde(skip)]
    pub dump_lp: Option<PathBuf>,
}

impl AlgorithmConfig {
    /// Defaults for `algorithm`: the enhancements are on only for C&CG+.
    pub fn new(algorithm: Algorithm) -> Self {
        let plus = algorithm == Algorithm::CcgPlus;
        Self {
            algorithm,
            variant: MomentVariant::Location,
            stop_gap: 1e-3,
            time_limit: None,
            max_iterations: None,
            initial_gap: 0.05,
            final_gap: 1e-4,
            gap_factor: 0.5,
            pregenerate: plus,
            per_period_cuts: plus,
            parallel_subproblems: plus,
            subproblem_gap: 1e-7,
            threads: None,
            dump_lp: None,
        }
    }

    pub fn with_variant(mut self, variant: MomentVariant) -> Self {
        self.variant = variant;
        self
    }

    pub fn with_stop_gap(mut self, gap: f64) -> Self {
        self.stop_gap = gap;
        self.final_gap = self.final_gap.min(gap / 10.0);
        self.initial_gap = self.initial_gap.max(self.final_gap);
        self
    }

    pub fn with_time_limit(mut self, seconds: f64) -> Self {
        self.time_limit = Some(seconds);
        self
    }

    pub fn check(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidInput(m.to_string()));
        if !(self.stop_gap >= 0.0) {
            return bad("stop gap must be nonnegative");
        }
        if !(self.final_gap >= 0.0 && self.final_gap <= self.initial_gap) {
            return bad("final master gap must lie in [0, initial gap]");
        }
        if !(self.gap_factor > 0.0 && self.gap_factor < 1.0) {
            return bad("gap factor must lie in (0, 1)");
        }
        if self.time_limit.is_some_and(|t| !(t > 0.0)) {
            return bad("time limit must be positive");
        }
        Ok(())
    }
}
