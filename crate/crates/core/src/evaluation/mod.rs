//! Out-of-sample scoring of investment plans under sampled demand.

mod stats;

use log::warn;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::algorithms::{run, AlgorithmConfig};
use crate::error::{Error, Result};
use crate::model::{moment_mean_as, InvestmentPlan, MomentVariant, NetworkInstance, Scenario, ScenarioOrigin};
use crate::reformulation::{build_deterministic, SecondStage};
use crate::solver::{Backend, SolveOptions};

pub use stats::{statistics, Statistics};

/// The four planning models compared out of sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PlanVariant {
    #[serde(rename = "DRO+DDU")]
    DroDdu,
    #[serde(rename = "DRO")]
    Dro,
    #[serde(rename = "DET+DDU")]
    DetDdu,
    #[serde(rename = "DET")]
    Det,
}

impl PlanVariant {
    pub const ALL: [PlanVariant; 4] = [Self::DroDdu, Self::Dro, Self::DetDdu, Self::Det];

    pub fn label(self) -> &'static str {
        match self {
            Self::DroDdu => "DRO+DDU",
            Self::Dro => "DRO",
            Self::DetDdu => "DET+DDU",
            Self::Det => "DET",
        }
    }
}

impl std::str::FromStr for PlanVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().replace('_', "+").as_str() {
            "DRO+DDU" => Ok(Self::DroDdu),
            "DRO" => Ok(Self::Dro),
            "DET+DDU" => Ok(Self::DetDdu),
            "DET" => Ok(Self::Det),
            _ => Err(format!("unknown plan variant `{s}`")),
        }
    }
}

impl std::fmt::Display for PlanVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct EvaluationSpec {
    pub n_scenarios: usize,
    pub seed: u64,
    /// Coefficient of variation of the normal demand draws.
    pub cv: f64,
    pub variants: Vec<PlanVariant>,
    /// Score every plan against scenarios drawn around the DRO+DDU plan's mean.
    pub common_mean: bool,
    /// Moment variant used for the mean of sampled demand.
    pub moment: MomentVariant,
}

impl Default for EvaluationSpec {
    fn default() -> Self {
        Self {
            n_scenarios: 1000,
            seed: 0,
            cv: 0.1,
            variants: PlanVariant::ALL.to_vec(),
            common_mean: false,
            moment: MomentVariant::Location,
        }
    }
}

impl EvaluationSpec {
    pub fn check(&self) -> Result<()> {
        if self.n_scenarios == 0 {
            return Err(Error::InvalidInput("at least one scenario is needed".into()));
        }
        if !(self.cv >= 0.0 && self.cv.is_finite()) {
            return Err(Error::InvalidInput("cv must be finite and nonnegative".into()));
        }
        Ok(())
    }
}

/// Draws `ξ_jt ~ N(μ_jt(plan), cv·μ_jt(plan))` truncated at zero.
pub fn sample_scenarios(instance: &NetworkInstance, plan: &InvestmentPlan, spec: &EvaluationSpec) -> Result<Vec<Scenario>> {
    spec.check()?;
    let (nd, nt) = (instance.n_demand(), instance.periods);
    let mut means = vec![vec![0.0; nt]; nd];
    for (j, row) in means.iter_mut().enumerate() {
        for (t, m) in row.iter_mut().enumerate() {
            *m = moment_mean_as(&instance.moment, spec.moment, plan, j, t)?;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let unit = Normal::new(0.0, 1.0).expect("standard normal");
    Ok((0..spec.n_scenarios)
        .map(|_| {
            let demand = means
                .iter()
                .map(|row| row.iter().map(|&m| (m + spec.cv * m * unit.sample(&mut rng)).max(0.0)).collect())
                .collect();
            Scenario::new(demand, ScenarioOrigin::Sampled)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PlanEvaluation {
    pub investment_cost: f64,
    /// Total cost minus revenue per scenario.
    pub values: Vec<f64>,
    pub statistics: Statistics,
}

/// Scores `plan` on each scenario: investment cost plus optimal operations minus revenue.
pub fn evaluate_plan(
    instance: &NetworkInstance,
    plan: &InvestmentPlan,
    scenarios: &[Scenario],
    backend: &dyn Backend,
) -> Result<PlanEvaluation> {
    let violations = plan.check(instance);
    if !violations.is_empty() {
        return Err(Error::InvalidInput(format!("infeasible plan: {}", violations.join("; "))));
    }
    if scenarios.iter().flat_map(|s| s.demand.iter().flatten()).any(|v| !(*v >= 0.0)) {
        return Err(Error::InvalidInput("scenario demand must be nonnegative".into()));
    }
    let stage = SecondStage::new(instance);
    let investment_cost = plan.investment_cost(instance);
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(scenarios.len().max(1));
    let chunk = scenarios.len().div_ceil(workers).max(1);
    let parts: Vec<Result<Vec<f64>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = scenarios
            .chunks(chunk)
            .map(|part| {
                let stage = &stage;
                scope.spawn(move || {
                    part.iter()
                        .map(|s| stage.solve(plan, &s.demand, backend).map(|v| investment_cost + v.value))
                        .collect::<Result<Vec<f64>>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(Error::InvalidInput("evaluation worker panicked".into()))))
            .collect()
    });
    let mut values = Vec::with_capacity(scenarios.len());
    for p in parts {
        values.extend(p?);
    }
    let statistics = statistics(&values)?;
    Ok(PlanEvaluation {
        investment_cost,
        values,
        statistics,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VariantRow {
    pub variant: PlanVariant,
    /// In-sample objective of the planning model.
    pub objective: f64,
    pub plan: InvestmentPlan,
    pub evaluation: PlanEvaluation,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EvaluationReport {
    pub spec: EvaluationSpec,
    pub rows: Vec<VariantRow>,
    /// Variants whose planning solve failed, with the error message.
    pub failures: Vec<(PlanVariant, String)>,
}

pub const CSV_HEADER: &str = "variant,average,quantile50,quantile75,quantile90,cvar50,cvar75,cvar90,investmentCost";

impl EvaluationReport {
    pub fn row(&self, variant: PlanVariant) -> Option<&VariantRow> {
        self.rows.iter().find(|r| r.variant == variant)
    }

    /// One line per variant with the summary statistics.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let s = &r.evaluation.statistics;
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                r.variant, s.average, s.quantile50, s.quantile75, s.quantile90, s.cvar50, s.cvar75, s.cvar90, r.evaluation.investment_cost
            ));
        }
        out
    }
}

fn plan_for(
    instance: &NetworkInstance,
    variant: PlanVariant,
    config: &AlgorithmConfig,
    backend: &dyn Backend,
) -> Result<(InvestmentPlan, f64)> {
    let det = |ddu: bool| -> Result<(InvestmentPlan, f64)> {
        let model = build_deterministic(instance, config.variant, ddu)?;
        let opts = SolveOptions {
            relative_gap: config.final_gap,
            time_limit: config.time_limit,
            threads: config.threads,
            ..SolveOptions::default()
        };
        let sol = model.solve(backend, &opts)?;
        Ok((sol.plan, sol.objective))
    };
    match variant {
        PlanVariant::DroDdu => run(instance, config, backend).map(|o| (o.plan, o.objective)),
        PlanVariant::Dro => run(&instance.without_dependency(), config, backend).map(|o| (o.plan, o.objective)),
        PlanVariant::DetDdu => det(true),
        PlanVariant::Det => det(false),
    }
}

/// Plans with each requested model and scores all plans on sampled demand with the
/// instance's true dependency. Solve failures are reported, not raised.
pub fn compare_variants(
    instance: &NetworkInstance,
    spec: &EvaluationSpec,
    config: &AlgorithmConfig,
    backend: &dyn Backend,
) -> Result<EvaluationReport> {
    spec.check()?;
    let mut planned = Vec::new();
    let mut failures = Vec::new();
    for &v in &spec.variants {
        match plan_for(instance, v, config, backend) {
            Ok(p) => planned.push((v, p)),
            Err(e) => {
                warn!("{v} planning failed: {e}");
                failures.push((v, e.to_string()));
            }
        }
    }
    let common = if spec.common_mean {
        let reference = match planned.iter().find(|(v, _)| *v == PlanVariant::DroDdu) {
            Some((_, (plan, _))) => plan.clone(),
            None => plan_for(instance, PlanVariant::DroDdu, config, backend)?.0,
        };
        Some(sample_scenarios(instance, &reference, spec)?)
    } else {
        None
    };
    let mut rows = Vec::new();
    for (variant, (plan, objective)) in planned {
        let scenarios = match &common {
            Some(s) => s.clone(),
            None => sample_scenarios(instance, &plan, spec)?,
        };
        let evaluation = evaluate_plan(instance, &plan, &scenarios, backend)?;
        rows.push(VariantRow {
            variant,
            objective,
            plan,
            evaluation,
        });
    }
    Ok(EvaluationReport {
        spec: spec.clone(),
        rows,
        failures,
    })
}
