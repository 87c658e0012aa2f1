use crate::model::{Scenario, ScenarioOrigin, SupportKind, SupportSet};
use crate::reformulation::same_scenario;

/// One scenario per `(j, t)` with that entry at its upper bound and the rest at the
/// lower bound, ordered by demand node then period. For a finite support only the
/// listed scenarios matching a pattern are kept.
pub fn pregenerate_scenarios(support: &SupportSet) -> Vec<Scenario> {
    let nd = support.lower.len();
    let mut out = Vec::new();
    for j in 0..nd {
        for t in 0..support.lower[j].len() {
            let mut demand = support.lower.clone();
            demand[j][t] = support.upper[j][t];
            out.push(Scenario::new(demand, ScenarioOrigin::Pregenerated));
        }
    }
    match &support.kind {
        SupportKind::Continuous => out,
        SupportKind::Discrete(list) => out
            .into_iter()
            .filter(|p| list.iter().any(|s| same_scenario(&s.demand, &p.demand)))
            .collect(),
    }
}
