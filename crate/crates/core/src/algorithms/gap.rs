use crate::reformulation::MasterValues;

/// Optimality gap `(UB − LB)/|UB|`. Infinite while no incumbent exists.
pub fn relative_gap(lb: f64, ub: f64) -> f64 {
    if !ub.is_finite() || !lb.is_finite() {
        return f64::INFINITY;
    }
    let diff = ub - lb;
    if diff <= 1e-12 * ub.abs().max(1.0) {
        return 0.0;
    }
    if ub == 0.0 {
        return f64::INFINITY;
    }
    diff / ub.abs()
}

/// Master gap for the next iteration: `max(min(δⁱ, f·gap), δᶠ)`, δⁱ without an incumbent.
pub fn update_relative_gap(initial: f64, last: f64, factor: f64, lb: f64, ub: f64) -> f64 {
    if !ub.is_finite() {
        return initial;
    }
    let gap = relative_gap(lb, ub);
    (factor * gap).min(initial).max(last)
}

/// First-stage cost plus moment pricing at the master values plus the worst-case
/// recourse of each period.
pub fn candidate_upper_bound(master: &MasterValues, subproblem_values: &[f64]) -> f64 {
    master.first_stage_cost + master.moment_cost + subproblem_values.iter().sum::<f64>()
}
