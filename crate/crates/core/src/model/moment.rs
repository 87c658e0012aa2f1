//! Decision-dependent mean demand and the distance-based impact coefficients.

use super::instance::{CapacityMoment, Grid, MomentSpec, MomentVariant};
use super::plan::InvestmentPlan;
use crate::error::{Error, Result};

/// `μ_jt(plan)` for the spec's own variant.
pub fn moment_mean(spec: &MomentSpec, plan: &InvestmentPlan, j: usize, t: usize) -> Result<f64> {
    moment_mean_as(spec, spec.variant, plan, j, t)
}

/// `μ_jt(plan)` evaluated with an explicit variant.
pub fn moment_mean_as(
    spec: &MomentSpec,
    variant: MomentVariant,
    plan: &InvestmentPlan,
    j: usize,
    t: usize,
) -> Result<f64> {
    let base = *spec
        .base_mean
        .get(j)
        .and_then(|row| row.get(t))
        .ok_or_else(|| Error::Index(format!("moment_mean({j},{t})")))?;
    let mut uplift = uplift(spec, variant, plan, j, t)?;
    if spec.is_bounded(variant) {
        let bound = spec
            .bound
            .as_ref()
            .ok_or(Error::MissingMomentData(variant, "bound"))?;
        uplift = uplift.min(bound[j][t]);
    }
    Ok(base * (1.0 + uplift))
}

/// Relative uplift `Σ_i λ_ij x_it` (location) or `Σ_i Σ_r λᶜ_ijr e_itr` (capacity), uncapped.
pub fn uplift(
    spec: &MomentSpec,
    variant: MomentVariant,
    plan: &InvestmentPlan,
    j: usize,
    t: usize,
) -> Result<f64> {
    let ns = plan.open.len();
    if t >= spec.base_mean.first().map_or(0, Vec::len) || j >= spec.base_mean.len() {
        return Err(Error::Index(format!("uplift({j},{t})")));
    }
    match variant {
        MomentVariant::Location | MomentVariant::LocationBounded => {
            Ok((0..ns).map(|i| spec.lambda[i][j] * plan.x(i, t)).sum())
        }
        MomentVariant::Capacity => {
            let cap = spec
                .capacity
                .as_ref()
                .ok_or(Error::MissingMomentData(variant, "capacity"))?;
            let mut total = 0.0;
            for i in 0..ns {
                let r = selected_range(cap, plan, i, t)?;
                total += cap.lambda[i][j][r];
            }
            Ok(total)
        }
    }
}

/// Range index for `(i, t)`: the plan's own indicator if present, otherwise the first
/// range containing the cumulative capacity.
pub fn selected_range(cap: &CapacityMoment, plan: &InvestmentPlan, i: usize, t: usize) -> Result<usize> {
    if let Some(r) = plan.range.as_ref().and_then(|rows| rows.get(i)).and_then(|row| row.get(t)) {
        return Ok(*r);
    }
    let total = plan.cumulative(i, t);
    cap.ranges[i][t]
        .iter()
        .position(|range| range.contains(total, 1e-6))
        .ok_or_else(|| Error::Index(format!("no capacity range holds {total} MW at ({i},{t})")))
}

/// `λ_ij = exp(−Δ_ij / scale)` normalised so every demand column sums to `target_sum`.
/// `distance` is indexed `[supply][demand]`.
pub fn lambda_from_distances(distance: &Grid, scale: f64, target_sum: f64) -> Result<Grid> {
    if !(scale > 0.0) {
        return Err(Error::InvalidInput(format!("lambda scale must be positive, got {scale}")));
    }
    if !(0.0..=1.0).contains(&target_sum) {
        return Err(Error::InvalidInput(format!("lambda target sum {target_sum} outside [0, 1]")));
    }
    let ns = distance.len();
    let nd = distance.first().map_or(0, Vec::len);
    let mut lambda = vec![vec![0.0; nd]; ns];
    if target_sum == 0.0 {
        return Ok(lambda);
    }
    for j in 0..nd {
        let weights: Vec<f64> = (0..ns).map(|i| (-distance[i][j] / scale).exp()).collect();
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0) || !sum.is_finite() {
            return Err(Error::InvalidInput(format!("lambda column {j} cannot be normalised")));
        }
        for i in 0..ns {
            lambda[i][j] = target_sum * weights[i] / sum;
        }
    }
    Ok(lambda)
}
