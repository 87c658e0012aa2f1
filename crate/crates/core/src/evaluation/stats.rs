use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Summary of sampled costs (lower is better).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Statistics {
    pub average: f64,
    pub quantile50: f64,
    pub quantile75: f64,
    pub quantile90: f64,
    pub cvar50: f64,
    pub cvar75: f64,
    pub cvar90: f64,
}

// Guards ceil against products like 0.1 * 1000 landing a hair above an integer.
fn ceil_count(x: f64) -> usize {
    (x - 1e-9).ceil().max(1.0) as usize
}

/// Nearest-rank quantile of ascending `sorted`.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let rank = ceil_count(q * sorted.len() as f64).min(sorted.len());
    sorted[rank - 1]
}

/// Mean of the `ceil((1 − q) n)` largest costs.
fn cvar(sorted: &[f64], q: f64) -> f64 {
    let k = ceil_count((1.0 - q) * sorted.len() as f64).min(sorted.len());
    sorted[sorted.len() - k..].iter().sum::<f64>() / k as f64
}

pub fn statistics(values: &[f64]) -> Result<Statistics> {
    if values.is_empty() {
        return Err(Error::InvalidInput("statistics of an empty sample".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("statistics need finite values".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(Statistics {
        average: values.iter().sum::<f64>() / values.len() as f64,
        quantile50: quantile(&sorted, 0.5),
        quantile75: quantile(&sorted, 0.75),
        quantile90: quantile(&sorted, 0.9),
        cvar50: cvar(&sorted, 0.5),
        cvar75: cvar(&sorted, 0.75),
        cvar90: cvar(&sorted, 0.9),
    })
}
