//! Boxplot summary statistics.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("cannot summarize an empty sample")]
    Empty,
    #[error("sample contains a non-finite value")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxplotStats {
    pub mean: f64,
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub n: usize,
}

impl BoxplotStats {
    /// Degenerate box for a single known value.
    pub fn point(value: f64) -> Self {
        Self { mean: value, median: value, q25: value, q75: value, whisker_low: value, whisker_high: value, n: 1 }
    }

    pub fn iqr(&self) -> f64 {
        self.q75 - self.q25
    }
}

/// Quantile of sorted data by linear interpolation between order statistics
/// (position `p·(n−1)`, the default in R and NumPy).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

/// Mean, quartiles and Tukey whiskers (furthest datum within 1.5·IQR, never inside the box).
pub fn summarize(values: &[f64]) -> Result<BoxplotStats, StatsError> {
    if values.is_empty() {
        return Err(StatsError::Empty);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    // summing in sorted order keeps the mean independent of input order
    let mean = sorted.iter().sum::<f64>() / sorted.len() as f64;
    let q25 = quantile_sorted(&sorted, 0.25);
    let median = quantile_sorted(&sorted, 0.5);
    let q75 = quantile_sorted(&sorted, 0.75);
    let reach = 1.5 * (q75 - q25);
    let whisker_low = sorted.iter().copied().find(|v| *v >= q25 - reach).map_or(q25, |v| v.min(q25));
    let whisker_high = sorted.iter().rev().copied().find(|v| *v <= q75 + reach).map_or(q75, |v| v.max(q75));
    Ok(BoxplotStats { mean, median, q25, q75, whisker_low, whisker_high, n: sorted.len() })
}
