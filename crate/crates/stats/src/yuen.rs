//! Yuen's two-sample t-test on trimmed means.

use serde::{Deserialize, Serialize};

use crate::distributions::{student_t_cdf, student_t_sf};
use crate::{Result, StatsError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YuenResult {
    pub statistic: f64,
    pub df: f64,
    /// P(T >= statistic): alternative "x is larger than y".
    pub p_greater: f64,
    /// P(T <= statistic): alternative "x is smaller than y".
    pub p_less: f64,
    pub trimmed_mean_x: f64,
    pub trimmed_mean_y: f64,
}

struct Trimmed {
    mean: f64,
    /// Squared standard error term (n - 1) s_w^2 / (h (h - 1)).
    d: f64,
    kept: usize,
}

fn trim_sample(sample: &[f64], trim: f64) -> Result<Trimmed> {
    let n = sample.len();
    let g = (trim * n as f64).floor() as usize;
    let kept = n.saturating_sub(2 * g);
    if kept < 2 {
        return Err(StatsError::TooSmallAfterTrim { kept });
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mean = sorted[g..n - g].iter().sum::<f64>() / kept as f64;
    let (lo, hi) = (sorted[g], sorted[n - g - 1]);
    let winsorized: Vec<f64> = sorted.iter().map(|v| v.clamp(lo, hi)).collect();
    let w_mean = winsorized.iter().sum::<f64>() / n as f64;
    let w_var = winsorized.iter().map(|v| (v - w_mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    let h = kept as f64;
    Ok(Trimmed { mean, d: (n as f64 - 1.0) * w_var / (h * (h - 1.0)), kept })
}

/// Yuen's t statistic for `trimmed_mean(x) - trimmed_mean(y)` with
/// Welch-style degrees of freedom. `trim` is the fraction cut from each tail.
pub fn yuen_t(x: &[f64], y: &[f64], trim: f64) -> Result<YuenResult> {
    if !(0.0..0.5).contains(&trim) {
        return Err(StatsError::InvalidParameter(format!("trim fraction {trim} not in [0, 0.5)")));
    }
    let tx = trim_sample(x, trim)?;
    let ty = trim_sample(y, trim)?;
    let diff = tx.mean - ty.mean;
    let d = tx.d + ty.d;
    let (statistic, df) = if d > 0.0 {
        let df = d * d / (tx.d * tx.d / (tx.kept as f64 - 1.0) + ty.d * ty.d / (ty.kept as f64 - 1.0));
        (diff / d.sqrt(), df)
    } else {
        let df = (tx.kept + ty.kept - 2) as f64;
        let t = if diff == 0.0 { 0.0 } else { diff.signum() * f64::INFINITY };
        (t, df)
    };
    Ok(YuenResult {
        statistic,
        df,
        p_greater: student_t_sf(statistic, df),
        p_less: student_t_cdf(statistic, df),
        trimmed_mean_x: tx.mean,
        trimmed_mean_y: ty.mean,
    })
}

/// Welch's t-test, i.e. Yuen's test without trimming.
pub fn welch_t(x: &[f64], y: &[f64]) -> Result<YuenResult> {
    yuen_t(x, y, 0.0)
}
