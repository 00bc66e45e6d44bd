//! Two one-sided tests (TOST) for equivalence of two systems.
//!
//! Equivalence within `±epsilon` is concluded when both one-sided nulls
//! `H_lo: delta <= -epsilon` and `H_hi: delta >= +epsilon` are rejected at
//! `alpha`. The reported p-value is the larger of the two one-sided p-values.

use serde::{Deserialize, Serialize};

use crate::distributions::{normal_sf, student_t_sf};
use crate::proportions::{pooled_z, Direction};
use crate::yuen::yuen_t;
use crate::{Result, StatsError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TostFlavor {
    /// Success proportions, one-sided pooled z-tests.
    Proportions,
    /// Rating samples, one-sided Yuen tests.
    Likert,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TostSpec {
    pub epsilon: f64,
    pub alpha: f64,
    pub flavor: TostFlavor,
    /// Continuity correction for the proportions flavor.
    #[serde(default = "default_true")]
    pub continuity: bool,
    /// Tail trim fraction for the Likert flavor.
    #[serde(default = "default_trim")]
    pub trim: f64,
}

fn default_true() -> bool {
    true
}

fn default_trim() -> f64 {
    0.2
}

/// Width of the 6-point rating scale used by the questionnaire.
pub const LIKERT_RANGE: f64 = 5.0;

impl TostSpec {
    /// Absolute margin of 10 percentage points on proportions.
    pub fn proportions() -> Self {
        Self { epsilon: 0.10, alpha: 0.05, flavor: TostFlavor::Proportions, continuity: true, trim: 0.2 }
    }

    /// Margin of 10% of the 6-point scale (0.5 points) on ratings.
    pub fn likert() -> Self {
        Self { epsilon: 0.10 * LIKERT_RANGE, alpha: 0.05, flavor: TostFlavor::Likert, continuity: true, trim: 0.2 }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(StatsError::InvalidParameter(format!("epsilon {} must be positive", self.epsilon)));
        }
        if !(self.alpha > 0.0 && self.alpha < 0.5) {
            return Err(StatsError::InvalidParameter(format!("alpha {} not in (0, 0.5)", self.alpha)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TostData {
    Proportions { a_succ: u64, a_n: u64, b_succ: u64, b_n: u64 },
    Likert { x: Vec<f64>, y: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceResult {
    /// Observed difference a - b (proportions or trimmed means).
    pub delta: f64,
    pub epsilon: f64,
    pub statistic_lo: f64,
    pub statistic_hi: f64,
    pub p_lo: f64,
    pub p_hi: f64,
    pub p_tost: f64,
    pub equivalent: bool,
    /// Even an observed difference of zero could not reach significance.
    pub underpowered: bool,
    pub test: String,
}

/// Runs the TOST procedure for `spec.flavor` on `data`.
pub fn tost(data: &TostData, spec: &TostSpec) -> Result<EquivalenceResult> {
    spec.validate()?;
    let eps = spec.epsilon;
    let (delta, lo, hi, underpowered, test) = match (data, spec.flavor) {
        (&TostData::Proportions { a_succ, a_n, b_succ, b_n }, TostFlavor::Proportions) => {
            let lo = pooled_z(a_succ, a_n, b_succ, b_n, -eps, Direction::Greater, spec.continuity)?;
            let hi = pooled_z(a_succ, a_n, b_succ, b_n, eps, Direction::Less, spec.continuity)?;
            let delta = a_succ as f64 / a_n as f64 - b_succ as f64 / b_n as f64;
            let inv = 1.0 / a_n as f64 + 1.0 / b_n as f64;
            let pooled = (a_succ + b_succ) as f64 / (a_n + b_n) as f64;
            let se = (pooled * (1.0 - pooled) * inv).sqrt();
            let cc = if spec.continuity { 0.5 * inv } else { 0.0 };
            let best_case = if se > 0.0 { normal_sf((eps - cc) / se) } else { 0.0 };
            let test = if spec.continuity { "pooled-z-cc" } else { "pooled-z" };
            (delta, lo, hi, best_case >= spec.alpha, test)
        }
        (TostData::Likert { x, y }, TostFlavor::Likert) => {
            let plain = yuen_t(x, y, spec.trim)?;
            let up: Vec<f64> = x.iter().map(|v| v + eps).collect();
            let down: Vec<f64> = x.iter().map(|v| v - eps).collect();
            let lo = yuen_t(&up, y, spec.trim)?;
            let hi = yuen_t(&down, y, spec.trim)?;
            let delta = plain.trimmed_mean_x - plain.trimmed_mean_y;
            let se = if plain.statistic != 0.0 && plain.statistic.is_finite() {
                delta / plain.statistic
            } else {
                // delta is zero: recover the standard error from the shifted test.
                eps / lo.statistic
            };
            let best_case = if se.is_finite() && se > 0.0 { student_t_sf(eps / se, plain.df) } else { 0.0 };
            let lo = crate::TestStatistic { statistic: lo.statistic, p: lo.p_greater };
            let hi = crate::TestStatistic { statistic: hi.statistic, p: hi.p_less };
            (delta, lo, hi, best_case >= spec.alpha, "yuen")
        }
        (TostData::Proportions { .. }, TostFlavor::Likert) => {
            return Err(StatsError::FlavorMismatch("likert flavor needs rating samples"))
        }
        (TostData::Likert { .. }, TostFlavor::Proportions) => {
            return Err(StatsError::FlavorMismatch("proportions flavor needs success counts"))
        }
    };
    let p_tost = lo.p.max(hi.p);
    Ok(EquivalenceResult {
        delta,
        epsilon: eps,
        statistic_lo: lo.statistic,
        statistic_hi: hi.statistic,
        p_lo: lo.p,
        p_hi: hi.p,
        p_tost,
        equivalent: p_tost < spec.alpha,
        underpowered,
        test: test.to_string(),
    })
}
