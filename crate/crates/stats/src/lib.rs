//! Difference and equivalence tests used to compare dialogue systems.
//!
//! Success rates are compared with a Pearson chi-squared test and a pooled
//! z-test with continuity correction; Likert ratings with Mann-Whitney U and
//! Yuen's trimmed-mean t-test. [`tost`] combines the one-sided tests into a
//! two one-sided tests (TOST) equivalence verdict.

pub mod distributions;
pub mod proportions;
pub mod rank;
pub mod tost;
pub mod yuen;

pub use proportions::{chi_squared_2x2, pooled_z, Direction, TestStatistic};
pub use rank::{mann_whitney, MannWhitney, MannWhitneyMethod};
pub use tost::{tost, EquivalenceResult, TostData, TostFlavor, TostSpec};
pub use yuen::{welch_t, yuen_t, YuenResult};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("group {0} has zero observations")]
    EmptyGroup(&'static str),
    #[error("successes ({successes}) exceed total ({total})")]
    InvalidCounts { successes: u64, total: u64 },
    #[error("degenerate table: pooled proportion is {0}, variance is zero")]
    Degenerate(f64),
    #[error("sample too small after trimming: {kept} observations kept, need at least 2")]
    TooSmallAfterTrim { kept: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("data does not match the test flavor: {0}")]
    FlavorMismatch(&'static str),
}

pub type Result<T> = std::result::Result<T, StatsError>;
