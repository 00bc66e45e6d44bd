//! Tests on two independent proportions.

use serde::{Deserialize, Serialize};

use crate::distributions::{chi_squared_sf, normal_cdf, normal_sf};
use crate::{Result, StatsError};

/// A test statistic with its p-value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestStatistic {
    pub statistic: f64,
    pub p: f64,
}

/// Direction of the one-sided alternative hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    /// H1: p_a - p_b > shift
    Greater,
    /// H1: p_a - p_b < shift
    Less,
}

fn check_counts(successes: u64, total: u64, group: &'static str) -> Result<()> {
    if total == 0 {
        return Err(StatsError::EmptyGroup(group));
    }
    if successes > total {
        return Err(StatsError::InvalidCounts { successes, total });
    }
    Ok(())
}

/// Pearson chi-squared test (1 df, no Yates correction) on the 2x2 table
/// `[[a_succ, a_n - a_succ], [b_succ, b_n - b_succ]]`.
pub fn chi_squared_2x2(a_succ: u64, a_n: u64, b_succ: u64, b_n: u64) -> Result<TestStatistic> {
    check_counts(a_succ, a_n, "a")?;
    check_counts(b_succ, b_n, "b")?;
    let n = (a_n + b_n) as f64;
    let succ = (a_succ + b_succ) as f64;
    let fail = n - succ;
    if succ == 0.0 || fail == 0.0 {
        // Every expected cell in one column is zero; the observed table equals
        // the expected table.
        return Ok(TestStatistic { statistic: 0.0, p: 1.0 });
    }
    let observed = [[a_succ as f64, (a_n - a_succ) as f64], [b_succ as f64, (b_n - b_succ) as f64]];
    let rows = [a_n as f64, b_n as f64];
    let cols = [succ, fail];
    let mut statistic = 0.0;
    for (i, row) in observed.iter().enumerate() {
        for (j, &o) in row.iter().enumerate() {
            let e = rows[i] * cols[j] / n;
            statistic += (o - e) * (o - e) / e;
        }
    }
    Ok(TestStatistic { statistic, p: chi_squared_sf(statistic, 1.0) })
}

/// One-sided pooled z-test of `p_a - p_b = shift` against `direction`.
///
/// The standard error uses the pooled proportion of both groups. When
/// `continuity` is set, the half-count correction `(1/n_a + 1/n_b) / 2` is
/// applied toward the null hypothesis. Use `shift = 0` for an ordinary
/// difference test and `shift = -eps` / `+eps` for the TOST bounds.
pub fn pooled_z(
    a_succ: u64,
    a_n: u64,
    b_succ: u64,
    b_n: u64,
    shift: f64,
    direction: Direction,
    continuity: bool,
) -> Result<TestStatistic> {
    check_counts(a_succ, a_n, "a")?;
    check_counts(b_succ, b_n, "b")?;
    let (na, nb) = (a_n as f64, b_n as f64);
    let diff = a_succ as f64 / na - b_succ as f64 / nb;
    let pooled = (a_succ + b_succ) as f64 / (na + nb);
    let inv = 1.0 / na + 1.0 / nb;
    let se = (pooled * (1.0 - pooled) * inv).sqrt();
    let correction = if continuity { 0.5 * inv } else { 0.0 };
    let centred = diff - shift;
    let numerator = match direction {
        Direction::Greater => centred - correction,
        Direction::Less => centred + correction,
    };
    if se == 0.0 {
        if shift == 0.0 {
            return Err(StatsError::Degenerate(pooled));
        }
        let z = if centred > 0.0 { f64::INFINITY } else { f64::NEG_INFINITY };
        let p = match direction {
            Direction::Greater => normal_sf(z),
            Direction::Less => normal_cdf(z),
        };
        return Ok(TestStatistic { statistic: z, p });
    }
    let z = numerator / se;
    let p = match direction {
        Direction::Greater => normal_sf(z),
        Direction::Less => normal_cdf(z),
    };
    Ok(TestStatistic { statistic: z, p })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_proportions_give_zero_chi_squared() {
        let r = chi_squared_2x2(50, 100, 50, 100).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!((r.p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chi_squared_matches_hand_computed_statistic() {
        // Expected counts: 75 successes / 25 failures per row.
        // (15^2/75 + 15^2/25) * 2 = (3 + 9) * 2 = 24
        let r = chi_squared_2x2(90, 100, 60, 100).unwrap();
        assert!((r.statistic - 24.0).abs() < 1e-12);
        assert!(r.p < 1e-5);
    }

    #[test]
    fn zero_total_is_rejected() {
        assert_eq!(chi_squared_2x2(0, 0, 3, 4), Err(StatsError::EmptyGroup("a")));
        assert!(matches!(pooled_z(5, 4, 3, 4, 0.0, Direction::Greater, true), Err(StatsError::InvalidCounts { .. })));
    }

    #[test]
    fn z_squared_equals_chi_squared_without_correction() {
        for &(a, an, b, bn) in &[(90, 100, 60, 100), (13, 40, 22, 51), (214, 245, 213, 248)] {
            let chi = chi_squared_2x2(a, an, b, bn).unwrap().statistic;
            let z = pooled_z(a, an, b, bn, 0.0, Direction::Greater, false).unwrap().statistic;
            assert!((z * z - chi).abs() < 1e-9, "{a}/{an} vs {b}/{bn}");
        }
    }

    #[test]
    fn equal_proportions_small_z_after_correction() {
        let raw = pooled_z(40, 80, 40, 80, 0.0, Direction::Greater, false).unwrap();
        assert_eq!(raw.statistic, 0.0);
        let cc = pooled_z(40, 80, 40, 80, 0.0, Direction::Greater, true).unwrap();
        assert!(cc.statistic < 0.0 && cc.statistic.abs() < 0.5);
    }

    #[test]
    fn lower_equivalence_bound_rejected_for_close_proportions() {
        // diff 0.02, shift -0.10, correction 0.01, pooled 0.84:
        // z = 0.11 / sqrt(0.84 * 0.16 * 0.02)
        let r = pooled_z(85, 100, 83, 100, -0.10, Direction::Greater, true).unwrap();
        let expected = 0.11 / (0.84f64 * 0.16 * 0.02).sqrt();
        assert!((r.statistic - expected).abs() < 1e-12);
        assert!(r.p < 0.05);
    }

    #[test]
    fn degenerate_table_with_zero_shift_errors() {
        assert!(matches!(pooled_z(10, 10, 20, 20, 0.0, Direction::Less, true), Err(StatsError::Degenerate(_))));
        let shifted = pooled_z(10, 10, 20, 20, 0.1, Direction::Less, true).unwrap();
        assert_eq!(shifted.p, 0.0);
    }
}
