//! Mann-Whitney U test with midranks for ties.

use serde::{Deserialize, Serialize};

use crate::distributions::normal_sf;
use crate::{Result, StatsError};

/// Pooled sizes up to this bound use exact enumeration.
pub const EXACT_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MannWhitneyMethod {
    Exact,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MannWhitney {
    /// U statistic of the first sample.
    pub u: f64,
    /// Two-sided p-value.
    pub p: f64,
    pub method: MannWhitneyMethod,
}

/// Midranks (1-based) of `values`.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

fn u_from_ranks(ranks: &[f64], members: &[usize]) -> f64 {
    let n = members.len() as f64;
    members.iter().map(|&i| ranks[i]).sum::<f64>() - n * (n + 1.0) / 2.0
}

/// Two-sided Mann-Whitney U test.
///
/// Exact enumeration of all group assignments when the pooled size is at
/// most [`EXACT_LIMIT`]; otherwise the tie-corrected normal approximation
/// with continuity correction.
pub fn mann_whitney(x: &[f64], y: &[f64]) -> Result<MannWhitney> {
    if x.is_empty() {
        return Err(StatsError::EmptyGroup("x"));
    }
    if y.is_empty() {
        return Err(StatsError::EmptyGroup("y"));
    }
    let pooled: Vec<f64> = x.iter().chain(y).copied().collect();
    let ranks = midranks(&pooled);
    let nx = x.len();
    let ny = y.len();
    let observed: Vec<usize> = (0..nx).collect();
    let u = u_from_ranks(&ranks, &observed);
    let mean = (nx * ny) as f64 / 2.0;

    if nx + ny <= EXACT_LIMIT {
        let target = (u - mean).abs() - 1e-9;
        let mut extreme = 0u64;
        let mut total = 0u64;
        let mut chosen = Vec::with_capacity(nx);
        enumerate_subsets(nx + ny, nx, 0, &mut chosen, &mut |members| {
            total += 1;
            if (u_from_ranks(&ranks, members) - mean).abs() >= target {
                extreme += 1;
            }
        });
        return Ok(MannWhitney { u, p: extreme as f64 / total as f64, method: MannWhitneyMethod::Exact });
    }

    let n = (nx + ny) as f64;
    let mut sorted = pooled.clone();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }
    let variance = (nx * ny) as f64 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if variance <= 0.0 {
        return Ok(MannWhitney { u, p: 1.0, method: MannWhitneyMethod::Normal });
    }
    let z = ((u - mean).abs() - 0.5).max(0.0) / variance.sqrt();
    Ok(MannWhitney { u, p: (2.0 * normal_sf(z)).min(1.0), method: MannWhitneyMethod::Normal })
}

fn enumerate_subsets(n: usize, k: usize, start: usize, chosen: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
    if chosen.len() == k {
        visit(chosen);
        return;
    }
    let remaining = k - chosen.len();
    for i in start..=(n - remaining) {
        chosen.push(i);
        enumerate_subsets(n, k, i + 1, chosen, visit);
        chosen.pop();
    }
}
