//! Simulated evaluation, error-rate sweeps, objective success metrics and
//! the pairwise statistics report.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use multidm_stats::{chi_squared_2x2, mann_whitney, tost, TostData, TostSpec};

use crate::acts::{CommFunction, DialogueAct};
use crate::domain::{Database, TaskSpec};
use crate::error::{Error, Result};
use crate::manager::DialogueManager;
use crate::training::{episode_rng, simulate_episode, Environment, EpisodeResult, StreamPurpose};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub system: String,
    pub error_rate: f64,
    pub n_dialogues: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub avg_len: f64,
    pub avg_reward: f64,
    pub ent_prov: f64,
    pub constr_conf: f64,
    pub info_prov: f64,
}

/// Per-dialogue outcomes kept for significance testing.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EvalSamples {
    pub success: Vec<bool>,
    pub turns: Vec<f64>,
    pub reward: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectiveMetrics {
    pub ent_prov: bool,
    pub constr_conf: bool,
    pub info_prov: bool,
}

impl ObjectiveMetrics {
    /// A matching venue was offered and every requested detail was given.
    pub fn objective_success(&self) -> bool {
        self.ent_prov && self.info_prov
    }
}

/// Objective metrics from the system acts of a dialogue.
pub fn objective_metrics<'a, I>(task: &TaskSpec, system_turns: I, db: &Database) -> Result<ObjectiveMetrics>
where
    I: IntoIterator<Item = &'a [DialogueAct]>,
{
    if task.constraints.is_empty() && task.requests.is_empty() {
        return Err(Error::MalformedLog("dialogue log has no task".into()));
    }
    let mut m = ObjectiveMetrics::default();
    let mut confirmed = std::collections::BTreeSet::new();
    let mut provided = std::collections::BTreeSet::new();
    let mut turns = 0usize;
    for acts in system_turns {
        turns += 1;
        for act in acts {
            match act.function {
                CommFunction::Recommend => {
                    let name = act.content.entity.as_deref().unwrap_or_default();
                    if db.entity_by_name(name).is_some_and(|e| e.matches(&task.constraints)) {
                        m.ent_prov = true;
                    }
                }
                CommFunction::FeedbackInform => {
                    for (s, v) in &act.content.constraints {
                        if task.constraints.get(s) == Some(v) {
                            confirmed.insert(s.clone());
                        }
                    }
                }
                CommFunction::Inform if act.content.entity.is_some() => {
                    provided.extend(act.content.constraints.keys().filter(|s| task.requests.contains(*s)).cloned());
                }
                _ => {}
            }
        }
    }
    if turns == 0 {
        return Err(Error::MalformedLog("dialogue log has no system turns".into()));
    }
    if m.ent_prov {
        m.constr_conf = task.constraints.keys().all(|s| confirmed.contains(s));
        m.info_prov = task.requests.iter().all(|s| provided.contains(s));
    }
    Ok(m)
}

pub fn episode_metrics(r: &EpisodeResult, db: &Database) -> ObjectiveMetrics {
    objective_metrics(&r.task, r.trace.iter().map(|t| t.system_acts.as_slice()), db).unwrap_or_default()
}

/// Greedy evaluation of a pool of managers, episodes dealt round-robin.
pub fn eval_simulated(
    system: &str,
    pool: &[DialogueManager],
    db: &Database,
    env: &Environment,
    n: usize,
    seed: u64,
) -> (EvalSummary, EvalSamples) {
    assert!(!pool.is_empty() && n > 0, "evaluation needs managers and dialogues");
    let results: Vec<(EpisodeResult, ObjectiveMetrics)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = episode_rng(seed, StreamPurpose::Evaluation, i as u64);
            let r = simulate_episode(&pool[i % pool.len()], db, env, 0.0, true, &mut rng);
            let m = episode_metrics(&r, db);
            (r, m)
        })
        .collect();
    let frac = |f: &dyn Fn(&(EpisodeResult, ObjectiveMetrics)) -> bool| {
        results.iter().filter(|r| f(r)).count() as f64 / n as f64
    };
    let successes = results.iter().filter(|(r, _)| r.success).count();
    let summary = EvalSummary {
        system: system.to_string(),
        error_rate: env.error.semantic_error_rate,
        n_dialogues: n,
        successes,
        success_rate: successes as f64 / n as f64,
        avg_len: results.iter().map(|(r, _)| r.turns as f64).sum::<f64>() / n as f64,
        avg_reward: results.iter().map(|(r, _)| r.total_reward).sum::<f64>() / n as f64,
        ent_prov: frac(&|(_, m)| m.ent_prov),
        constr_conf: frac(&|(_, m)| m.constr_conf),
        info_prov: frac(&|(_, m)| m.info_prov),
    };
    let samples = EvalSamples {
        success: results.iter().map(|(r, _)| r.success).collect(),
        turns: results.iter().map(|(r, _)| r.turns as f64).collect(),
        reward: results.iter().map(|(r, _)| r.total_reward).collect(),
    };
    (summary, samples)
}

/// One summary per (system, rate).
pub fn error_rate_sweep(
    systems: &[(String, Vec<DialogueManager>)],
    db: &Database,
    env: &Environment,
    rates: &[f64],
    n_per_rate: usize,
    seed: u64,
) -> Vec<EvalSummary> {
    let mut out = Vec::new();
    for (name, pool) in systems {
        for &rate in rates {
            out.push(eval_simulated(name, pool, db, &env.with_error_rate(rate), n_per_rate, seed).0);
        }
    }
    out
}

#[derive(Debug, Serialize, Deserialize)]
struct SampleRow {
    system: String,
    success: bool,
    turns: f64,
    reward: f64,
}

/// Per-dialogue outcomes, one CSV row per dialogue: `system,success,turns,reward`.
pub fn write_samples_csv(path: &Path, systems: &[(String, EvalSamples)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::parse(format!("samples {}", path.display()), e))?;
    for (system, s) in systems {
        for i in 0..s.success.len() {
            let row =
                SampleRow { system: system.clone(), success: s.success[i], turns: s.turns[i], reward: s.reward[i] };
            w.serialize(row).map_err(|e| Error::parse("samples", e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a file written by [`write_samples_csv`], systems in first-seen order.
pub fn read_samples_csv(path: &Path) -> Result<Vec<(String, EvalSamples)>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::parse(format!("samples {}", path.display()), e))?;
    let mut out: Vec<(String, EvalSamples)> = Vec::new();
    for row in r.deserialize::<SampleRow>() {
        let row = row.map_err(|e| Error::parse(format!("samples {}", path.display()), e))?;
        let pos = match out.iter().position(|(name, _)| *name == row.system) {
            Some(p) => p,
            None => {
                out.push((row.system.clone(), EvalSamples::default()));
                out.len() - 1
            }
        };
        let s = &mut out[pos].1;
        s.success.push(row.success);
        s.turns.push(row.turns);
        s.reward.push(row.reward);
    }
    Ok(out)
}

/// Long-format results table: `system,error_rate,metric,value`.
pub fn write_results_csv(path: &Path, rows: &[EvalSummary]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::parse(format!("results {}", path.display()), e))?;
    w.write_record(["system", "error_rate", "metric", "value"]).map_err(|e| Error::parse("results", e))?;
    for r in rows {
        let metrics = [
            ("n_dialogues", r.n_dialogues as f64),
            ("success_rate", r.success_rate),
            ("avg_len", r.avg_len),
            ("avg_reward", r.avg_reward),
            ("ent_prov", r.ent_prov),
            ("constr_conf", r.constr_conf),
            ("info_prov", r.info_prov),
        ];
        for (name, value) in metrics {
            w.write_record([r.system.clone(), format!("{}", r.error_rate), name.to_string(), format!("{value}")])
                .map_err(|e| Error::parse("results", e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub a: String,
    pub b: String,
    pub metric: String,
    pub delta: f64,
    pub test: String,
    pub statistic: f64,
    pub p: f64,
    pub verdict: String,
}

/// Pairwise comparisons: chi-squared and TOST on success, Mann-Whitney on
/// dialogue length and reward.
pub fn compare_systems(systems: &[(String, EvalSamples)], alpha: f64) -> Vec<ComparisonRow> {
    let mut rows = Vec::new();
    for (i, (a_name, a)) in systems.iter().enumerate() {
        for (b_name, b) in &systems[i + 1..] {
            let (a_succ, a_n) = (a.success.iter().filter(|&&s| s).count() as u64, a.success.len() as u64);
            let (b_succ, b_n) = (b.success.iter().filter(|&&s| s).count() as u64, b.success.len() as u64);
            let delta = a_succ as f64 / a_n as f64 - b_succ as f64 / b_n as f64;
            let row = |metric: &str, delta: f64, test: &str, statistic: f64, p: f64, verdict: String| ComparisonRow {
                a: a_name.clone(),
                b: b_name.clone(),
                metric: metric.into(),
                delta,
                test: test.into(),
                statistic,
                p,
                verdict,
            };
            let differs = |p: f64| if p < alpha { "different" } else { "no difference detected" }.to_string();
            if let Ok(t) = chi_squared_2x2(a_succ, a_n, b_succ, b_n) {
                rows.push(row("success", delta, "chi-squared", t.statistic, t.p, differs(t.p)));
            }
            let data = TostData::Proportions { a_succ, a_n, b_succ, b_n };
            if let Ok(e) = tost(&data, &TostSpec::proportions()) {
                let verdict = if e.equivalent { "equivalent" } else { "not shown equivalent" }.to_string();
                rows.push(row("success", delta, "tost", e.statistic_lo.min(e.statistic_hi), e.p_tost, verdict));
            }
            for (metric, x, y) in [("turns", &a.turns, &b.turns), ("reward", &a.reward, &b.reward)] {
                if let Ok(m) = mann_whitney(x, y) {
                    let d = mean(x) - mean(y);
                    rows.push(row(metric, d, "mann-whitney", m.u, m.p, differs(m.p)));
                }
            }
        }
    }
    rows
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len().max(1) as f64
}

pub fn write_comparisons_csv(path: &Path, rows: &[ComparisonRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::parse(format!("report {}", path.display()), e))?;
    for r in rows {
        w.serialize(r).map_err(|e| Error::parse("report", e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Aligned plain-text table of summaries.
pub fn format_summaries(rows: &[EvalSummary]) -> String {
    let mut out = Vec::new();
    writeln!(
        out,
        "{:<12} {:>5} {:>6} {:>8} {:>7} {:>8} {:>8} {:>8} {:>8}",
        "system", "e", "n", "SuccRate", "AvgLen", "AvgRew", "EntProv", "ConstrCf", "InfoProv"
    )
    .unwrap();
    for r in rows {
        writeln!(
            out,
            "{:<12} {:>5.2} {:>6} {:>8.1} {:>7.2} {:>8.2} {:>8.1} {:>8.1} {:>8.1}",
            r.system,
            r.error_rate,
            r.n_dialogues,
            100.0 * r.success_rate,
            r.avg_len,
            r.avg_reward,
            100.0 * r.ent_prov,
            100.0 * r.constr_conf,
            100.0 * r.info_prov
        )
        .unwrap();
    }
    String::from_utf8(out).expect("ascii table")
}
