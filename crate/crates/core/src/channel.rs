//! Noisy channel between the simulated user and the dialogue manager:
//! processing problems, per-position n-best distortion, duplicate merging
//! and Dirichlet confidence scores.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::acts::{
    acts_semantically_equal, CommFunction, DialogueAct, Hypothesis, NBestList, UserInputEvent, MAX_NBEST,
};
use crate::domain::Ontology;
use crate::error::{Error, Result};

/// How the semantic error rate relates to top-hypothesis accuracy.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccuracyConvention {
    /// Each position is distorted with probability `e`, so top accuracy is `1 - e`.
    #[default]
    ErrorRate,
    /// Positions are distorted with probability `1 - e`, so top accuracy is `e`.
    Accuracy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distortion {
    SubstituteValue,
    DropAct,
    ChangeFunction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorConfig {
    pub p_perception: f64,
    /// Conditional on no perception problem.
    pub p_interpretation: f64,
    pub n_best: usize,
    pub semantic_error_rate: f64,
    pub dirichlet_alpha: Vec<f64>,
    #[serde(default)]
    pub convention: AccuracyConvention,
    #[serde(default = "all_distortions")]
    pub distortions: Vec<Distortion>,
}

fn all_distortions() -> Vec<Distortion> {
    vec![Distortion::SubstituteValue, Distortion::DropAct, Distortion::ChangeFunction]
}

impl Default for ErrorConfig {
    fn default() -> Self {
        ErrorConfig::with_error_rate(0.30)
    }
}

impl ErrorConfig {
    pub fn with_error_rate(e: f64) -> Self {
        ErrorConfig {
            p_perception: 0.10,
            p_interpretation: 0.10,
            n_best: 3,
            semantic_error_rate: e,
            dirichlet_alpha: vec![8.0, 3.0, 1.0],
            convention: AccuracyConvention::ErrorRate,
            distortions: all_distortions(),
        }
    }

    /// No processing problems and no distortion.
    pub fn noiseless() -> Self {
        ErrorConfig { p_perception: 0.0, p_interpretation: 0.0, ..ErrorConfig::with_error_rate(0.0) }
    }

    pub fn validate(&self) -> Result<()> {
        let probability = |name: &str, p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} = {p} is not a probability")))
            }
        };
        probability("p_perception", self.p_perception)?;
        probability("p_interpretation", self.p_interpretation)?;
        probability("semantic_error_rate", self.semantic_error_rate)?;
        if self.n_best == 0 || self.n_best > MAX_NBEST {
            return Err(Error::Config(format!("n_best must be in 1..={MAX_NBEST}, got {}", self.n_best)));
        }
        if self.dirichlet_alpha.len() != self.n_best || self.dirichlet_alpha.iter().any(|&a| a.is_nan() || a <= 0.0) {
            return Err(Error::Config("dirichlet_alpha needs one positive entry per n-best position".into()));
        }
        if self.distortions.is_empty() {
            return Err(Error::Config("at least one distortion operator is required".into()));
        }
        Ok(())
    }

    fn distortion_rate(&self) -> f64 {
        match self.convention {
            AccuracyConvention::ErrorRate => self.semantic_error_rate,
            AccuracyConvention::Accuracy => 1.0 - self.semantic_error_rate,
        }
    }
}

/// Dirichlet draw over the first `k` alphas, sorted in descending order so
/// that position 0 (the intended top hypothesis) receives the largest score.
pub fn sample_confidences<R: Rng + ?Sized>(k: usize, cfg: &ErrorConfig, rng: &mut R) -> Vec<f64> {
    assert!(k >= 1 && k <= cfg.dirichlet_alpha.len(), "k = {k} outside 1..={}", cfg.dirichlet_alpha.len());
    if k == 1 {
        return vec![1.0];
    }
    let mut draws = dirichlet_draw(&cfg.dirichlet_alpha[..k], rng);
    draws.sort_by(|a, b| b.total_cmp(a));
    draws
}

/// One unsorted draw from Dirichlet(`alpha`), via normalised gamma variates.
pub fn dirichlet_draw<R: Rng + ?Sized>(alpha: &[f64], rng: &mut R) -> Vec<f64> {
    let mut draws: Vec<f64> = alpha.iter().map(|&a| Gamma::new(a, 1.0).expect("positive alpha").sample(rng)).collect();
    let total: f64 = draws.iter().sum();
    for d in &mut draws {
        *d /= total;
    }
    draws
}

/// Passes the user's acts through the channel.
pub fn corrupt_user_act<R: Rng + ?Sized>(
    true_acts: &[DialogueAct],
    cfg: &ErrorConfig,
    ont: &Ontology,
    rng: &mut R,
) -> UserInputEvent {
    if rng.random::<f64>() < cfg.p_perception {
        return UserInputEvent::PerceptionProblem;
    }
    if rng.random::<f64>() < cfg.p_interpretation {
        return UserInputEvent::InterpretationProblem;
    }
    let rate = cfg.distortion_rate();
    let mut distinct: Vec<Vec<DialogueAct>> = Vec::with_capacity(cfg.n_best);
    for _ in 0..cfg.n_best {
        let acts = if rng.random::<f64>() < rate { distort(true_acts, cfg, ont, rng) } else { true_acts.to_vec() };
        if !distinct.iter().any(|d| acts_semantically_equal(d, &acts)) {
            distinct.push(acts);
        }
    }
    let confidences = sample_confidences(distinct.len(), cfg, rng);
    let hypotheses =
        distinct.into_iter().zip(confidences).map(|(acts, confidence)| Hypothesis { acts, confidence }).collect();
    UserInputEvent::NBest(NBestList::new(hypotheses).expect("sorted, distinct, normalized"))
}

/// Alternative user functions within the same dimension.
fn function_alternatives(f: CommFunction) -> &'static [CommFunction] {
    use CommFunction::*;
    match f {
        Inform => &[Confirm, Disconfirm],
        Confirm => &[Inform, Disconfirm],
        Disconfirm => &[Inform, Confirm],
        Greet => &[Bye, Thank],
        Bye => &[Greet, Thank],
        Thank => &[Greet, Bye],
        _ => &[],
    }
}

#[derive(Clone, Copy)]
enum Site {
    Value(usize, usize),
    Requested(usize, usize),
    Drop(usize),
    Function(usize),
}

/// One semantically different variant of `acts`, chosen uniformly among the
/// enabled operators that apply. When none applies, the hypothesis becomes
/// a single spurious inform.
fn distort<R: Rng + ?Sized>(acts: &[DialogueAct], cfg: &ErrorConfig, ont: &Ontology, rng: &mut R) -> Vec<DialogueAct> {
    let mut applicable: Vec<(Distortion, Vec<Site>)> = Vec::new();
    for &op in &cfg.distortions {
        let sites: Vec<Site> = match op {
            Distortion::SubstituteValue => acts
                .iter()
                .enumerate()
                .flat_map(|(i, a)| {
                    let values = (0..a.content.constraints.len())
                        .filter(move |&j| {
                            let slot = a.content.constraints.keys().nth(j).expect("index in range");
                            ont.slot(slot).is_some_and(|s| s.values.len() > 1)
                        })
                        .map(move |j| Site::Value(i, j));
                    let requested = (0..a.content.requested.len())
                        .filter(move |_| a.content.requested.len() < ont.info_slots.len())
                        .map(move |j| Site::Requested(i, j));
                    values.chain(requested)
                })
                .collect(),
            Distortion::DropAct if acts.len() > 1 => (0..acts.len()).map(Site::Drop).collect(),
            Distortion::DropAct => Vec::new(),
            Distortion::ChangeFunction => acts
                .iter()
                .enumerate()
                .filter(|(_, a)| !function_alternatives(a.function).is_empty())
                .map(|(i, _)| Site::Function(i))
                .collect(),
        };
        if !sites.is_empty() {
            applicable.push((op, sites));
        }
    }
    let Some((_, sites)) = applicable.choose(rng) else {
        return vec![spurious_inform(acts, ont, rng)];
    };
    let mut out = acts.to_vec();
    match *sites.choose(rng).expect("non-empty") {
        Site::Value(i, j) => {
            let slot = out[i].content.constraints.keys().nth(j).expect("index in range").clone();
            let spec = ont.slot(&slot).expect("checked above");
            let current = out[i].content.constraints[&slot].clone();
            let others: Vec<&String> = spec.values.iter().filter(|v| **v != current).collect();
            out[i].content.constraints.insert(slot, (*others.choose(rng).expect("more than one value")).clone());
        }
        Site::Requested(i, j) => {
            let requested = &mut out[i].content.requested;
            let old = requested.iter().nth(j).expect("index in range").clone();
            let others: Vec<&String> =
                ont.info_slots.iter().map(|s| &s.name).filter(|s| !requested.contains(*s)).collect();
            let new = (*others.choose(rng).expect("fewer requested than requestable")).clone();
            requested.remove(&old);
            requested.insert(new);
        }
        Site::Drop(i) => {
            out.remove(i);
        }
        Site::Function(i) => {
            out[i].function = *function_alternatives(out[i].function).choose(rng).expect("non-empty");
        }
    }
    out
}

fn spurious_inform<R: Rng + ?Sized>(acts: &[DialogueAct], ont: &Ontology, rng: &mut R) -> DialogueAct {
    let mut slots: Vec<_> = ont.constraint_slots.iter().collect();
    slots.shuffle(rng);
    loop {
        for spec in &slots {
            let candidate =
                DialogueAct::inform([(spec.name.clone(), spec.values.choose(rng).expect("non-empty").clone())]);
            if !acts_semantically_equal(acts, std::slice::from_ref(&candidate)) {
                return candidate;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Database;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn noiseless_channel_is_identity() {
        let ont = Database::restaurants().ontology;
        let acts = vec![DialogueAct::bare(CommFunction::Greet), DialogueAct::inform([("cuisine", "thai")])];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let ev = corrupt_user_act(&acts, &ErrorConfig::noiseless(), &ont, &mut rng);
            assert_eq!(ev, UserInputEvent::NBest(NBestList::certain(acts.clone())));
        }
    }

    #[test]
    fn distortions_always_change_meaning() {
        let ont = Database::restaurants().ontology;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let cases = vec![
            vec![DialogueAct::inform([("cuisine", "thai")])],
            vec![DialogueAct::request(["phone", "address"])],
            vec![DialogueAct::request(["phone"])],
            vec![DialogueAct::bare(CommFunction::Bye)],
            vec![DialogueAct::bare(CommFunction::Thank), DialogueAct::bare(CommFunction::Bye)],
        ];
        let cfg = ErrorConfig::default();
        for acts in cases {
            for _ in 0..200 {
                let d = distort(&acts, &cfg, &ont, &mut rng);
                assert!(!acts_semantically_equal(&acts, &d), "{acts:?} -> {d:?}");
            }
        }
    }

    #[test]
    fn single_confidence_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(sample_confidences(1, &ErrorConfig::default(), &mut rng), vec![1.0]);
        let c = sample_confidences(3, &ErrorConfig::default(), &mut rng);
        assert!((c.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(c.windows(2).all(|w| w[0] >= w[1]) && c.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn config_validation() {
        assert!(ErrorConfig::default().validate().is_ok());
        let bad = ErrorConfig { dirichlet_alpha: vec![1.0], ..ErrorConfig::default() };
        assert!(bad.validate().is_err());
        let bad = ErrorConfig { semantic_error_rate: 1.5, ..ErrorConfig::default() };
        assert!(bad.validate().is_err());
    }
}
