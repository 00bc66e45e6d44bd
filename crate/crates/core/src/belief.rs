//! Dialogue state: per-slot goal distributions updated from scored n-best
//! input, grounding and social-obligation bookkeeping, and featurization.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::acts::{CommFunction, DialogueAct, UserInputEvent};
use crate::combiner::CombinedResponse;
use crate::domain::{Database, Ontology};
use crate::policy::AgentRole;

/// Distribution over a slot's values plus an `unknown` outcome. `values`
/// follows the ontology's value order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotBelief {
    pub values: Vec<f64>,
    pub unknown: f64,
}

impl SlotBelief {
    fn uninformed(n: usize) -> Self {
        SlotBelief { values: vec![0.0; n], unknown: 1.0 }
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum::<f64>() + self.unknown
    }

    /// Index and probability of the most likely concrete value (first on ties).
    pub fn top_value(&self) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (i, &p) in self.values.iter().enumerate() {
            if p > 0.0 && best.is_none_or(|(_, q)| p > q) {
                best = Some((i, p));
            }
        }
        best
    }

    /// The most likely concrete value beats `unknown`.
    pub fn known(&self) -> Option<usize> {
        self.top_value().filter(|&(_, p)| p > self.unknown).map(|(i, _)| i)
    }

    fn normalize(&mut self) {
        let total = self.total();
        if total > 0.0 {
            for p in &mut self.values {
                *p /= total;
            }
            self.unknown /= total;
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Problem {
    #[default]
    None,
    Perception,
    Interpretation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefState {
    /// One distribution per constraint slot, in ontology order.
    pub goal: Vec<SlotBelief>,
    /// Requestable slots the user asked for and has not been told yet.
    pub requested: BTreeSet<String>,
    /// Constraint slots already echoed back to the user.
    pub confirmed: BTreeSet<String>,
    pub problem: Problem,
    /// User social acts from the latest turn still awaiting a response.
    pub pending_social: BTreeSet<CommFunction>,
    /// Database position of the most recently recommended entity.
    pub offered: Option<usize>,
    pub last_user_functions: BTreeSet<CommFunction>,
    /// Constraint slots informed in the latest top hypothesis.
    pub newly_informed: BTreeSet<usize>,
    pub top_confidence: f64,
    pub turn_index: u32,
}

pub fn init_belief(ont: &Ontology) -> BeliefState {
    BeliefState {
        goal: ont.constraint_slots.iter().map(|s| SlotBelief::uninformed(s.values.len())).collect(),
        requested: BTreeSet::new(),
        confirmed: BTreeSet::new(),
        problem: Problem::None,
        pending_social: BTreeSet::new(),
        offered: None,
        last_user_functions: BTreeSet::new(),
        newly_informed: BTreeSet::new(),
        top_confidence: 0.0,
        turn_index: 0,
    }
}

/// Effect of one hypothesis on one slot.
enum SlotEvidence {
    Value(usize),
    Not(usize),
}

fn slot_evidence(acts: &[DialogueAct], ont: &Ontology, slot: usize) -> Option<SlotEvidence> {
    let spec = &ont.constraint_slots[slot];
    let mut found = None;
    for act in acts {
        let Some(value) = act.content.constraints.get(&spec.name) else { continue };
        let Some(vi) = spec.values.iter().position(|v| v == value) else { continue };
        match act.function {
            CommFunction::Inform | CommFunction::Confirm => found = Some(SlotEvidence::Value(vi)),
            CommFunction::Disconfirm => found = Some(SlotEvidence::Not(vi)),
            _ => {}
        }
    }
    found
}

/// Pure belief update for one user input event.
pub fn update_belief(b: &BeliefState, ev: &UserInputEvent, ont: &Ontology) -> BeliefState {
    let mut next = b.clone();
    next.apply_event(ev, ont);
    next
}

impl BeliefState {
    /// In-place form of [`update_belief`].
    pub fn apply_event(&mut self, ev: &UserInputEvent, ont: &Ontology) {
        self.turn_index += 1;
        self.pending_social.clear();
        self.newly_informed.clear();
        self.last_user_functions.clear();
        let nbest = match ev {
            UserInputEvent::PerceptionProblem => {
                self.problem = Problem::Perception;
                self.top_confidence = 0.0;
                return;
            }
            UserInputEvent::InterpretationProblem => {
                self.problem = Problem::Interpretation;
                self.top_confidence = 0.0;
                return;
            }
            UserInputEvent::NBest(nbest) => nbest,
        };
        self.problem = Problem::None;
        for (si, belief) in self.goal.iter_mut().enumerate() {
            let evidence: Vec<(f64, SlotEvidence)> = nbest
                .hypotheses()
                .iter()
                .filter_map(|h| slot_evidence(&h.acts, ont, si).map(|e| (h.confidence, e)))
                .collect();
            if evidence.is_empty() {
                continue;
            }
            let mentioned: f64 = evidence.iter().map(|(c, _)| c).sum();
            let prior = belief.clone();
            let keep = (1.0 - mentioned).max(0.0);
            for p in &mut belief.values {
                *p *= keep;
            }
            belief.unknown *= keep;
            for (conf, e) in evidence {
                match e {
                    SlotEvidence::Value(vi) => belief.values[vi] += conf,
                    SlotEvidence::Not(vi) => {
                        // Spread the mass over everything except the denied value.
                        let rest = prior.total() - prior.values[vi];
                        if rest > 0.0 {
                            for (i, p) in belief.values.iter_mut().enumerate() {
                                if i != vi {
                                    *p += conf * prior.values[i] / rest;
                                }
                            }
                            belief.unknown += conf * prior.unknown / rest;
                        } else {
                            belief.unknown += conf;
                        }
                    }
                }
            }
            belief.normalize();
        }
        if let Some(top) = nbest.top() {
            self.top_confidence = top.confidence;
            for act in &top.acts {
                self.last_user_functions.insert(act.function);
                if act.function.is_user_social() {
                    self.pending_social.insert(act.function);
                }
                match act.function {
                    CommFunction::Request => {
                        self.requested.extend(act.content.requested.iter().filter(|s| ont.is_requestable(s)).cloned());
                    }
                    CommFunction::Inform | CommFunction::Confirm => {
                        for slot in act.content.constraints.keys() {
                            if let Some(si) = ont.slot_index(slot) {
                                self.newly_informed.insert(si);
                            }
                        }
                    }
                    _ => {}
                }
            }
        }
    }

    /// Records the effect of a system turn: offers, confirmations and
    /// answered requests.
    pub fn note_system_response(&mut self, response: &CombinedResponse, db: &Database) {
        for act in &response.acts {
            match act.function {
                CommFunction::Recommend => {
                    if let Some(name) = &act.content.entity {
                        self.offered = db.entities.iter().position(|e| &e.name == name);
                    }
                }
                CommFunction::FeedbackInform => {
                    self.confirmed.extend(act.content.constraints.keys().cloned());
                }
                CommFunction::Inform if act.content.entity.is_some() => {
                    for slot in act.content.constraints.keys() {
                        self.requested.remove(slot);
                    }
                }
                _ => {}
            }
        }
    }

    /// `(slot index, value index)` of every slot whose top value is known.
    pub fn known_values(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.goal.iter().enumerate().filter_map(|(si, b)| b.known().map(|vi| (si, vi)))
    }

    /// Known top values as a constraint map.
    pub fn top_constraints(&self, ont: &Ontology) -> BTreeMap<String, String> {
        self.known_values()
            .map(|(si, vi)| {
                let spec = &ont.constraint_slots[si];
                (spec.name.clone(), spec.values[vi].clone())
            })
            .collect()
    }

    /// The offered entity agrees with every known top value.
    pub fn offer_consistent(&self, db: &Database) -> bool {
        let Some(ei) = self.offered else { return false };
        let entity = &db.entities[ei];
        self.known_values().all(|(si, vi)| {
            let spec = &db.ontology.constraint_slots[si];
            entity.slot_values.get(&spec.name) == Some(&spec.values[vi])
        })
    }

    pub fn summary(&self, ont: &Ontology) -> BTreeMap<String, SlotSummary> {
        ont.constraint_slots
            .iter()
            .zip(&self.goal)
            .map(|(spec, b)| {
                let summary = match b.top_value() {
                    Some((vi, p)) if p > b.unknown => {
                        SlotSummary { value: Some(spec.values[vi].clone()), p: round4(p) }
                    }
                    _ => SlotSummary { value: None, p: round4(b.unknown) },
                };
                (spec.name.clone(), summary)
            })
            .collect()
    }
}

fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

/// Top value of a slot (`None` = unknown) with its probability, rounded to 4 decimals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotSummary {
    pub value: Option<String>,
    pub p: f64,
}

// ---------------------------------------------------------------------------
// Feature catalogues.

pub const CATALOGUE_REVISION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub catalogue: Arc<str>,
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Named, versioned feature layout for one agent role and ontology.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureCatalogue {
    pub role: AgentRole,
    pub version: Arc<str>,
    pub names: Vec<String>,
}

fn task_feature_names(ont: &Ontology) -> Vec<String> {
    let mut names = Vec::new();
    for s in ont.slot_names() {
        names.push(format!("{s}.top_prob"));
        names.push(format!("{s}.known"));
    }
    names.extend(["matches=0", "matches=1", "matches=2-5", "matches>5", "offered"].map(String::from));
    for s in &ont.info_slots {
        names.push(format!("owed.{}", s.name));
    }
    names
}

const FEEDBACK_FEATURES: [&str; 7] = [
    "problem=none",
    "problem=perception",
    "problem=interpretation",
    "conf<=0.3",
    "conf<=0.6",
    "conf<=1.0",
    "newly_informed",
];

const SOM_FEATURES: [&str; 3] = ["pending.greet", "pending.bye", "pending.thank"];

impl FeatureCatalogue {
    pub fn new(role: AgentRole, ont: &Ontology) -> Self {
        let slots: Vec<&str> = ont.slot_names().collect();
        let mut names = vec!["bias".to_string()];
        let version = match role {
            AgentRole::Task => {
                names.extend(task_feature_names(ont));
                format!("task-v{CATALOGUE_REVISION}[{}]", slots.join(","))
            }
            AgentRole::AutoFeedback => {
                names.extend(FEEDBACK_FEATURES.map(String::from));
                format!("autofeedback-v{CATALOGUE_REVISION}")
            }
            AgentRole::Som => {
                names.extend(SOM_FEATURES.map(String::from));
                format!("som-v{CATALOGUE_REVISION}")
            }
            AgentRole::All => {
                names.extend(task_feature_names(ont));
                names.extend(FEEDBACK_FEATURES.map(String::from));
                names.extend(SOM_FEATURES.map(String::from));
                format!("all-v{CATALOGUE_REVISION}[{}]", slots.join(","))
            }
        };
        FeatureCatalogue { role, version: version.into(), names }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn extract(&self, b: &BeliefState, db: &Database) -> FeatureVector {
        let mut values = Vec::with_capacity(self.names.len());
        values.push(1.0);
        match self.role {
            AgentRole::Task => task_features(b, db, &mut values),
            AgentRole::AutoFeedback => feedback_features(b, &mut values),
            AgentRole::Som => som_features(b, &mut values),
            AgentRole::All => {
                task_features(b, db, &mut values);
                feedback_features(b, &mut values);
                som_features(b, &mut values);
            }
        }
        debug_assert_eq!(values.len(), self.names.len());
        FeatureVector { catalogue: self.version.clone(), values }
    }
}

fn task_features(b: &BeliefState, db: &Database, out: &mut Vec<f64>) {
    for slot in &b.goal {
        let top = slot.top_value().map_or(0.0, |(_, p)| p);
        out.push(top);
        out.push(if slot.known().is_some() { 1.0 } else { 0.0 });
    }
    let matches = db.matching_indexed(b.known_values()).len();
    let bucket = match matches {
        0 => 0,
        1 => 1,
        2..=5 => 2,
        _ => 3,
    };
    for i in 0..4 {
        out.push(if i == bucket { 1.0 } else { 0.0 });
    }
    out.push(if b.offer_consistent(db) { 1.0 } else { 0.0 });
    for s in &db.ontology.info_slots {
        out.push(if b.requested.contains(&s.name) { 1.0 } else { 0.0 });
    }
}

fn feedback_features(b: &BeliefState, out: &mut Vec<f64>) {
    let one_hot = |flag: bool| if flag { 1.0 } else { 0.0 };
    out.push(one_hot(b.problem == Problem::None));
    out.push(one_hot(b.problem == Problem::Perception));
    out.push(one_hot(b.problem == Problem::Interpretation));
    let has_input = b.problem == Problem::None && b.top_confidence > 0.0;
    let c = b.top_confidence;
    out.push(one_hot(has_input && c <= 0.3));
    out.push(one_hot(has_input && c > 0.3 && c <= 0.6));
    out.push(one_hot(has_input && c > 0.6));
    out.push(one_hot(!b.newly_informed.is_empty()));
}

fn som_features(b: &BeliefState, out: &mut Vec<f64>) {
    for f in [CommFunction::Greet, CommFunction::Bye, CommFunction::Thank] {
        out.push(if b.pending_social.contains(&f) { 1.0 } else { 0.0 });
    }
}

/// Convenience wrapper building the catalogue on the fly.
pub fn extract_features(b: &BeliefState, role: AgentRole, db: &Database) -> FeatureVector {
    FeatureCatalogue::new(role, &db.ontology).extract(b, db)
}
