//! Priority resolution of the per-dimension actions into one system turn,
//! and the flattened action set of the one-dimensional baseline.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::acts::{
    task_actions, AbstractAction, CombinedAction, CommFunction, DialogueAct, Dimension, FeedbackAction, SemContent,
    SomAction, TaskAction,
};
use crate::belief::BeliefState;
use crate::domain::{Database, Ontology};

/// Condition under which a rule fires, tested on the not-yet-cancelled actions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trigger {
    AutoNegative,
    Feedback(FeedbackAction),
    Som(SomAction),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PriorityRule {
    pub id: String,
    pub when: Trigger,
    pub cancels: Vec<Dimension>,
    #[serde(default)]
    pub ends_dialogue: bool,
}

/// Ordered cancellation rules plus emission order and fallback act.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleTable {
    pub rules: Vec<PriorityRule>,
    pub emission_order: Vec<Dimension>,
    pub fallback: TaskAction,
}

impl Default for RuleTable {
    fn default() -> Self {
        RuleTable {
            rules: vec![
                PriorityRule {
                    id: "negative-feedback-cancels-task".into(),
                    when: Trigger::AutoNegative,
                    cancels: vec![Dimension::Task],
                    ends_dialogue: false,
                },
                PriorityRule {
                    id: "return-bye-cancels-rest".into(),
                    when: Trigger::Som(SomAction::ReturnBye),
                    cancels: vec![Dimension::Task, Dimension::AutoFeedback],
                    ends_dialogue: true,
                },
            ],
            emission_order: vec![Dimension::Som, Dimension::AutoFeedback, Dimension::Task],
            fallback: TaskAction::InformSearch,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cancellation {
    pub action: AbstractAction,
    pub rule: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CombinedResponse {
    pub acts: Vec<DialogueAct>,
    pub cancelled: Vec<Cancellation>,
    /// The action triple that survived priority resolution.
    pub effective: CombinedAction,
    pub ends_dialogue: bool,
}

impl CombinedResponse {
    pub fn contains(&self, f: CommFunction) -> bool {
        self.acts.iter().any(|a| a.function == f)
    }
}

fn fires(trigger: Trigger, a: &CombinedAction) -> bool {
    match trigger {
        Trigger::AutoNegative => a.feedback.is_auto_negative(),
        Trigger::Feedback(f) => a.feedback == f,
        Trigger::Som(s) => a.som == s,
    }
}

impl RuleTable {
    /// Applies the cancellation rules symbolically.
    pub fn resolve(
        &self,
        task: TaskAction,
        feedback: FeedbackAction,
        som: SomAction,
    ) -> (CombinedAction, Vec<Cancellation>, bool) {
        let mut a = CombinedAction { task: Some(task), feedback, som };
        let mut cancelled = Vec::new();
        let mut ends = false;
        for rule in &self.rules {
            if !fires(rule.when, &a) {
                continue;
            }
            ends |= rule.ends_dialogue;
            for dim in &rule.cancels {
                let removed = match dim {
                    Dimension::Task => a.task.take().map(AbstractAction::Task),
                    Dimension::AutoFeedback => {
                        let f = std::mem::replace(&mut a.feedback, FeedbackAction::None);
                        (f != FeedbackAction::None).then_some(AbstractAction::Feedback(f))
                    }
                    Dimension::Som => {
                        let s = std::mem::replace(&mut a.som, SomAction::None);
                        (s != SomAction::None).then_some(AbstractAction::Som(s))
                    }
                };
                if let Some(action) = removed {
                    cancelled.push(Cancellation { action, rule: rule.id.clone() });
                }
            }
        }
        (a, cancelled, ends)
    }

    fn ends_dialogue(&self, a: &CombinedAction) -> bool {
        self.rules.iter().any(|r| r.ends_dialogue && fires(r.when, a))
    }

    /// Instantiates an already-resolved action triple against the belief.
    pub fn realize(&self, a: &CombinedAction, b: &BeliefState, db: &Database) -> Vec<DialogueAct> {
        let mut acts = Vec::new();
        for dim in &self.emission_order {
            match dim {
                Dimension::Som => acts.extend(som_act(a.som)),
                Dimension::AutoFeedback => acts.extend(feedback_act(a.feedback, b, db)),
                Dimension::Task => acts.extend(a.task.as_ref().and_then(|t| task_act(t, b, db))),
            }
        }
        if acts.is_empty() {
            acts.extend(task_act(&self.fallback, b, db));
        }
        acts
    }

    pub fn combine(
        &self,
        task: TaskAction,
        feedback: FeedbackAction,
        som: SomAction,
        b: &BeliefState,
        db: &Database,
    ) -> CombinedResponse {
        let (effective, cancelled, ends_dialogue) = self.resolve(task, feedback, som);
        let acts = self.realize(&effective, b, db);
        CombinedResponse { acts, cancelled, effective, ends_dialogue }
    }

    /// The response the one-dimensional agent produces for a flattened action.
    pub fn combine_flat(&self, a: &CombinedAction, b: &BeliefState, db: &Database) -> CombinedResponse {
        CombinedResponse {
            acts: self.realize(a, b, db),
            cancelled: Vec::new(),
            effective: a.clone(),
            ends_dialogue: self.ends_dialogue(a),
        }
    }

    /// Deduplicated image of the three-agent action product under
    /// [`RuleTable::resolve`], in first-seen order.
    pub fn flatten(&self, ont: &Ontology) -> Vec<CombinedAction> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for t in task_actions(ont) {
            for f in FeedbackAction::ALL {
                for s in SomAction::ALL {
                    let (a, _, _) = self.resolve(t.clone(), f, s);
                    if seen.insert(a.clone()) {
                        out.push(a);
                    }
                }
            }
        }
        out
    }
}

/// [`RuleTable::combine`] with the default rule table.
pub fn combine(
    task: TaskAction,
    feedback: FeedbackAction,
    som: SomAction,
    b: &BeliefState,
    db: &Database,
) -> CombinedResponse {
    RuleTable::default().combine(task, feedback, som, b, db)
}

/// [`RuleTable::flatten`] with the default rule table.
pub fn flatten_action_product(ont: &Ontology) -> Vec<CombinedAction> {
    RuleTable::default().flatten(ont)
}

fn som_act(s: SomAction) -> Option<DialogueAct> {
    let f = match s {
        SomAction::None => return None,
        SomAction::ReturnGreet => CommFunction::ReturnGreet,
        SomAction::ReturnBye => CommFunction::ReturnBye,
        SomAction::AcceptThank => CommFunction::AcceptThank,
    };
    Some(DialogueAct::bare(f))
}

fn feedback_act(f: FeedbackAction, b: &BeliefState, db: &Database) -> Option<DialogueAct> {
    let function = match f {
        FeedbackAction::None => return None,
        FeedbackAction::AutoPositive => CommFunction::AutoPositive,
        FeedbackAction::AutoNegativePerception => CommFunction::AutoNegativePerception,
        FeedbackAction::AutoNegativeInterpretation => CommFunction::AutoNegativeInterpretation,
        FeedbackAction::FeedbackInformConfirm => {
            let constraints = grounding_echo(b, &db.ontology);
            if constraints.is_empty() {
                return None;
            }
            return Some(DialogueAct {
                function: CommFunction::FeedbackInform,
                content: SemContent { constraints, ..Default::default() },
            });
        }
    };
    Some(DialogueAct::bare(function))
}

/// Slot values to echo: those just informed, else the not yet confirmed
/// ones, else everything known.
fn grounding_echo(b: &BeliefState, ont: &Ontology) -> std::collections::BTreeMap<String, String> {
    let known: Vec<(usize, usize)> = b.known_values().collect();
    let pick = |keep: &dyn Fn(usize) -> bool| -> std::collections::BTreeMap<String, String> {
        known
            .iter()
            .filter(|(si, _)| keep(*si))
            .map(|&(si, vi)| {
                let spec = &ont.constraint_slots[si];
                (spec.name.clone(), spec.values[vi].clone())
            })
            .collect()
    };
    let fresh = pick(&|si| b.newly_informed.contains(&si));
    if !fresh.is_empty() {
        return fresh;
    }
    let unconfirmed = pick(&|si| !b.confirmed.contains(&ont.constraint_slots[si].name));
    if !unconfirmed.is_empty() {
        return unconfirmed;
    }
    pick(&|_| true)
}

/// Database position of the entity agreeing with the most known top values;
/// ties go to the lowest entity id.
pub fn best_match(b: &BeliefState, db: &Database) -> Option<usize> {
    let known: Vec<(&str, &str)> = b
        .known_values()
        .map(|(si, vi)| {
            let spec = &db.ontology.constraint_slots[si];
            (spec.name.as_str(), spec.values[vi].as_str())
        })
        .collect();
    let mut best: Option<(usize, usize)> = None;
    for (i, e) in db.entities.iter().enumerate() {
        let score = known.iter().filter(|(s, v)| e.slot_values.get(*s).map(String::as_str) == Some(*v)).count();
        let better = match best {
            None => true,
            Some((bi, bs)) => score > bs || (score == bs && e.id < db.entities[bi].id),
        };
        if better {
            best = Some((i, score));
        }
    }
    best.map(|(i, _)| i)
}

fn task_act(t: &TaskAction, b: &BeliefState, db: &Database) -> Option<DialogueAct> {
    match t {
        TaskAction::RequestSlot(s) => Some(DialogueAct::request([s.clone()])),
        TaskAction::Recommend => best_match(b, db).map(|i| DialogueAct {
            function: CommFunction::Recommend,
            content: SemContent { entity: Some(db.entities[i].name.clone()), ..Default::default() },
        }),
        TaskAction::InformRequested => {
            let entity = &db.entities[b.offered?];
            let constraints: std::collections::BTreeMap<String, String> =
                b.requested.iter().filter_map(|s| entity.info_values.get(s).map(|v| (s.clone(), v.clone()))).collect();
            if constraints.is_empty() {
                return None;
            }
            Some(DialogueAct {
                function: CommFunction::Inform,
                content: SemContent { constraints, entity: Some(entity.name.clone()), ..Default::default() },
            })
        }
        TaskAction::InformSearch => Some(DialogueAct {
            function: CommFunction::InformSearch,
            content: SemContent { constraints: b.top_constraints(&db.ontology), ..Default::default() },
        }),
    }
}
