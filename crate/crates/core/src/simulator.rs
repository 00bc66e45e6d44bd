//! Agenda-based simulated user.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::acts::{CommFunction, DialogueAct};
use crate::domain::{Database, TaskSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub p_greet: f64,
    pub p_multi_act: f64,
    pub p_thank: f64,
    pub patience: u32,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { p_greet: 0.5, p_multi_act: 0.3, p_thank: 0.5, patience: 20 }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p_greet", self.p_greet), ("p_multi_act", self.p_multi_act), ("p_thank", self.p_thank)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name} = {p} is not a probability")));
            }
        }
        if self.patience == 0 {
            return Err(Error::Config("patience must be positive".into()));
        }
        Ok(())
    }

    /// A user who never greets, thanks or stacks acts.
    pub fn plain() -> Self {
        SimConfig { p_greet: 0.0, p_multi_act: 0.0, p_thank: 0.0, ..SimConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserGoal {
    pub task: TaskSpec,
    /// Task constraints plus values adopted when asked about free slots.
    pub constraints: BTreeMap<String, String>,
    pub obtained: BTreeMap<String, Option<String>>,
    pub offered_ok: bool,
    pub accepted: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimUserState {
    pub goal: UserGoal,
    /// Stack of pending acts; the last element is the next to be said and
    /// `Bye` is always at index 0.
    pub agenda: Vec<DialogueAct>,
    pub patience: u32,
    pub last_turn: Vec<DialogueAct>,
    /// The system closed the dialogue.
    pub over: bool,
    /// The user has said goodbye.
    pub left: bool,
}

pub fn init_sim_user<R: Rng + ?Sized>(task: &TaskSpec, cfg: &SimConfig, rng: &mut R) -> SimUserState {
    let mut informs: Vec<DialogueAct> =
        task.constraints.iter().map(|(s, v)| DialogueAct::inform([(s.clone(), v.clone())])).collect();
    informs.shuffle(rng);
    let mut spoken = Vec::new();
    if rng.random::<f64>() < cfg.p_greet {
        spoken.push(DialogueAct::bare(CommFunction::Greet));
    }
    spoken.extend(informs);
    spoken.extend(task.requests.iter().map(|r| DialogueAct::request([r.clone()])));
    let mut agenda = vec![DialogueAct::bare(CommFunction::Bye)];
    agenda.extend(spoken.into_iter().rev());
    SimUserState {
        goal: UserGoal {
            task: task.clone(),
            constraints: task.constraints.clone(),
            obtained: task.requests.iter().map(|r| (r.clone(), None)).collect(),
            offered_ok: false,
            accepted: None,
        },
        agenda,
        patience: cfg.patience,
        last_turn: Vec::new(),
        over: false,
        left: false,
    }
}

pub fn goal_satisfied(u: &SimUserState) -> bool {
    u.goal.offered_ok && u.goal.obtained.values().all(Option::is_some)
}

impl SimUserState {
    fn push_inform(&mut self, slot: &str, value: &str) {
        self.agenda.retain(|a| !(a.function == CommFunction::Inform && a.content.constraints.contains_key(slot)));
        self.agenda.push(DialogueAct::inform([(slot, value)]));
    }

    fn push_request(&mut self, slot: &str) {
        self.agenda.retain(|a| !(a.function == CommFunction::Request && a.content.requested.contains(slot)));
        self.agenda.push(DialogueAct::request([slot]));
    }

    fn mismatched_slots(&self, db: &Database, entity: &str) -> Vec<(String, String)> {
        let Some(e) = db.entity_by_name(entity) else {
            return self.goal.constraints.iter().map(|(s, v)| (s.clone(), v.clone())).collect();
        };
        self.goal
            .constraints
            .iter()
            .filter(|(s, v)| e.slot_values.get(*s) != Some(*v))
            .map(|(s, v)| (s.clone(), v.clone()))
            .collect()
    }
}

/// Updates the user after hearing a system turn.
pub fn sim_receive<R: Rng + ?Sized>(u: &mut SimUserState, system_acts: &[DialogueAct], db: &Database, rng: &mut R) {
    u.patience = u.patience.saturating_sub(1);
    for act in system_acts {
        match act.function {
            CommFunction::ReturnBye => u.over = true,
            CommFunction::AutoNegativePerception | CommFunction::AutoNegativeInterpretation => {
                let repeat: Vec<DialogueAct> = u
                    .last_turn
                    .iter()
                    .filter(|a| matches!(a.function, CommFunction::Inform | CommFunction::Request))
                    .cloned()
                    .collect();
                for a in repeat.iter().rev() {
                    for (s, v) in &a.content.constraints {
                        if u.goal.constraints.get(s) == Some(v) {
                            u.push_inform(s, v);
                        }
                    }
                    for s in &a.content.requested {
                        if u.goal.obtained.get(s).is_some_and(Option::is_none) {
                            u.push_request(s);
                        }
                    }
                }
            }
            CommFunction::Request => {
                for slot in &act.content.requested {
                    if let Some(v) = u.goal.constraints.get(slot).cloned() {
                        u.push_inform(slot, &v);
                    } else if let Some(v) = adopt_value(u, slot, db, rng) {
                        u.goal.constraints.insert(slot.clone(), v.clone());
                        u.push_inform(slot, &v);
                    }
                }
            }
            CommFunction::Recommend => {
                let Some(name) = &act.content.entity else { continue };
                let wrong = u.mismatched_slots(db, name);
                if wrong.is_empty() {
                    if u.goal.accepted.as_ref() != Some(name) {
                        u.goal.accepted = Some(name.clone());
                        for v in u.goal.obtained.values_mut() {
                            *v = None;
                        }
                    }
                    u.goal.offered_ok = true;
                } else {
                    u.goal.offered_ok = false;
                    u.goal.accepted = None;
                    for (s, v) in wrong.iter().rev() {
                        u.push_inform(s, v);
                    }
                }
            }
            CommFunction::Inform => {
                if act.content.entity.is_some() && act.content.entity == u.goal.accepted {
                    for (s, v) in &act.content.constraints {
                        if let Some(slot) = u.goal.obtained.get_mut(s) {
                            *slot = Some(v.clone());
                        }
                    }
                    u.agenda.retain(|a| {
                        !(a.function == CommFunction::Request
                            && a.content.requested.iter().all(|s| act.content.constraints.contains_key(s)))
                    });
                }
            }
            CommFunction::FeedbackInform => {
                for (s, v) in &act.content.constraints {
                    if let Some(goal) = u.goal.constraints.get(s).cloned() {
                        if &goal != v {
                            u.push_inform(s, &goal);
                        }
                    }
                }
            }
            _ => {}
        }
    }
}

/// Samples a value for an unconstrained slot among entities matching the
/// current constraints.
fn adopt_value<R: Rng + ?Sized>(u: &SimUserState, slot: &str, db: &Database, rng: &mut R) -> Option<String> {
    db.ontology.slot(slot)?;
    let matching = db.matching_set(&u.goal.constraints).ok()?;
    let values: BTreeSet<&String> = matching.iter().filter_map(|i| db.entities[i].slot_values.get(slot)).collect();
    let values: Vec<&String> = values.into_iter().collect();
    values.choose(rng).map(|v| (*v).clone())
}

fn mergeable(a: &DialogueAct, b: &DialogueAct) -> bool {
    a.function != CommFunction::Bye && b.function != CommFunction::Bye && a.function != b.function
        || (a.function == b.function && matches!(a.function, CommFunction::Inform | CommFunction::Request))
}

/// Produces the user's next turn.
pub fn sim_respond<R: Rng + ?Sized>(u: &mut SimUserState, cfg: &SimConfig, rng: &mut R) -> Vec<DialogueAct> {
    let turn = if u.patience == 0 {
        vec![DialogueAct::bare(CommFunction::Bye)]
    } else if goal_satisfied(u) {
        let mut turn = Vec::new();
        if rng.random::<f64>() < cfg.p_thank {
            turn.push(DialogueAct::bare(CommFunction::Thank));
        }
        turn.push(DialogueAct::bare(CommFunction::Bye));
        turn
    } else {
        if u.agenda.len() <= 1 {
            refill(u);
        }
        let first = u.agenda.pop().expect("refilled above the bottom Bye");
        let mut turn = vec![first];
        if u.agenda.len() > 1 && rng.random::<f64>() < cfg.p_multi_act {
            let next = u.agenda.last().expect("non-empty");
            if mergeable(&turn[0], next) {
                let second = u.agenda.pop().expect("non-empty");
                if second.function == turn[0].function {
                    turn[0].content.constraints.extend(second.content.constraints);
                    turn[0].content.requested.extend(second.content.requested);
                } else {
                    turn.push(second);
                }
            }
        }
        turn
    };
    if turn.iter().any(|a| a.function == CommFunction::Bye) {
        u.left = true;
    }
    u.last_turn = turn.clone();
    turn
}

/// Re-raises whatever is still missing once the agenda has run dry.
fn refill(u: &mut SimUserState) {
    if u.goal.offered_ok {
        let missing: Vec<String> =
            u.goal.obtained.iter().filter(|(_, v)| v.is_none()).map(|(s, _)| s.clone()).collect();
        for s in missing.iter().rev() {
            u.push_request(s);
        }
    } else {
        let constraints: Vec<(String, String)> =
            u.goal.constraints.iter().map(|(s, v)| (s.clone(), v.clone())).collect();
        let merged = DialogueAct::inform(constraints);
        u.agenda.push(merged);
        let pending: Vec<String> =
            u.goal.obtained.iter().filter(|(_, v)| v.is_none()).map(|(s, _)| s.clone()).collect();
        if !pending.is_empty() {
            u.agenda.insert(1, DialogueAct::request(pending));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acts::SemContent;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn task() -> TaskSpec {
        TaskSpec {
            constraints: [("cuisine".to_string(), "thai".to_string()), ("area".to_string(), "centre".to_string())]
                .into(),
            requests: ["phone".to_string()].into(),
        }
    }

    #[test]
    fn agenda_construction() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..50 {
            let u = init_sim_user(&task(), &SimConfig::default(), &mut rng);
            assert!(u.agenda.len() == 4 || u.agenda.len() == 5);
            assert_eq!(u.agenda[0].function, CommFunction::Bye);
            assert_eq!(u.patience, 20);
        }
    }

    #[test]
    fn negative_feedback_repeats_last_inform() {
        let db = Database::restaurants();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut u = init_sim_user(&task(), &SimConfig::plain(), &mut rng);
        let said = sim_respond(&mut u, &SimConfig::plain(), &mut rng);
        assert_eq!(said[0].function, CommFunction::Inform);
        sim_receive(&mut u, &[DialogueAct::bare(CommFunction::AutoNegativePerception)], &db, &mut rng);
        let again = sim_respond(&mut u, &SimConfig::plain(), &mut rng);
        assert_eq!(again, said);
    }

    #[test]
    fn wrong_recommendation_is_corrected() {
        let db = Database::restaurants();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut u = init_sim_user(&task(), &SimConfig::plain(), &mut rng);
        let wrong = db
            .entities
            .iter()
            .find(|e| e.slot_values["cuisine"] == "thai" && e.slot_values["area"] != "centre")
            .unwrap();
        let rec = DialogueAct {
            function: CommFunction::Recommend,
            content: SemContent { entity: Some(wrong.name.clone()), ..Default::default() },
        };
        sim_receive(&mut u, &[rec], &db, &mut rng);
        assert!(!u.goal.offered_ok);
        assert_eq!(u.agenda.last().unwrap(), &DialogueAct::inform([("area", "centre")]));
    }

    #[test]
    fn satisfaction_and_goodbye() {
        let db = Database::restaurants();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut u = init_sim_user(&task(), &SimConfig::plain(), &mut rng);
        let rec = DialogueAct {
            function: CommFunction::Recommend,
            content: SemContent { entity: Some("Bangkok City".into()), ..Default::default() },
        };
        sim_receive(&mut u, &[rec], &db, &mut rng);
        assert!(u.goal.offered_ok && !goal_satisfied(&u));
        let phone = db.entity_by_name("Bangkok City").unwrap().info_values["phone"].clone();
        let info = DialogueAct {
            function: CommFunction::Inform,
            content: SemContent {
                constraints: [("phone".to_string(), phone)].into(),
                entity: Some("Bangkok City".into()),
                ..Default::default()
            },
        };
        sim_receive(&mut u, &[info], &db, &mut rng);
        assert!(goal_satisfied(&u));
        let said = sim_respond(&mut u, &SimConfig::plain(), &mut rng);
        assert_eq!(said, vec![DialogueAct::bare(CommFunction::Bye)]);
        assert!(u.left);
    }

    #[test]
    fn impatient_user_leaves() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut u = init_sim_user(&task(), &SimConfig::plain(), &mut rng);
        u.patience = 0;
        assert_eq!(sim_respond(&mut u, &SimConfig::plain(), &mut rng), vec![DialogueAct::bare(CommFunction::Bye)]);
    }

    #[test]
    fn unconstrained_slot_question_adopts_a_value() {
        let db = Database::restaurants();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut u = init_sim_user(&task(), &SimConfig::plain(), &mut rng);
        sim_receive(&mut u, &[DialogueAct::request(["pricerange"])], &db, &mut rng);
        let v = u.goal.constraints["pricerange"].clone();
        assert!(!db.matching_set(&u.goal.constraints).unwrap().is_empty());
        assert_eq!(u.agenda.last().unwrap(), &DialogueAct::inform([("pricerange", v)]));
    }
}
