//! A complete dialogue manager: either one agent over the flattened action
//! set or three per-dimension agents, plus the combination rules.

use std::path::Path;

use rand::Rng;

use crate::acts::{AbstractAction, FeedbackAction, SomAction, TaskAction};
use crate::belief::{BeliefState, FeatureVector};
use crate::combiner::{CombinedResponse, RuleTable};
use crate::domain::{Database, Ontology};
use crate::error::{Error, Result};
use crate::policy::{load_policy, save_policy, AgentRole, DialogueActAgent, LearningConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct DialogueManager {
    /// `[All]` or `[Task, AutoFeedback, Som]`.
    pub agents: Vec<DialogueActAgent>,
    pub rules: RuleTable,
}

/// What each agent saw and chose on one turn.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub choices: Vec<(FeatureVector, usize)>,
    pub response: CombinedResponse,
}

impl DialogueManager {
    pub fn one_dim(ont: &Ontology) -> Self {
        DialogueManager { agents: vec![DialogueActAgent::new(AgentRole::All, ont)], rules: RuleTable::default() }
    }

    pub fn multi_dim(ont: &Ontology) -> Self {
        DialogueManager {
            agents: [AgentRole::Task, AgentRole::AutoFeedback, AgentRole::Som]
                .into_iter()
                .map(|r| DialogueActAgent::new(r, ont))
                .collect(),
            rules: RuleTable::default(),
        }
    }

    pub fn is_one_dim(&self) -> bool {
        self.agents.len() == 1
    }

    pub fn agent(&self, role: AgentRole) -> Option<&DialogueActAgent> {
        self.agents.iter().find(|a| a.role == role)
    }

    pub fn agent_mut(&mut self, role: AgentRole) -> Option<&mut DialogueActAgent> {
        self.agents.iter_mut().find(|a| a.role == role)
    }

    /// Every agent picks an action (epsilon-greedy) and the rules merge them.
    pub fn decide<R: Rng + ?Sized>(&self, b: &BeliefState, db: &Database, epsilon: f64, rng: &mut R) -> Decision {
        let choices: Vec<(FeatureVector, usize)> = self
            .agents
            .iter()
            .map(|agent| {
                let f = agent.features(b, db);
                let a = agent.select_action(&f, epsilon, rng);
                (f, a)
            })
            .collect();
        let response = self.respond(&choices, b, db);
        Decision { choices, response }
    }

    fn respond(&self, choices: &[(FeatureVector, usize)], b: &BeliefState, db: &Database) -> CombinedResponse {
        if let [(_, a)] = choices {
            let AbstractAction::Combined(action) = &self.agents[0].actions()[*a] else {
                unreachable!("a one-dimensional manager holds the flattened action set")
            };
            return self.rules.combine_flat(action, b, db);
        }
        let mut task = TaskAction::InformSearch;
        let mut feedback = FeedbackAction::None;
        let mut som = SomAction::None;
        for (agent, (_, a)) in self.agents.iter().zip(choices) {
            match &agent.actions()[*a] {
                AbstractAction::Task(t) => task = t.clone(),
                AbstractAction::Feedback(f) => feedback = *f,
                AbstractAction::Som(s) => som = *s,
                AbstractAction::Combined(_) => unreachable!("combined actions only in one-dimensional managers"),
            }
        }
        self.rules.combine(task, feedback, som, b, db)
    }

    /// SARSA step for every trainable agent. `next` is `None` at the end of
    /// the dialogue.
    pub fn learn(&mut self, prev: &Decision, reward: f64, next: Option<&Decision>, cfg: &LearningConfig) -> Result<()> {
        for (i, agent) in self.agents.iter_mut().enumerate() {
            if !agent.trainable {
                continue;
            }
            let (f, a) = &prev.choices[i];
            let next = next.map(|d| (&d.choices[i].0, d.choices[i].1));
            agent.td_update(f, *a, reward, next, cfg)?;
        }
        Ok(())
    }

    /// Writes one checkpoint per agent as `<dir>/<role>.json`.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        for agent in &self.agents {
            save_policy(agent, dir.as_ref().join(format!("{}.json", agent.role)))?;
        }
        Ok(())
    }

    /// Loads the agents saved by [`DialogueManager::save`].
    pub fn load(dir: impl AsRef<Path>, ont: &Ontology) -> Result<Self> {
        let dir = dir.as_ref();
        let all = dir.join("all.json");
        if all.exists() {
            return Ok(DialogueManager { agents: vec![load_policy(all, ont)?], rules: RuleTable::default() });
        }
        let mut agents = Vec::new();
        for role in [AgentRole::Task, AgentRole::AutoFeedback, AgentRole::Som] {
            let path = dir.join(format!("{role}.json"));
            if !path.exists() {
                return Err(Error::MissingCheckpoint(path));
            }
            agents.push(load_policy(path, ont)?);
        }
        Ok(DialogueManager { agents, rules: RuleTable::default() })
    }
}
