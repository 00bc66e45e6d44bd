//! Dialogue act agents: linear action-value functions over a feature
//! catalogue, epsilon-greedy selection, SARSA updates and checkpoints.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::acts::{enumerate_action_set, AbstractAction, Dimension};
use crate::belief::{BeliefState, FeatureCatalogue, FeatureVector};
use crate::combiner::flatten_action_product;
use crate::domain::{Database, Ontology};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentRole {
    Task,
    AutoFeedback,
    Som,
    /// Single agent over the flattened multi-dimensional action set.
    All,
}

impl AgentRole {
    pub fn name(self) -> &'static str {
        match self {
            AgentRole::Task => "task",
            AgentRole::AutoFeedback => "autofeedback",
            AgentRole::Som => "som",
            AgentRole::All => "all",
        }
    }

    pub fn dimension(self) -> Option<Dimension> {
        match self {
            AgentRole::Task => Some(Dimension::Task),
            AgentRole::AutoFeedback => Some(Dimension::AutoFeedback),
            AgentRole::Som => Some(Dimension::Som),
            AgentRole::All => None,
        }
    }

    /// Roles whose action set and features do not depend on the ontology.
    pub fn domain_independent(self) -> bool {
        matches!(self, AgentRole::AutoFeedback | AgentRole::Som)
    }
}

impl fmt::Display for AgentRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Action set of an agent role in canonical order.
pub fn action_set(role: AgentRole, ont: &Ontology) -> Vec<AbstractAction> {
    match role.dimension() {
        Some(dim) => enumerate_action_set(dim, ont),
        None => flatten_action_product(ont).into_iter().map(AbstractAction::Combined).collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearPolicy {
    pub actions: Vec<AbstractAction>,
    /// One weight vector per action, each the catalogue length.
    pub weights: Vec<Vec<f64>>,
    pub catalogue_version: Arc<str>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub end: f64,
    /// Fraction of the training dialogues over which epsilon anneals linearly.
    pub decay_fraction: f64,
}

impl EpsilonSchedule {
    pub fn value(&self, dialogue: usize, total: usize) -> f64 {
        let horizon = (self.decay_fraction * total as f64).max(1.0);
        let t = (dialogue as f64 / horizon).min(1.0);
        self.start + (self.end - self.start) * t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearningConfig {
    pub step_size: f64,
    pub discount: f64,
    pub epsilon: EpsilonSchedule,
    /// Bias weight given to every action of a freshly created agent.
    #[serde(default = "default_initial_value")]
    pub initial_value: f64,
    /// Target-domain dialogues during which transferred agents stay frozen
    /// before they start adapting, so the fresh Task agent can catch up.
    #[serde(default = "default_adapt_after")]
    pub adapt_after: usize,
}

fn default_initial_value() -> f64 {
    80.0
}

fn default_adapt_after() -> usize {
    3000
}

impl Default for LearningConfig {
    fn default() -> Self {
        LearningConfig {
            step_size: 0.003,
            discount: 1.0,
            epsilon: EpsilonSchedule { start: 0.3, end: 0.02, decay_fraction: 0.8 },
            initial_value: default_initial_value(),
            adapt_after: default_adapt_after(),
        }
    }
}

impl LearningConfig {
    pub fn validate(&self) -> Result<()> {
        let e = &self.epsilon;
        if self.step_size.is_nan() || self.step_size <= 0.0 {
            return Err(Error::Config(format!("step_size {} must be positive", self.step_size)));
        }
        if !(self.discount > 0.0 && self.discount <= 1.0) {
            return Err(Error::Config(format!("discount {} not in (0, 1]", self.discount)));
        }
        for v in [e.start, e.end] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("epsilon {v} not in [0, 1]")));
            }
        }
        Ok(())
    }
}

/// Provenance carried into checkpoints.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentMeta {
    pub regime: String,
    pub training_dialogues: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DialogueActAgent {
    pub role: AgentRole,
    pub domain: String,
    pub policy: LinearPolicy,
    pub trainable: bool,
    pub meta: AgentMeta,
    catalogue: FeatureCatalogue,
}

impl DialogueActAgent {
    /// Zero-initialized agent for `role` in `ont`'s domain.
    pub fn new(role: AgentRole, ont: &Ontology) -> Self {
        let catalogue = FeatureCatalogue::new(role, ont);
        let actions = action_set(role, ont);
        let weights = vec![vec![0.0; catalogue.len()]; actions.len()];
        DialogueActAgent {
            role,
            domain: ont.domain.clone(),
            policy: LinearPolicy { actions, weights, catalogue_version: catalogue.version.clone() },
            trainable: true,
            meta: AgentMeta::default(),
            catalogue,
        }
    }

    /// Sets every action's bias weight; the catalogue's first feature is the bias.
    pub fn set_initial_value(&mut self, q: f64) {
        for w in &mut self.policy.weights {
            w[0] = q;
        }
    }

    pub fn catalogue(&self) -> &FeatureCatalogue {
        &self.catalogue
    }

    pub fn features(&self, b: &BeliefState, db: &Database) -> FeatureVector {
        self.catalogue.extract(b, db)
    }

    pub fn actions(&self) -> &[AbstractAction] {
        &self.policy.actions
    }

    pub fn action_index(&self, a: &AbstractAction) -> Option<usize> {
        self.policy.actions.iter().position(|x| x == a)
    }

    fn check(&self, f: &FeatureVector) -> Result<()> {
        if !Arc::ptr_eq(&f.catalogue, &self.policy.catalogue_version) && f.catalogue != self.policy.catalogue_version {
            return Err(Error::CatalogueMismatch {
                expected: self.policy.catalogue_version.to_string(),
                found: f.catalogue.to_string(),
            });
        }
        Ok(())
    }

    /// `weights[a] . f`.
    pub fn q_value(&self, f: &FeatureVector, a: &AbstractAction) -> Result<f64> {
        self.check(f)?;
        let i = self.action_index(a).ok_or_else(|| Error::UnknownAction(a.to_string()))?;
        Ok(self.q_index(f, i))
    }

    pub fn q_index(&self, f: &FeatureVector, i: usize) -> f64 {
        self.policy.weights[i].iter().zip(&f.values).map(|(w, x)| w * x).sum()
    }

    /// Index of the highest-valued action; ties go to the earliest action.
    pub fn greedy(&self, f: &FeatureVector) -> usize {
        let mut best = 0;
        let mut best_q = f64::NEG_INFINITY;
        for i in 0..self.policy.actions.len() {
            let q = self.q_index(f, i);
            if q > best_q {
                best = i;
                best_q = q;
            }
        }
        best
    }

    /// Epsilon-greedy choice, returned as an index into [`Self::actions`].
    pub fn select_action<R: Rng + ?Sized>(&self, f: &FeatureVector, epsilon: f64, rng: &mut R) -> usize {
        if epsilon > 0.0 && rng.random::<f64>() < epsilon {
            rng.random_range(0..self.policy.actions.len())
        } else {
            self.greedy(f)
        }
    }

    /// SARSA step on action `a`: `delta = r + gamma q(f', a') - q(f, a)`,
    /// with `next = None` at a terminal transition. Returns `delta`.
    pub fn td_update(
        &mut self,
        f: &FeatureVector,
        a: usize,
        reward: f64,
        next: Option<(&FeatureVector, usize)>,
        cfg: &LearningConfig,
    ) -> Result<f64> {
        if !self.trainable {
            return Err(Error::FrozenAgent(self.role.to_string()));
        }
        self.check(f)?;
        let target = match next {
            Some((f_next, a_next)) => {
                self.check(f_next)?;
                reward + cfg.discount * self.q_index(f_next, a_next)
            }
            None => reward,
        };
        let delta = target - self.q_index(f, a);
        let step = cfg.step_size * delta;
        for (w, x) in self.policy.weights[a].iter_mut().zip(&f.values) {
            *w += step * x;
        }
        Ok(delta)
    }
}

// ---------------------------------------------------------------------------
// Checkpoints.

const CHECKPOINT_FORMAT: &str = "multidm-policy";
const CHECKPOINT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub format: String,
    pub format_version: u32,
    pub role: AgentRole,
    pub domain: String,
    pub catalogue_version: String,
    pub regime: String,
    pub training_dialogues: u64,
    pub seed: u64,
    pub trainable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionWeights {
    pub action: String,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub header: CheckpointHeader,
    pub actions: Vec<ActionWeights>,
}

impl Checkpoint {
    pub fn from_agent(agent: &DialogueActAgent) -> Self {
        Checkpoint {
            header: CheckpointHeader {
                format: CHECKPOINT_FORMAT.into(),
                format_version: CHECKPOINT_FORMAT_VERSION,
                role: agent.role,
                domain: agent.domain.clone(),
                catalogue_version: agent.policy.catalogue_version.to_string(),
                regime: agent.meta.regime.clone(),
                training_dialogues: agent.meta.training_dialogues,
                seed: agent.meta.seed,
                trainable: agent.trainable,
            },
            actions: agent
                .policy
                .actions
                .iter()
                .zip(&agent.policy.weights)
                .map(|(a, w)| ActionWeights { action: a.to_string(), weights: w.clone() })
                .collect(),
        }
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::parse(format!("checkpoint {}", path.display()), e))
    }

    /// Rebuilds an agent for `ont`, rejecting catalogue or action-set drift.
    pub fn into_agent(self, ont: &Ontology) -> Result<DialogueActAgent> {
        let h = &self.header;
        if h.format != CHECKPOINT_FORMAT || h.format_version != CHECKPOINT_FORMAT_VERSION {
            return Err(Error::parse("checkpoint", format!("unsupported format {} v{}", h.format, h.format_version)));
        }
        let mut agent = DialogueActAgent::new(h.role, ont);
        if *agent.policy.catalogue_version != *h.catalogue_version {
            return Err(Error::CatalogueMismatch {
                expected: agent.policy.catalogue_version.to_string(),
                found: h.catalogue_version.clone(),
            });
        }
        if agent.policy.actions.len() != self.actions.len() {
            return Err(Error::parse("checkpoint", "action set size differs from the ontology's"));
        }
        for (i, aw) in self.actions.into_iter().enumerate() {
            if agent.policy.actions[i].to_string() != aw.action {
                return Err(Error::UnknownAction(aw.action));
            }
            if aw.weights.len() != agent.catalogue.len() || aw.weights.iter().any(|w| !w.is_finite()) {
                return Err(Error::parse("checkpoint", format!("bad weight vector for {}", aw.action)));
            }
            agent.policy.weights[i] = aw.weights;
        }
        agent.trainable = self.header.trainable;
        agent.meta = AgentMeta {
            regime: self.header.regime,
            training_dialogues: self.header.training_dialogues,
            seed: self.header.seed,
        };
        Ok(agent)
    }
}

/// Writes the agent atomically (temporary file, then rename).
pub fn save_policy(agent: &DialogueActAgent, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let text = serde_json::to_string(&Checkpoint::from_agent(agent)).expect("checkpoint serializes");
    let tmp = path.with_extension("json.tmp");
    std::fs::write(&tmp, text).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Loads a checkpoint for use with `ont`. Domain-specific roles only load
/// into the ontology they were trained on.
pub fn load_policy(path: impl AsRef<Path>, ont: &Ontology) -> Result<DialogueActAgent> {
    Checkpoint::read(path)?.into_agent(ont)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acts::{SomAction, TaskAction};
    use crate::belief::init_belief;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bias_only(agent: &DialogueActAgent) -> FeatureVector {
        let mut values = vec![0.0; agent.catalogue().len()];
        values[0] = 1.0;
        FeatureVector { catalogue: agent.policy.catalogue_version.clone(), values }
    }

    #[test]
    fn zero_weights_give_zero_q() {
        let db = Database::restaurants();
        let agent = DialogueActAgent::new(AgentRole::Task, &db.ontology);
        let f = agent.features(&init_belief(&db.ontology), &db);
        for a in agent.actions() {
            assert_eq!(agent.q_value(&f, a).unwrap(), 0.0);
        }
    }

    #[test]
    fn bias_weight_is_the_q_value() {
        let db = Database::restaurants();
        let mut agent = DialogueActAgent::new(AgentRole::Som, &db.ontology);
        agent.policy.weights[1][0] = 2.5;
        let f = agent.features(&init_belief(&db.ontology), &db);
        assert_eq!(agent.q_value(&f, &AbstractAction::Som(SomAction::ReturnGreet)).unwrap(), 2.5);
    }

    #[test]
    fn q_value_rejects_foreign_features_and_actions() {
        let db = Database::restaurants();
        let agent = DialogueActAgent::new(AgentRole::Som, &db.ontology);
        let task = DialogueActAgent::new(AgentRole::Task, &db.ontology);
        let f = task.features(&init_belief(&db.ontology), &db);
        assert!(matches!(
            agent.q_value(&f, &AbstractAction::Som(SomAction::None)),
            Err(Error::CatalogueMismatch { .. })
        ));
        let f = agent.features(&init_belief(&db.ontology), &db);
        assert!(matches!(
            agent.q_value(&f, &AbstractAction::Task(TaskAction::Recommend)),
            Err(Error::UnknownAction(_))
        ));
    }

    #[test]
    fn greedy_ties_go_to_the_first_action() {
        let db = Database::restaurants();
        let mut agent = DialogueActAgent::new(AgentRole::Som, &db.ontology);
        agent.policy.weights[1][0] = 1.0;
        agent.policy.weights[3][0] = 1.0;
        let f = bias_only(&agent);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(agent.select_action(&f, 0.0, &mut rng), 1);
        agent.policy.weights[3][0] = 1.5;
        assert_eq!(agent.select_action(&f, 0.0, &mut rng), 3);
    }

    #[test]
    fn terminal_update_by_hand() {
        // q = 0, reward 80, terminal, bias-only: w += 0.01 * 80 * 1
        let db = Database::restaurants();
        let mut agent = DialogueActAgent::new(AgentRole::Task, &db.ontology);
        let f = bias_only(&agent);
        let cfg = LearningConfig { step_size: 0.01, ..LearningConfig::default() };
        agent.td_update(&f, 2, 80.0, None, &cfg).unwrap();
        assert!((agent.policy.weights[2][0] - 0.8).abs() < 1e-12);
        let untouched = agent.policy.weights.iter().enumerate().filter(|(i, _)| *i != 2);
        assert!(untouched.flat_map(|(_, w)| w).all(|&w| w == 0.0));
    }

    #[test]
    fn zero_td_error_is_a_fixed_point() {
        let db = Database::restaurants();
        let mut agent = DialogueActAgent::new(AgentRole::Som, &db.ontology);
        agent.policy.weights[0][0] = 3.0;
        let f = bias_only(&agent);
        let before = agent.policy.clone();
        let delta = agent.td_update(&f, 0, 0.0, Some((&f, 0)), &LearningConfig::default()).unwrap();
        assert_eq!(delta, 0.0);
        assert_eq!(agent.policy, before);
    }

    #[test]
    fn frozen_agents_reject_updates() {
        let db = Database::restaurants();
        let mut agent = DialogueActAgent::new(AgentRole::AutoFeedback, &db.ontology);
        agent.trainable = false;
        let f = bias_only(&agent);
        let before = agent.policy.clone();
        assert!(matches!(agent.td_update(&f, 1, 10.0, None, &LearningConfig::default()), Err(Error::FrozenAgent(_))));
        assert_eq!(agent.policy, before);
    }

    #[test]
    fn epsilon_anneals_linearly() {
        let s = LearningConfig::default().epsilon;
        assert_eq!(s.value(0, 1000), 0.3);
        assert!((s.value(400, 1000) - 0.16).abs() < 1e-12);
        assert!((s.value(800, 1000) - 0.02).abs() < 1e-12);
        assert!((s.value(999, 1000) - 0.02).abs() < 1e-12);
    }

    #[test]
    fn checkpoint_transfer_contract() {
        let dir = tempfile::tempdir().unwrap();
        let hotels = Database::hotels();
        let restaurants = Database::restaurants();
        let mut fb = DialogueActAgent::new(AgentRole::AutoFeedback, &hotels.ontology);
        fb.policy.weights[2][1] = 0.125;
        fb.trainable = false;
        save_policy(&fb, dir.path().join("fb.json")).unwrap();
        let loaded = load_policy(dir.path().join("fb.json"), &restaurants.ontology).unwrap();
        assert_eq!(loaded.policy.weights, fb.policy.weights);
        assert!(!loaded.trainable);

        let task = DialogueActAgent::new(AgentRole::Task, &hotels.ontology);
        save_policy(&task, dir.path().join("task.json")).unwrap();
        assert!(matches!(
            load_policy(dir.path().join("task.json"), &restaurants.ontology),
            Err(Error::CatalogueMismatch { .. })
        ));
    }
}
