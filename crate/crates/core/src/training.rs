//! Episode loop, shared reward and the four training regimes.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::acts::{CombinedAction, DialogueAct, UserInputEvent};
use crate::belief::{init_belief, BeliefState};
use crate::channel::{corrupt_user_act, ErrorConfig};
use crate::combiner::{Cancellation, CombinedResponse};
use crate::domain::{sample_task, Database, TaskSpec};
use crate::error::{Error, Result};
use crate::manager::{Decision, DialogueManager};
use crate::policy::{AgentRole, LearningConfig};
use crate::simulator::{goal_satisfied, init_sim_user, sim_receive, sim_respond, SimConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardConfig {
    pub success_bonus: f64,
    pub turn_penalty: f64,
    pub social_bonus: f64,
    pub unsignalled_problem_penalty: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        RewardConfig { success_bonus: 80.0, turn_penalty: -1.0, social_bonus: 3.0, unsignalled_problem_penalty: -5.0 }
    }
}

/// Every exchange consists of one user turn and one system turn, and each
/// turn carries the turn penalty.
pub const TURNS_PER_EXCHANGE: u32 = 2;

/// One exchange's reward split by source.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub turn: f64,
    pub social: f64,
    pub problem: f64,
    pub success: f64,
}

impl RewardBreakdown {
    pub fn total(&self) -> f64 {
        self.turn + self.social + self.problem + self.success
    }
}

/// Number of pending user social acts answered by their counterpart.
pub fn social_responses(b: &BeliefState, response: &CombinedResponse) -> u32 {
    b.pending_social.iter().filter(|f| f.social_response().is_some_and(|r| response.contains(r))).count() as u32
}

/// The input was a processing problem and the response does not say so.
pub fn unsignalled_problem(ev: &UserInputEvent, response: &CombinedResponse) -> bool {
    ev.is_problem() && !response.acts.iter().any(|a| a.function.is_auto_negative())
}

pub fn turn_reward(
    b: &BeliefState,
    response: &CombinedResponse,
    ev: &UserInputEvent,
    terminal_success: bool,
    cfg: &RewardConfig,
) -> RewardBreakdown {
    RewardBreakdown {
        turn: cfg.turn_penalty * TURNS_PER_EXCHANGE as f64,
        social: cfg.social_bonus * social_responses(b, response) as f64,
        problem: if unsignalled_problem(ev, response) { cfg.unsignalled_problem_penalty } else { 0.0 },
        success: if terminal_success { cfg.success_bonus } else { 0.0 },
    }
}

/// Reward for the exchange ending in `response`, the system's answer to
/// `ev`; `b` is the belief after `ev`.
pub fn compute_turn_reward(
    b: &BeliefState,
    response: &CombinedResponse,
    ev: &UserInputEvent,
    terminal_success: bool,
    cfg: &RewardConfig,
) -> f64 {
    turn_reward(b, response, ev, terminal_success, cfg).total()
}

/// Simulation settings shared by training and evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub error: ErrorConfig,
    pub simulator: SimConfig,
    pub reward: RewardConfig,
    pub max_exchanges: u32,
}

impl Default for Environment {
    fn default() -> Self {
        Environment {
            error: ErrorConfig::default(),
            simulator: SimConfig::default(),
            reward: RewardConfig::default(),
            max_exchanges: 40,
        }
    }
}

impl Environment {
    pub fn with_error_rate(&self, e: f64) -> Self {
        let mut env = self.clone();
        env.error.semantic_error_rate = e;
        env
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnRecord {
    pub user_acts: Vec<DialogueAct>,
    pub event: String,
    pub system_acts: Vec<DialogueAct>,
    pub action: CombinedAction,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cancelled: Vec<Cancellation>,
    pub reward: RewardBreakdown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub task: TaskSpec,
    pub success: bool,
    /// User and system turns together.
    pub turns: u32,
    pub exchanges: u32,
    pub total_reward: f64,
    pub social_responses: u32,
    pub unsignalled_problems: u32,
    /// Empty unless tracing was requested.
    pub trace: Vec<TurnRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeOptions {
    pub epsilon: f64,
    /// Apply SARSA updates with this configuration.
    pub learning: Option<LearningConfig>,
    pub trace: bool,
}

impl EpisodeOptions {
    pub fn greedy() -> Self {
        EpisodeOptions { epsilon: 0.0, learning: None, trace: true }
    }
}

/// Runs one simulated dialogue on a sampled task.
pub fn run_episode(
    manager: &mut DialogueManager,
    db: &Database,
    env: &Environment,
    opts: &EpisodeOptions,
    rng: &mut ChaCha8Rng,
) -> Result<EpisodeResult> {
    let task = sample_task(db, rng);
    run_episode_on(manager, &task, db, env, opts, rng)
}

/// [`run_episode`] without learning, for shared read-only managers.
pub fn simulate_episode(
    manager: &DialogueManager,
    db: &Database,
    env: &Environment,
    epsilon: f64,
    trace: bool,
    rng: &mut ChaCha8Rng,
) -> EpisodeResult {
    let task = sample_task(db, rng);
    episode_loop(Learner::Frozen(manager), &task, db, env, epsilon, trace, rng).expect("no learning, no errors")
}

pub fn run_episode_on(
    manager: &mut DialogueManager,
    task: &TaskSpec,
    db: &Database,
    env: &Environment,
    opts: &EpisodeOptions,
    rng: &mut ChaCha8Rng,
) -> Result<EpisodeResult> {
    let learner = match opts.learning {
        Some(cfg) => Learner::Learning(manager, cfg),
        None => Learner::Frozen(manager),
    };
    episode_loop(learner, task, db, env, opts.epsilon, opts.trace, rng)
}

enum Learner<'a> {
    Frozen(&'a DialogueManager),
    Learning(&'a mut DialogueManager, LearningConfig),
}

impl Learner<'_> {
    fn manager(&self) -> &DialogueManager {
        match self {
            Learner::Frozen(m) => m,
            Learner::Learning(m, _) => m,
        }
    }

    fn learn(&mut self, prev: &Decision, reward: f64, next: Option<&Decision>) -> Result<()> {
        match self {
            Learner::Frozen(_) => Ok(()),
            Learner::Learning(m, cfg) => m.learn(prev, reward, next, cfg),
        }
    }
}

fn episode_loop(
    mut learner: Learner<'_>,
    task: &TaskSpec,
    db: &Database,
    env: &Environment,
    epsilon: f64,
    keep_trace: bool,
    rng: &mut ChaCha8Rng,
) -> Result<EpisodeResult> {
    let ont = &db.ontology;
    let mut user = init_sim_user(task, &env.simulator, rng);
    let mut belief = init_belief(ont);
    let mut result = EpisodeResult {
        task: task.clone(),
        success: false,
        turns: 0,
        exchanges: 0,
        total_reward: 0.0,
        social_responses: 0,
        unsignalled_problems: 0,
        trace: Vec::new(),
    };
    let mut pending: Option<(Decision, f64)> = None;
    for exchange in 1..=env.max_exchanges {
        let user_acts = sim_respond(&mut user, &env.simulator, rng);
        let ev = corrupt_user_act(&user_acts, &env.error, ont, rng);
        belief.apply_event(&ev, ont);
        let decision = learner.manager().decide(&belief, db, epsilon, rng);
        if let Some((prev, r)) = pending.take() {
            learner.learn(&prev, r, Some(&decision))?;
        }
        let response = &decision.response;
        let social = social_responses(&belief, response);
        let unsignalled = unsignalled_problem(&ev, response);
        belief.note_system_response(response, db);
        sim_receive(&mut user, &response.acts, db, rng);
        let terminal = response.ends_dialogue || user.over || user.left || exchange == env.max_exchanges;
        let success = terminal && goal_satisfied(&user);
        let reward = RewardBreakdown {
            turn: env.reward.turn_penalty * TURNS_PER_EXCHANGE as f64,
            social: env.reward.social_bonus * social as f64,
            problem: if unsignalled { env.reward.unsignalled_problem_penalty } else { 0.0 },
            success: if success { env.reward.success_bonus } else { 0.0 },
        };
        result.exchanges = exchange;
        result.turns = exchange * TURNS_PER_EXCHANGE;
        result.total_reward += reward.total();
        result.social_responses += social;
        result.unsignalled_problems += unsignalled as u32;
        if keep_trace {
            result.trace.push(TurnRecord {
                user_acts,
                event: ev.kind().to_string(),
                system_acts: response.acts.clone(),
                action: response.effective.clone(),
                cancelled: response.cancelled.clone(),
                reward,
            });
        }
        if terminal {
            result.success = success;
            learner.learn(&decision, reward.total(), None)?;
            break;
        }
        pending = Some((decision, reward.total()));
    }
    Ok(result)
}

// ---------------------------------------------------------------------------
// Seeding.

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Purposes for which independent random streams are derived from a seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamPurpose {
    SourceTraining = 1,
    TargetTraining = 2,
    Evaluation = 3,
    Service = 4,
}

/// Deterministic generator for episode `index` of a given purpose.
pub fn episode_rng(seed: u64, purpose: StreamPurpose, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(mix(seed ^ mix(purpose as u64)));
    rng.set_stream(index);
    rng
}

// ---------------------------------------------------------------------------
// Training.

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub dialogues: usize,
    pub success_rate: f64,
    pub avg_reward: f64,
    pub avg_turns: f64,
    pub epsilon: f64,
}

pub const CURVE_WINDOW: usize = 1000;

/// Trains `manager` in place for `n` dialogues and returns the learning curve.
pub fn train_manager(
    manager: &mut DialogueManager,
    db: &Database,
    env: &Environment,
    learning: &LearningConfig,
    n: usize,
    seed: u64,
    purpose: StreamPurpose,
) -> Result<Vec<CurvePoint>> {
    train_with_thaw(manager, db, env, learning, n, seed, purpose, None)
}

/// Like [`train_manager`], but the agents in `thaw.1` only become
/// trainable once `thaw.0` dialogues have been played.
#[allow(clippy::too_many_arguments)]
fn train_with_thaw(
    manager: &mut DialogueManager,
    db: &Database,
    env: &Environment,
    learning: &LearningConfig,
    n: usize,
    seed: u64,
    purpose: StreamPurpose,
    thaw: Option<(usize, &[AgentRole])>,
) -> Result<Vec<CurvePoint>> {
    let set_trainable = |manager: &mut DialogueManager, on: bool| {
        if let Some((_, roles)) = thaw {
            for &role in roles {
                if let Some(agent) = manager.agent_mut(role) {
                    agent.trainable = on;
                }
            }
        }
    };
    set_trainable(manager, false);
    let mut curve = Vec::new();
    let (mut wins, mut reward, mut turns, mut count) = (0usize, 0.0, 0u64, 0usize);
    for i in 0..n {
        if thaw.is_some_and(|(after, _)| after == i) {
            set_trainable(manager, true);
        }
        let epsilon = learning.epsilon.value(i, n);
        let opts = EpisodeOptions { epsilon, learning: Some(*learning), trace: false };
        let mut rng = episode_rng(seed, purpose, i as u64);
        let r = run_episode(manager, db, env, &opts, &mut rng)?;
        wins += r.success as usize;
        reward += r.total_reward;
        turns += r.turns as u64;
        count += 1;
        if count == CURVE_WINDOW || i + 1 == n {
            curve.push(CurvePoint {
                dialogues: i + 1,
                success_rate: wins as f64 / count as f64,
                avg_reward: reward / count as f64,
                avg_turns: turns as f64 / count as f64,
                epsilon,
            });
            (wins, reward, turns, count) = (0, 0.0, 0, 0);
        }
    }
    if thaw.is_some_and(|(after, _)| after >= n) {
        set_trainable(manager, true);
    }
    for agent in &mut manager.agents {
        agent.meta.training_dialogues += n as u64;
    }
    Ok(curve)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegimeKind {
    OneDim,
    MultiDim,
    TransFixed,
    TransAdapt,
}

impl RegimeKind {
    pub const ALL: [RegimeKind; 4] =
        [RegimeKind::OneDim, RegimeKind::MultiDim, RegimeKind::TransFixed, RegimeKind::TransAdapt];

    pub fn name(self) -> &'static str {
        match self {
            RegimeKind::OneDim => "one-dim",
            RegimeKind::MultiDim => "multi-dim",
            RegimeKind::TransFixed => "trans-fixed",
            RegimeKind::TransAdapt => "trans-adapt",
        }
    }

    pub fn uses_transfer(self) -> bool {
        matches!(self, RegimeKind::TransFixed | RegimeKind::TransAdapt)
    }
}

impl fmt::Display for RegimeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RegimeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RegimeKind::ALL.into_iter().find(|r| r.name() == s).ok_or_else(|| {
            Error::Config(format!("unknown regime {s:?}; expected one-dim, multi-dim, trans-fixed or trans-adapt"))
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingRegime {
    pub kind: RegimeKind,
    /// One checkpoint directory per run, holding source-domain agents.
    pub source_checkpoints: Option<Vec<PathBuf>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSetting {
    pub domain: String,
    /// Overrides `error.semantic_error_rate` for this domain.
    #[serde(default)]
    pub error_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub dialogues: usize,
    pub rates: Vec<f64>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { dialogues: 5000, rates: vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5] }
    }
}

/// Everything needed to reproduce an experiment, loadable from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub runs: usize,
    pub dialogues: usize,
    /// Source-domain training budget; defaults to `dialogues`.
    #[serde(default)]
    pub source_dialogues: Option<usize>,
    pub max_exchanges: u32,
    pub out: PathBuf,
    pub regimes: Vec<RegimeKind>,
    pub target: DomainSetting,
    pub source: DomainSetting,
    pub error: ErrorConfig,
    pub simulator: SimConfig,
    pub learning: LearningConfig,
    pub reward: RewardConfig,
    #[serde(default)]
    pub eval: EvalConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 1,
            runs: 5,
            dialogues: 60_000,
            source_dialogues: None,
            max_exchanges: 40,
            out: PathBuf::from("runs"),
            regimes: RegimeKind::ALL.to_vec(),
            target: DomainSetting { domain: "restaurants".into(), error_rate: Some(0.30) },
            source: DomainSetting { domain: "hotels".into(), error_rate: Some(0.20) },
            error: ErrorConfig::default(),
            simulator: SimConfig::default(),
            learning: LearningConfig::default(),
            reward: RewardConfig::default(),
            eval: EvalConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::parse("experiment config", e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.error.validate()?;
        self.simulator.validate()?;
        self.learning.validate()?;
        if self.runs == 0 || self.dialogues == 0 {
            return Err(Error::Config("runs and dialogues must be positive".into()));
        }
        if self.max_exchanges == 0 {
            return Err(Error::Config("max_exchanges must be positive".into()));
        }
        for setting in [&self.target, &self.source] {
            if let Some(e) = setting.error_rate {
                if !(0.0..=1.0).contains(&e) {
                    return Err(Error::Config(format!("error rate {e} for {} is not a probability", setting.domain)));
                }
            }
        }
        Ok(())
    }

    fn environment(&self, setting: &DomainSetting) -> Environment {
        let mut error = self.error.clone();
        if let Some(e) = setting.error_rate {
            error.semantic_error_rate = e;
        }
        Environment { error, simulator: self.simulator.clone(), reward: self.reward, max_exchanges: self.max_exchanges }
    }

    pub fn target_environment(&self) -> Environment {
        self.environment(&self.target)
    }

    pub fn source_environment(&self) -> Environment {
        self.environment(&self.source)
    }

    pub fn run_seed(&self, run: usize) -> u64 {
        self.seed.wrapping_add(run as u64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub regime: RegimeKind,
    pub run: usize,
    pub seed: u64,
    pub manager: DialogueManager,
    pub curve: Vec<CurvePoint>,
}

fn stamp(manager: &mut DialogueManager, regime: &str, seed: u64) {
    for agent in &mut manager.agents {
        agent.meta.regime = regime.to_string();
        agent.meta.seed = seed;
    }
}

/// Trains the three-agent manager on the source domain for one run.
pub fn train_source(source: &Database, cfg: &ExperimentConfig, run: usize) -> Result<RunOutput> {
    let seed = cfg.run_seed(run);
    let mut manager = initial_manager(RegimeKind::MultiDim, source, None, &cfg.learning)?;
    stamp(&mut manager, "source", seed);
    let n = cfg.source_dialogues.unwrap_or(cfg.dialogues);
    let curve = train_manager(
        &mut manager,
        source,
        &cfg.source_environment(),
        &cfg.learning,
        n,
        seed,
        StreamPurpose::SourceTraining,
    )?;
    Ok(RunOutput { regime: RegimeKind::MultiDim, run, seed, manager, curve })
}

/// Builds the untrained target manager of a regime, transferring the
/// domain-independent agents from `source` where the regime asks for it.
pub fn initial_manager(
    kind: RegimeKind,
    target: &Database,
    source: Option<&DialogueManager>,
    learning: &LearningConfig,
) -> Result<DialogueManager> {
    let ont = &target.ontology;
    let fresh = |mut m: DialogueManager| {
        for agent in &mut m.agents {
            agent.set_initial_value(learning.initial_value);
        }
        m
    };
    match kind {
        RegimeKind::OneDim => Ok(fresh(DialogueManager::one_dim(ont))),
        RegimeKind::MultiDim => Ok(fresh(DialogueManager::multi_dim(ont))),
        RegimeKind::TransFixed | RegimeKind::TransAdapt => {
            let source = source.ok_or_else(|| Error::Config(format!("{kind} needs source-domain agents")))?;
            let mut manager = fresh(DialogueManager::multi_dim(ont));
            for role in [AgentRole::AutoFeedback, AgentRole::Som] {
                let transferred =
                    source.agent(role).ok_or_else(|| Error::Config(format!("source manager has no {role} agent")))?;
                let slot = manager.agent_mut(role).expect("multi-dimensional manager");
                if transferred.policy.catalogue_version != slot.policy.catalogue_version {
                    return Err(Error::CatalogueMismatch {
                        expected: slot.policy.catalogue_version.to_string(),
                        found: transferred.policy.catalogue_version.to_string(),
                    });
                }
                slot.policy.weights = transferred.policy.weights.clone();
                slot.meta.training_dialogues = transferred.meta.training_dialogues;
                slot.trainable = kind == RegimeKind::TransAdapt;
            }
            Ok(manager)
        }
    }
}

/// Trains one run of a regime on the target domain.
pub fn train_run(
    kind: RegimeKind,
    target: &Database,
    source: Option<&DialogueManager>,
    cfg: &ExperimentConfig,
    run: usize,
) -> Result<RunOutput> {
    let seed = cfg.run_seed(run);
    let mut manager = initial_manager(kind, target, source, &cfg.learning)?;
    stamp(&mut manager, kind.name(), seed);
    let transferred = [AgentRole::AutoFeedback, AgentRole::Som];
    let curve = train_with_thaw(
        &mut manager,
        target,
        &cfg.target_environment(),
        &cfg.learning,
        cfg.dialogues,
        seed,
        StreamPurpose::TargetTraining,
        (kind == RegimeKind::TransAdapt).then_some((cfg.learning.adapt_after, &transferred[..])),
    )?;
    Ok(RunOutput { regime: kind, run, seed, manager, curve })
}

/// All runs of one regime, in parallel. Transfer regimes use the given
/// source checkpoints or train their own source managers first.
pub fn train_regime(
    regime: &TrainingRegime,
    target: &Database,
    source: &Database,
    cfg: &ExperimentConfig,
) -> Result<Vec<RunOutput>> {
    let sources: Option<Vec<DialogueManager>> = if regime.kind.uses_transfer() {
        Some(match &regime.source_checkpoints {
            Some(dirs) => {
                if dirs.len() < cfg.runs {
                    return Err(Error::Config(format!("{} source checkpoints for {} runs", dirs.len(), cfg.runs)));
                }
                dirs.iter().map(|d| DialogueManager::load(d, &source.ontology)).collect::<Result<_>>()?
            }
            None => (0..cfg.runs)
                .into_par_iter()
                .map(|run| train_source(source, cfg, run).map(|o| o.manager))
                .collect::<Result<_>>()?,
        })
    } else {
        None
    };
    (0..cfg.runs)
        .into_par_iter()
        .map(|run| train_run(regime.kind, target, sources.as_ref().map(|s| &s[run]), cfg, run))
        .collect()
}

/// Result of training every configured regime.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub sources: Vec<RunOutput>,
    pub runs: Vec<RunOutput>,
}

/// Trains all configured regimes, sharing one source manager per run
/// between the transfer regimes.
pub fn train_all(target: &Database, source: &Database, cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let needs_source = cfg.regimes.iter().any(|r| r.uses_transfer());
    let sources: Vec<RunOutput> = if needs_source {
        (0..cfg.runs).into_par_iter().map(|run| train_source(source, cfg, run)).collect::<Result<_>>()?
    } else {
        Vec::new()
    };
    let managers: Vec<DialogueManager> = sources.iter().map(|o| o.manager.clone()).collect();
    let runs = train_targets(target, &managers, cfg)?;
    Ok(ExperimentOutput { sources, runs })
}

/// Trains every configured regime on the target domain; transfer regimes
/// take their domain-independent agents from `sources[run]`.
pub fn train_targets(target: &Database, sources: &[DialogueManager], cfg: &ExperimentConfig) -> Result<Vec<RunOutput>> {
    if cfg.regimes.iter().any(|r| r.uses_transfer()) && sources.len() < cfg.runs {
        return Err(Error::Config(format!("{} source managers for {} runs", sources.len(), cfg.runs)));
    }
    let jobs: Vec<(RegimeKind, usize)> =
        cfg.regimes.iter().flat_map(|&k| (0..cfg.runs).map(move |run| (k, run))).collect();
    jobs.into_par_iter()
        .map(|(kind, run)| {
            let src = kind.uses_transfer().then(|| &sources[run]);
            train_run(kind, target, src, cfg, run)
        })
        .collect()
}

/// Source-domain managers saved by [`save_outputs`] under `<root>/source/`.
pub fn load_sources(root: &Path, runs: usize, source: &Database) -> Result<Vec<DialogueManager>> {
    (0..runs).map(|run| DialogueManager::load(run_dir(root, "source", run), &source.ontology)).collect()
}

/// Checkpoint directory of one run below an experiment's output directory.
pub fn run_dir(out: &Path, regime: &str, run: usize) -> PathBuf {
    out.join(regime).join(format!("run-{run}"))
}

/// Writes checkpoints and learning curves as `<out>/<regime>/run-<k>/`.
pub fn save_outputs(out: &Path, outputs: &ExperimentOutput) -> Result<()> {
    let tagged = outputs.sources.iter().map(|o| ("source", o)).chain(outputs.runs.iter().map(|o| (o.regime.name(), o)));
    for (name, o) in tagged {
        let dir = run_dir(out, name, o.run);
        o.manager.save(&dir)?;
        write_curve(&dir.join("curve.csv"), &o.curve)?;
    }
    Ok(())
}

pub fn write_curve(path: &Path, curve: &[CurvePoint]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::parse(format!("curve {}", path.display()), e))?;
    for p in curve {
        w.serialize(p).map_err(|e| Error::parse("curve record", e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Loads the five-run pool of a regime written by [`save_outputs`].
pub fn load_pool(out: &Path, regime: RegimeKind, runs: usize, db: &Database) -> Result<Vec<DialogueManager>> {
    (0..runs).map(|run| DialogueManager::load(run_dir(out, regime.name(), run), &db.ontology)).collect()
}
