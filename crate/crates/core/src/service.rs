//! Stateful text dialogue sessions for human evaluation: scenario sampling,
//! turn processing through parse, belief update, greedy agents, combination
//! and generation, questionnaire capture and JSON-lines dialogue logs.

use std::collections::{BTreeMap, HashMap};
use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use rand::{Rng, RngCore};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::acts::{CommFunction, DialogueAct, NBestList, UserInputEvent};
use crate::belief::{init_belief, BeliefState, SlotSummary};
use crate::channel::{corrupt_user_act, ErrorConfig};
use crate::domain::{render_task_text, sample_task, Database, TaskSpec};
use crate::error::{Error, Result};
use crate::eval::{objective_metrics, ObjectiveMetrics};
use crate::manager::DialogueManager;
use crate::nlg::{annotations, generate_utterance, greeting, user_utterance};
use crate::nlu::parse_utterance;
use crate::simulator::{init_sim_user, sim_receive, sim_respond, SimConfig};
use crate::training::{episode_rng, turn_reward, RewardConfig, StreamPurpose};

/// The questionnaire shown after each conversation, in order.
pub const QUESTIONS: [&str; 5] = [
    "Did you find all the information you were looking for?",
    "The system was easy to understand (the voice was intelligible).",
    "In this conversation, the system understood what you said.",
    "The system worked the way you expected it to during the conversation.",
    "From your experience with the system, you think you would use it in the future to find a place to eat.",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceConfig {
    /// Pass parsed input through the simulated error channel.
    pub inject_noise: bool,
    pub error: ErrorConfig,
    pub reward: RewardConfig,
    /// Sessions end after the system answers a farewell, or after this
    /// many exchanges.
    pub max_exchanges: u32,
    pub seed: u64,
    /// Directory for per-session JSON-lines logs and questionnaires.
    pub log_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            inject_noise: false,
            error: ErrorConfig::default(),
            reward: RewardConfig::default(),
            max_exchanges: 40,
            seed: 1,
            log_dir: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionStatus {
    Active,
    Finished,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionOpened {
    pub session_id: String,
    pub task_text: String,
    pub greeting: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TurnReply {
    pub system_text: String,
    /// Canonical act strings, e.g. `autofeedback.auto_positive()`.
    pub acts: Vec<String>,
    /// Dimension tags, e.g. `AutoFeedback: autoPositive`.
    pub annotations: Vec<String>,
    pub finished: bool,
}

/// Answers to the five questions: Q1 yes/no, Q2 to Q5 on a 1 to 6 scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Questionnaire {
    #[serde(rename = "q1")]
    pub q1_subj_succ: bool,
    #[serde(rename = "q2")]
    pub q2_voice_int: u8,
    #[serde(rename = "q3")]
    pub q3_understand: u8,
    #[serde(rename = "q4")]
    pub q4_as_expect: u8,
    #[serde(rename = "q5")]
    pub q5_would_use: u8,
}

impl Questionnaire {
    pub fn validate(&self) -> Result<()> {
        let ratings = [
            ("q2", self.q2_voice_int),
            ("q3", self.q3_understand),
            ("q4", self.q4_as_expect),
            ("q5", self.q5_would_use),
        ];
        for (field, value) in ratings {
            if !(1..=6).contains(&value) {
                return Err(Error::RatingOutOfRange { field, value });
            }
        }
        Ok(())
    }
}

/// One processed turn, as written to the dialogue log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnLog {
    pub session: String,
    pub turn: u32,
    pub user_text: String,
    pub parsed_acts: Vec<String>,
    pub event_kind: String,
    pub belief_summary: BTreeMap<String, SlotSummary>,
    /// `role=action` per agent.
    pub agent_actions: Vec<String>,
    pub fired_rules: Vec<String>,
    pub system_acts: Vec<String>,
    pub system_text: String,
    pub reward: f64,
}

impl TurnLog {
    /// Re-parses the logged system acts from their canonical form.
    pub fn system_dialogue_acts(&self) -> Result<Vec<DialogueAct>> {
        self.system_acts.iter().map(|s| s.parse()).collect()
    }

    pub fn parsed_dialogue_acts(&self) -> Result<Vec<DialogueAct>> {
        self.parsed_acts.iter().map(|s| s.parse()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionLog {
    pub session_id: String,
    pub task: TaskSpec,
    pub task_text: String,
    pub status: SessionStatus,
    pub turns: Vec<TurnLog>,
    pub objective: Option<ObjectiveMetrics>,
    pub questionnaire: Option<Questionnaire>,
}

/// Stored questionnaire joined with its transcript.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionnaireRecord {
    pub session_id: String,
    pub questionnaire: Questionnaire,
    pub task: TaskSpec,
    pub transcript: Vec<TurnLog>,
}

struct Session {
    id: String,
    task: TaskSpec,
    task_text: String,
    belief: BeliefState,
    manager: usize,
    transcript: Vec<TurnLog>,
    system_acts: Vec<Vec<DialogueAct>>,
    status: SessionStatus,
    objective: Option<ObjectiveMetrics>,
    questionnaire: Option<Questionnaire>,
    rng: ChaCha8Rng,
}

/// Many concurrent sessions over a shared, read-only pool of managers.
/// Each session sits behind its own lock, so turns of one session are
/// processed one at a time while different sessions proceed in parallel.
pub struct DialogueService {
    db: Database,
    pool: Vec<DialogueManager>,
    cfg: ServiceConfig,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
    opened: AtomicU64,
}

fn append_line(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut line = serde_json::to_string(value).map_err(|e| Error::parse("log record", e))?;
    line.push('\n');
    let mut file = OpenOptions::new().create(true).append(true).open(path).map_err(|e| Error::io(path, e))?;
    file.write_all(line.as_bytes()).map_err(|e| Error::io(path, e))
}

impl DialogueService {
    pub fn new(db: Database, pool: Vec<DialogueManager>, cfg: ServiceConfig) -> Result<Self> {
        if pool.is_empty() {
            return Err(Error::Config("the service needs at least one trained manager".into()));
        }
        cfg.error.validate()?;
        if let Some(dir) = &cfg.log_dir {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        Ok(DialogueService { db, pool, cfg, sessions: RwLock::new(HashMap::new()), opened: AtomicU64::new(0) })
    }

    pub fn database(&self) -> &Database {
        &self.db
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.cfg
    }

    /// Starts a session on a freshly sampled task.
    pub fn open(&self) -> SessionOpened {
        self.open_inner(None)
    }

    /// Starts a session on a given task, e.g. for scripted users.
    pub fn open_with_task(&self, task: TaskSpec) -> SessionOpened {
        self.open_inner(Some(task))
    }

    fn open_inner(&self, task: Option<TaskSpec>) -> SessionOpened {
        let k = self.opened.fetch_add(1, Ordering::SeqCst);
        let mut rng = episode_rng(self.cfg.seed, StreamPurpose::Service, k);
        let id = format!("{k:06}-{:08x}", rng.next_u32());
        let task = task.unwrap_or_else(|| sample_task(&self.db, &mut rng));
        let task_text = render_task_text(&task, &self.db.ontology);
        let session = Session {
            id: id.clone(),
            task,
            task_text: task_text.clone(),
            belief: init_belief(&self.db.ontology),
            manager: (k as usize) % self.pool.len(),
            transcript: Vec::new(),
            system_acts: Vec::new(),
            status: SessionStatus::Active,
            objective: None,
            questionnaire: None,
            rng,
        };
        self.sessions.write().expect("session table lock").insert(id.clone(), Arc::new(Mutex::new(session)));
        SessionOpened { session_id: id, task_text, greeting: greeting(&self.db.ontology) }
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>> {
        self.sessions
            .read()
            .expect("session table lock")
            .get(id)
            .cloned()
            .ok_or_else(|| Error::UnknownSession(id.to_string()))
    }

    /// Index into the manager pool serving a session.
    pub fn session_manager(&self, id: &str) -> Result<usize> {
        Ok(self.session(id)?.lock().expect("session lock").manager)
    }

    pub fn task(&self, id: &str) -> Result<TaskSpec> {
        Ok(self.session(id)?.lock().expect("session lock").task.clone())
    }

    /// Processes one user turn with the configured noise setting.
    pub fn turn(&self, id: &str, user_text: &str) -> Result<TurnReply> {
        self.turn_with(id, user_text, self.cfg.inject_noise)
    }

    pub fn turn_with(&self, id: &str, user_text: &str, inject_noise: bool) -> Result<TurnReply> {
        let handle = self.session(id)?;
        let mut guard = handle.lock().expect("session lock");
        let s = &mut *guard;
        if s.status == SessionStatus::Finished {
            return Err(Error::SessionFinished(id.to_string()));
        }
        let ont = &self.db.ontology;
        let parsed = if user_text.trim().is_empty() { Vec::new() } else { parse_utterance(user_text, ont) };
        let event = if user_text.trim().is_empty() {
            UserInputEvent::PerceptionProblem
        } else if parsed.is_empty() {
            UserInputEvent::InterpretationProblem
        } else if inject_noise {
            corrupt_user_act(&parsed, &self.cfg.error, ont, &mut s.rng)
        } else {
            UserInputEvent::NBest(NBestList::certain(parsed.clone()))
        };

        let manager = &self.pool[s.manager];
        s.belief.apply_event(&event, ont);
        let decision = manager.decide(&s.belief, &self.db, 0.0, &mut s.rng);
        let response = decision.response;
        let belief_summary = s.belief.summary(ont);
        s.system_acts.push(response.acts.clone());

        let turn = s.transcript.len() as u32 + 1;
        let user_left = parsed.iter().any(|a| a.function == CommFunction::Bye);
        let finished = response.ends_dialogue || user_left || turn >= self.cfg.max_exchanges;
        if finished {
            s.status = SessionStatus::Finished;
            s.objective = objective_metrics(&s.task, s.system_acts.iter().map(Vec::as_slice), &self.db).ok();
        }
        let success = s.objective.is_some_and(|m| m.objective_success());
        let reward = turn_reward(&s.belief, &response, &event, success, &self.cfg.reward);
        s.belief.note_system_response(&response, &self.db);

        let mut fired_rules: Vec<String> = Vec::new();
        for c in &response.cancelled {
            if !fired_rules.contains(&c.rule) {
                fired_rules.push(c.rule.clone());
            }
        }
        if response.ends_dialogue && fired_rules.is_empty() {
            fired_rules.extend(manager.rules.rules.iter().filter(|r| r.ends_dialogue).map(|r| r.id.clone()));
        }
        let system_text = generate_utterance(&response, ont);
        let record = TurnLog {
            session: s.id.clone(),
            turn,
            user_text: user_text.to_string(),
            parsed_acts: parsed.iter().map(ToString::to_string).collect(),
            event_kind: event.kind().to_string(),
            belief_summary,
            agent_actions: manager
                .agents
                .iter()
                .zip(&decision.choices)
                .map(|(agent, (_, a))| format!("{}={}", agent.role, agent.actions()[*a]))
                .collect(),
            fired_rules,
            system_acts: response.acts.iter().map(ToString::to_string).collect(),
            system_text: system_text.clone(),
            reward: reward.total(),
        };
        if let Some(dir) = &self.cfg.log_dir {
            append_line(&dir.join(format!("{}.jsonl", s.id)), &record)?;
        }
        s.transcript.push(record);
        Ok(TurnReply {
            system_text,
            acts: response.acts.iter().map(ToString::to_string).collect(),
            annotations: annotations(&response.acts),
            finished,
        })
    }

    /// Stores the questionnaire of a finished session, once.
    pub fn submit_questionnaire(&self, id: &str, q: Questionnaire) -> Result<QuestionnaireRecord> {
        q.validate()?;
        let handle = self.session(id)?;
        let mut s = handle.lock().expect("session lock");
        match (s.status, s.questionnaire) {
            (SessionStatus::Active, _) => return Err(Error::SessionActive(id.to_string())),
            (SessionStatus::Finished, Some(_)) => return Err(Error::DuplicateQuestionnaire(id.to_string())),
            (SessionStatus::Finished, None) => {}
        }
        let record = QuestionnaireRecord {
            session_id: s.id.clone(),
            questionnaire: q,
            task: s.task.clone(),
            transcript: s.transcript.clone(),
        };
        if let Some(dir) = &self.cfg.log_dir {
            append_line(&dir.join("questionnaires.jsonl"), &record)?;
        }
        s.questionnaire = Some(q);
        Ok(record)
    }

    pub fn log(&self, id: &str) -> Result<SessionLog> {
        let handle = self.session(id)?;
        let s = handle.lock().expect("session lock");
        Ok(SessionLog {
            session_id: s.id.clone(),
            task: s.task.clone(),
            task_text: s.task_text.clone(),
            status: s.status,
            turns: s.transcript.clone(),
            objective: s.objective,
            questionnaire: s.questionnaire,
        })
    }
}

/// Reads a session log file written by the service.
pub fn read_turn_log(path: impl AsRef<Path>) -> Result<Vec<TurnLog>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(|e| Error::parse(format!("log {}", path.display()), e)))
        .collect()
}

/// Human-readable transcript, one line per utterance.
pub fn format_transcript(turns: &[TurnLog]) -> String {
    let mut out = String::new();
    for t in turns {
        out.push_str(&format!("Usr: {}\nSys: {}\n", t.user_text, t.system_text));
        if !t.system_acts.is_empty() {
            out.push_str(&format!("     [{}]\n", t.system_acts.join("; ")));
        }
    }
    out
}

/// Plays the simulated user as a cooperative typist: its acts are written
/// out as text, sent through a session, and the system's logged acts are
/// fed back to it. Returns the session log and the objective metrics of
/// the exchange.
pub fn run_scripted_session<R: Rng + ?Sized>(
    service: &DialogueService,
    task: &TaskSpec,
    sim: &SimConfig,
    rng: &mut R,
) -> Result<(SessionLog, ObjectiveMetrics)> {
    let db = service.database();
    let opened = service.open_with_task(task.clone());
    let mut user = init_sim_user(task, sim, rng);
    let mut system_turns = Vec::new();
    for _ in 0..service.config().max_exchanges {
        let acts = sim_respond(&mut user, sim, rng);
        let reply = service.turn(&opened.session_id, &user_utterance(&acts, &db.ontology))?;
        let system: Vec<DialogueAct> = reply.acts.iter().map(|a| a.parse()).collect::<Result<_>>()?;
        sim_receive(&mut user, &system, db, rng);
        system_turns.push(system);
        if reply.finished || user.over || user.left {
            break;
        }
    }
    let metrics = objective_metrics(task, system_turns.iter().map(Vec::as_slice), db)?;
    Ok((service.log(&opened.session_id)?, metrics))
}
