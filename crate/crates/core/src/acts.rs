//! Dialogue-act taxonomy, n-best input events and per-dimension action sets.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::domain::Ontology;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Dimension {
    Task,
    AutoFeedback,
    Som,
}

impl Dimension {
    pub const ALL: [Dimension; 3] = [Dimension::Task, Dimension::AutoFeedback, Dimension::Som];

    pub fn tag(self) -> &'static str {
        match self {
            Dimension::Task => "task",
            Dimension::AutoFeedback => "autofeedback",
            Dimension::Som => "som",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CommFunction {
    // Task
    Inform,
    InformSearch,
    Request,
    Recommend,
    Confirm,
    Disconfirm,
    // AutoFeedback
    AutoPositive,
    AutoNegativePerception,
    AutoNegativeInterpretation,
    FeedbackInform,
    // Social obligations management
    Greet,
    ReturnGreet,
    Bye,
    ReturnBye,
    Thank,
    AcceptThank,
}

impl CommFunction {
    pub const ALL: [CommFunction; 16] = [
        CommFunction::Inform,
        CommFunction::InformSearch,
        CommFunction::Request,
        CommFunction::Recommend,
        CommFunction::Confirm,
        CommFunction::Disconfirm,
        CommFunction::AutoPositive,
        CommFunction::AutoNegativePerception,
        CommFunction::AutoNegativeInterpretation,
        CommFunction::FeedbackInform,
        CommFunction::Greet,
        CommFunction::ReturnGreet,
        CommFunction::Bye,
        CommFunction::ReturnBye,
        CommFunction::Thank,
        CommFunction::AcceptThank,
    ];

    pub fn dimension(self) -> Dimension {
        use CommFunction::*;
        match self {
            Inform | InformSearch | Request | Recommend | Confirm | Disconfirm => Dimension::Task,
            AutoPositive | AutoNegativePerception | AutoNegativeInterpretation | FeedbackInform => {
                Dimension::AutoFeedback
            }
            Greet | ReturnGreet | Bye | ReturnBye | Thank | AcceptThank => Dimension::Som,
        }
    }

    pub fn name(self) -> &'static str {
        use CommFunction::*;
        match self {
            Inform => "inform",
            InformSearch => "inform_search",
            Request => "request",
            Recommend => "recommend",
            Confirm => "confirm",
            Disconfirm => "disconfirm",
            AutoPositive => "auto_positive",
            AutoNegativePerception => "auto_negative_perception",
            AutoNegativeInterpretation => "auto_negative_interpretation",
            FeedbackInform => "feedback_inform",
            Greet => "greet",
            ReturnGreet => "return_greet",
            Bye => "bye",
            ReturnBye => "return_bye",
            Thank => "thank",
            AcceptThank => "accept_thank",
        }
    }

    pub fn is_auto_negative(self) -> bool {
        matches!(self, CommFunction::AutoNegativePerception | CommFunction::AutoNegativeInterpretation)
    }

    /// Social acts a user can perform that oblige a system response.
    pub fn is_user_social(self) -> bool {
        matches!(self, CommFunction::Greet | CommFunction::Bye | CommFunction::Thank)
    }

    /// The system's reactive pressure-release for a user social act.
    pub fn social_response(self) -> Option<CommFunction> {
        match self {
            CommFunction::Greet => Some(CommFunction::ReturnGreet),
            CommFunction::Bye => Some(CommFunction::ReturnBye),
            CommFunction::Thank => Some(CommFunction::AcceptThank),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SemContent {
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub constraints: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub requested: BTreeSet<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entity: Option<String>,
}

impl SemContent {
    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty() && self.requested.is_empty() && self.entity.is_none()
    }
}

/// A communicative function with its semantic content; the dimension is
/// implied by the function.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DialogueAct {
    pub function: CommFunction,
    #[serde(default, skip_serializing_if = "SemContent::is_empty")]
    pub content: SemContent,
}

impl DialogueAct {
    pub fn new(function: CommFunction, content: SemContent) -> Result<Self> {
        let act = DialogueAct { function, content };
        act.validate()?;
        Ok(act)
    }

    pub fn bare(function: CommFunction) -> Self {
        DialogueAct { function, content: SemContent::default() }
    }

    pub fn inform<I, K, V>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<String>,
    {
        DialogueAct {
            function: CommFunction::Inform,
            content: SemContent {
                constraints: pairs.into_iter().map(|(k, v)| (k.into(), v.into())).collect(),
                ..Default::default()
            },
        }
    }

    pub fn request<I: IntoIterator<Item = S>, S: Into<String>>(slots: I) -> Self {
        DialogueAct {
            function: CommFunction::Request,
            content: SemContent { requested: slots.into_iter().map(Into::into).collect(), ..Default::default() },
        }
    }

    pub fn dimension(&self) -> Dimension {
        self.function.dimension()
    }

    pub fn validate(&self) -> Result<()> {
        match self.function {
            CommFunction::Recommend if self.content.entity.is_none() => {
                Err(Error::parse("dialogue act", "recommend requires an entity"))
            }
            CommFunction::Request if self.content.requested.is_empty() && self.content.constraints.is_empty() => {
                Err(Error::parse("dialogue act", "request requires a requested slot"))
            }
            _ => Ok(()),
        }
    }
}

fn needs_quotes(s: &str) -> bool {
    s.is_empty() || !s.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '&'))
}

fn write_value(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    if needs_quotes(s) {
        f.write_str("\"")?;
        for c in s.chars() {
            if c == '"' || c == '\\' {
                f.write_str("\\")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str("\"")
    } else {
        f.write_str(s)
    }
}

/// Canonical log form: `dimension.function(args)`, e.g. `task.inform(area=centre,cuisine=thai)`.
impl fmt::Display for DialogueAct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}(", self.dimension().tag(), self.function.name())?;
        let mut first = true;
        let mut sep = |f: &mut fmt::Formatter<'_>| -> fmt::Result {
            if !std::mem::take(&mut first) {
                f.write_str(",")?;
            }
            Ok(())
        };
        if let Some(e) = &self.content.entity {
            sep(f)?;
            f.write_str("entity=")?;
            write_value(f, e)?;
        }
        for (k, v) in &self.content.constraints {
            sep(f)?;
            write_value(f, k)?;
            f.write_str("=")?;
            write_value(f, v)?;
        }
        for r in &self.content.requested {
            sep(f)?;
            write_value(f, r)?;
        }
        f.write_str(")")
    }
}

fn parse_token(chars: &mut std::iter::Peekable<std::str::Chars<'_>>) -> std::result::Result<String, String> {
    let mut out = String::new();
    if chars.peek() == Some(&'"') {
        chars.next();
        loop {
            match chars.next() {
                Some('\\') => out.push(chars.next().ok_or("dangling escape")?),
                Some('"') => return Ok(out),
                Some(c) => out.push(c),
                None => return Err("unterminated string".into()),
            }
        }
    }
    while let Some(&c) = chars.peek() {
        if c == ',' || c == '=' || c == ')' {
            break;
        }
        out.push(c);
        chars.next();
    }
    if out.is_empty() {
        return Err("empty token".into());
    }
    Ok(out)
}

impl FromStr for DialogueAct {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let err = |m: &str| Error::parse(format!("dialogue act `{s}`"), m);
        let s = s.trim();
        let open = s.find('(').ok_or_else(|| err("missing `(`"))?;
        if !s.ends_with(')') {
            return Err(err("missing `)`"));
        }
        let (head, args) = (&s[..open], &s[open + 1..s.len() - 1]);
        let (dim, func) = head.split_once('.').ok_or_else(|| err("missing dimension prefix"))?;
        let function = CommFunction::ALL
            .into_iter()
            .find(|f| f.name() == func)
            .ok_or_else(|| err("unknown communicative function"))?;
        if function.dimension().tag() != dim {
            return Err(err("function does not belong to dimension"));
        }
        let mut content = SemContent::default();
        let mut chars = args.chars().peekable();
        while chars.peek().is_some() {
            let key = parse_token(&mut chars).map_err(|m| err(&m))?;
            if chars.peek() == Some(&'=') {
                chars.next();
                let value = parse_token(&mut chars).map_err(|m| err(&m))?;
                if key == "entity" {
                    content.entity = Some(value);
                } else {
                    content.constraints.insert(key, value);
                }
            } else {
                content.requested.insert(key);
            }
            match chars.next() {
                Some(',') | None => {}
                Some(_) => return Err(err("expected `,`")),
            }
        }
        DialogueAct::new(function, content)
    }
}

/// Renders an act list as `a; b; c`.
pub fn format_acts(acts: &[DialogueAct]) -> String {
    acts.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// True iff both lists hold the same multiset of acts, ignoring order.
pub fn acts_semantically_equal(a: &[DialogueAct], b: &[DialogueAct]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut a: Vec<&DialogueAct> = a.iter().collect();
    let mut b: Vec<&DialogueAct> = b.iter().collect();
    a.sort();
    b.sort();
    a == b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub acts: Vec<DialogueAct>,
    pub confidence: f64,
}

/// Ranked user-act hypotheses (at most 3, confidences sum to at most one).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NBestList {
    hypotheses: Vec<Hypothesis>,
}

pub const MAX_NBEST: usize = 3;

impl NBestList {
    pub fn new(hypotheses: Vec<Hypothesis>) -> Result<Self> {
        let bad = |m: &str| Err(Error::parse("n-best list", m));
        if hypotheses.len() > MAX_NBEST {
            return bad("more than 3 hypotheses");
        }
        let total: f64 = hypotheses.iter().map(|h| h.confidence).sum();
        if total > 1.0 + 1e-9 {
            return bad("confidences sum above one");
        }
        if hypotheses.iter().any(|h| !(0.0..=1.0).contains(&h.confidence)) {
            return bad("confidence outside [0, 1]");
        }
        if hypotheses.windows(2).any(|w| w[0].confidence < w[1].confidence) {
            return bad("hypotheses not sorted by confidence");
        }
        for (i, h) in hypotheses.iter().enumerate() {
            if hypotheses[..i].iter().any(|g| acts_semantically_equal(&g.acts, &h.acts)) {
                return bad("duplicate hypothesis");
            }
        }
        Ok(NBestList { hypotheses })
    }

    /// A single hypothesis with confidence one.
    pub fn certain(acts: Vec<DialogueAct>) -> Self {
        NBestList { hypotheses: vec![Hypothesis { acts, confidence: 1.0 }] }
    }

    pub fn hypotheses(&self) -> &[Hypothesis] {
        &self.hypotheses
    }

    pub fn top(&self) -> Option<&Hypothesis> {
        self.hypotheses.first()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum UserInputEvent {
    NBest(NBestList),
    PerceptionProblem,
    InterpretationProblem,
}

impl UserInputEvent {
    pub fn kind(&self) -> &'static str {
        match self {
            UserInputEvent::NBest(_) => "nbest",
            UserInputEvent::PerceptionProblem => "perception_problem",
            UserInputEvent::InterpretationProblem => "interpretation_problem",
        }
    }

    pub fn is_problem(&self) -> bool {
        !matches!(self, UserInputEvent::NBest(_))
    }
}

// ---------------------------------------------------------------------------
// Abstract actions selected by the policies.

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TaskAction {
    RequestSlot(String),
    Recommend,
    InformRequested,
    InformSearch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FeedbackAction {
    None,
    AutoPositive,
    AutoNegativePerception,
    AutoNegativeInterpretation,
    FeedbackInformConfirm,
}

impl FeedbackAction {
    pub const ALL: [FeedbackAction; 5] = [
        FeedbackAction::None,
        FeedbackAction::AutoPositive,
        FeedbackAction::AutoNegativePerception,
        FeedbackAction::AutoNegativeInterpretation,
        FeedbackAction::FeedbackInformConfirm,
    ];

    pub fn is_auto_negative(self) -> bool {
        matches!(self, FeedbackAction::AutoNegativePerception | FeedbackAction::AutoNegativeInterpretation)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SomAction {
    None,
    ReturnGreet,
    ReturnBye,
    AcceptThank,
}

impl SomAction {
    pub const ALL: [SomAction; 4] =
        [SomAction::None, SomAction::ReturnGreet, SomAction::ReturnBye, SomAction::AcceptThank];
}

/// One action per dimension after priority resolution; `task` is `None`
/// when the task action was cancelled.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CombinedAction {
    pub task: Option<TaskAction>,
    pub feedback: FeedbackAction,
    pub som: SomAction,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AbstractAction {
    Task(TaskAction),
    Feedback(FeedbackAction),
    Som(SomAction),
    Combined(CombinedAction),
}

impl fmt::Display for TaskAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TaskAction::RequestSlot(s) => write!(f, "request_slot({s})"),
            TaskAction::Recommend => f.write_str("recommend"),
            TaskAction::InformRequested => f.write_str("inform_requested"),
            TaskAction::InformSearch => f.write_str("inform_search"),
        }
    }
}

impl fmt::Display for FeedbackAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeedbackAction::None => "none",
            FeedbackAction::AutoPositive => "auto_positive",
            FeedbackAction::AutoNegativePerception => "auto_negative_perception",
            FeedbackAction::AutoNegativeInterpretation => "auto_negative_interpretation",
            FeedbackAction::FeedbackInformConfirm => "feedback_inform_confirm",
        })
    }
}

impl fmt::Display for SomAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SomAction::None => "none",
            SomAction::ReturnGreet => "return_greet",
            SomAction::ReturnBye => "return_bye",
            SomAction::AcceptThank => "accept_thank",
        })
    }
}

impl fmt::Display for CombinedAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.task {
            Some(t) => write!(f, "task={t}")?,
            None => f.write_str("task=-")?,
        }
        write!(f, "|feedback={}|som={}", self.feedback, self.som)
    }
}

impl fmt::Display for AbstractAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AbstractAction::Task(a) => write!(f, "task:{a}"),
            AbstractAction::Feedback(a) => write!(f, "autofeedback:{a}"),
            AbstractAction::Som(a) => write!(f, "som:{a}"),
            AbstractAction::Combined(a) => write!(f, "all:{a}"),
        }
    }
}

pub fn task_actions(ont: &Ontology) -> Vec<TaskAction> {
    let mut out: Vec<TaskAction> = ont.slot_names().map(|s| TaskAction::RequestSlot(s.to_string())).collect();
    out.extend([TaskAction::Recommend, TaskAction::InformRequested, TaskAction::InformSearch]);
    out
}

/// Per-dimension action set in canonical order. Task is domain-specific;
/// AutoFeedback and SOM are the same for every ontology.
pub fn enumerate_action_set(dim: Dimension, ont: &Ontology) -> Vec<AbstractAction> {
    match dim {
        Dimension::Task => task_actions(ont).into_iter().map(AbstractAction::Task).collect(),
        Dimension::AutoFeedback => FeedbackAction::ALL.into_iter().map(AbstractAction::Feedback).collect(),
        Dimension::Som => SomAction::ALL.into_iter().map(AbstractAction::Som).collect(),
    }
}
