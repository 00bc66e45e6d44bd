//! Template realisation of system responses, plus a user-side realiser
//! used to script cooperative test users.

use crate::acts::{CommFunction, DialogueAct};
use crate::combiner::CombinedResponse;
use crate::domain::Ontology;
use crate::lexicon::{self, describe_venue, join_and, property_clause, request_noun};

/// Opening line of a dialogue.
pub fn greeting(ont: &Ontology) -> String {
    format!("Hello, welcome to the {} information service. How can I help you?", ont.venue_noun())
}

fn request_question(slot: &str, ont: &Ontology) -> String {
    match slot {
        "area" => "What part of town would you like?".to_string(),
        "pricerange" => "What price range are you looking for?".to_string(),
        "cuisine" => "What kind of food would you like?".to_string(),
        "near" => "Is there a landmark you would like to be near?".to_string(),
        "type" => "Would you prefer a hotel, a guesthouse or a B&B?".to_string(),
        "rating" => "How many stars should it have?".to_string(),
        other => format!("What {other} would you like for the {}?", ont.venue_noun()),
    }
}

/// "Bangkok City is a Thai restaurant; it is in the city centre".
fn recommendation_with_echo(name: &str, echo: &DialogueAct, ont: &Ontology) -> String {
    let c = &echo.content.constraints;
    let head: std::collections::BTreeMap<String, String> = c
        .iter()
        .filter(|(s, _)| matches!(s.as_str(), "cuisine" | "type"))
        .map(|(s, v)| (s.clone(), v.clone()))
        .collect();
    let clauses: Vec<String> = c
        .iter()
        .filter(|(s, _)| !matches!(s.as_str(), "cuisine" | "type"))
        .map(|(s, v)| property_clause(s, v))
        .collect();
    let mut out = format!("{name} is {}", describe_venue(&head, ont.venue_noun()));
    if !clauses.is_empty() {
        out.push_str("; it is ");
        out.push_str(&join_and(&clauses));
    }
    out
}

fn inform_sentence(act: &DialogueAct) -> String {
    let parts: Vec<String> = act
        .content
        .constraints
        .iter()
        .enumerate()
        .map(|(i, (slot, value))| match (i, &act.content.entity) {
            (0, Some(name)) => format!("the {} of {name} is {value}", request_noun(slot)),
            _ => format!("its {} is {value}", request_noun(slot)),
        })
        .collect();
    format!("{}.", lexicon::capitalize(&join_and(&parts)))
}

fn sentence(act: &DialogueAct, ont: &Ontology) -> String {
    let c = &act.content;
    match act.function {
        CommFunction::ReturnGreet => "Hello!".to_string(),
        CommFunction::ReturnBye => "Goodbye.".to_string(),
        CommFunction::AcceptThank => "You're welcome.".to_string(),
        CommFunction::AutoPositive => "Okay.".to_string(),
        CommFunction::AutoNegativePerception => "Sorry, I didn't catch that. Could you please repeat?".to_string(),
        CommFunction::AutoNegativeInterpretation => {
            "Sorry, I didn't understand that. Could you please rephrase?".to_string()
        }
        CommFunction::FeedbackInform => {
            format!("You are looking for {}.", describe_venue(&c.constraints, ont.venue_noun()))
        }
        CommFunction::InformSearch => "Let me see, ...".to_string(),
        CommFunction::Recommend => format!("How about {}?", c.entity.as_deref().unwrap_or("this one")),
        CommFunction::Request => {
            let slots: Vec<&String> = c.requested.iter().collect();
            match slots.as_slice() {
                [one] => request_question(one, ont),
                _ => format!(
                    "Could you tell me the {}?",
                    join_and(&slots.iter().map(|s| s.to_string()).collect::<Vec<_>>())
                ),
            }
        }
        CommFunction::Inform if c.entity.is_some() => inform_sentence(act),
        CommFunction::Inform => format!("There is {}.", describe_venue(&c.constraints, ont.venue_noun())),
        CommFunction::Confirm => "Yes.".to_string(),
        CommFunction::Disconfirm => "No.".to_string(),
        CommFunction::Greet => "Hello.".to_string(),
        CommFunction::Bye => "Bye.".to_string(),
        CommFunction::Thank => "Thank you.".to_string(),
    }
}

fn lower_first(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_lowercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Realises acts in order. Positive feedback prefixes the next sentence
/// ("Okay, let me see, ..."), and a recommendation absorbs the echoed
/// constraints of the same turn.
pub fn realize_acts(acts: &[DialogueAct], ont: &Ontology) -> String {
    let recommend = acts.iter().position(|a| a.function == CommFunction::Recommend && a.content.entity.is_some());
    let echo = acts.iter().position(|a| a.function == CommFunction::FeedbackInform);
    let mut sentences: Vec<String> = Vec::new();
    let mut okay = false;
    for (i, act) in acts.iter().enumerate() {
        let text = match (recommend, echo) {
            (Some(_), Some(e)) if i == e => continue,
            (Some(r), Some(_)) if i == r => {
                let e = echo.expect("matched above");
                recommendation_with_echo(act.content.entity.as_deref().unwrap_or_default(), &acts[e], ont)
            }
            _ if act.function == CommFunction::AutoPositive => {
                okay = true;
                continue;
            }
            _ => sentence(act, ont),
        };
        sentences.push(if std::mem::take(&mut okay) { format!("Okay, {}", lower_first(&text)) } else { text });
    }
    if okay {
        sentences.push("Okay.".to_string());
    }
    let mut out = String::new();
    for s in sentences {
        if !out.is_empty() {
            if !out.ends_with(['.', '?', '!']) {
                out.push('.');
            }
            out.push(' ');
        }
        out.push_str(&s);
    }
    out
}

pub fn generate_utterance(response: &CombinedResponse, ont: &Ontology) -> String {
    realize_acts(&response.acts, ont)
}

/// Act tags in the style "AutoFeedback: autoPositive", one per act.
pub fn annotations(acts: &[DialogueAct]) -> Vec<String> {
    acts.iter()
        .map(|a| {
            let dim = match a.dimension() {
                crate::acts::Dimension::Task => "Task",
                crate::acts::Dimension::AutoFeedback => "AutoFeedback",
                crate::acts::Dimension::Som => "Social",
            };
            let name = a.function.name();
            let name = match name.split_once('_') {
                Some((head, tail)) => format!("{head}{}", tail.split('_').map(lexicon::capitalize).collect::<String>()),
                None => name.to_string(),
            };
            format!("{dim}: {name}")
        })
        .collect()
}

/// How a cooperative user would type the given acts, e.g. "Hi, I need a
/// Thai restaurant in the city centre". Every phrase parses back to the
/// same acts.
pub fn user_utterance(acts: &[DialogueAct], ont: &Ontology) -> String {
    let noun = match ont.domain.as_str() {
        "hotels" => "place to stay",
        _ => ont.venue_noun(),
    };
    let mut parts: Vec<String> = Vec::new();
    for act in acts {
        let c = &act.content;
        let part = match act.function {
            CommFunction::Greet => "Hi".to_string(),
            CommFunction::Inform | CommFunction::Confirm => {
                let mut constraints = c.constraints.clone();
                if let Some(t) = constraints.get_mut("type").filter(|t| t.as_str() == "hotel") {
                    *t = "proper hotel".to_string();
                }
                format!("I need {}", describe_venue(&constraints, noun))
            }
            CommFunction::Disconfirm => {
                let values: Vec<String> = c.constraints.iter().map(|(s, v)| lexicon::display_value(s, v)).collect();
                format!("not {}", join_and(&values))
            }
            CommFunction::Request => {
                let nouns: Vec<String> = c.requested.iter().map(|s| request_noun(s).to_string()).collect();
                format!("what is the {}", join_and(&nouns))
            }
            CommFunction::Thank => "thank you".to_string(),
            CommFunction::Bye => "goodbye".to_string(),
            _ => continue,
        };
        parts.push(part);
    }
    let text = parts.join(", ");
    lexicon::capitalize(&text)
}
