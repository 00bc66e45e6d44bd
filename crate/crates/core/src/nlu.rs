//! Rule-based understanding of typed user input.
//!
//! Slot values are spotted through the lexicon's synonym lists, longest
//! match first; social cues and info requests are keyword lists. A value
//! preceded by a negation ("not Thai") becomes a disconfirmation.

use std::collections::{BTreeMap, BTreeSet};

use crate::acts::{CommFunction, DialogueAct, SemContent};
use crate::domain::Ontology;
use crate::lexicon::value_synonyms;

const GREETINGS: [&str; 6] = ["hi", "hello", "hey", "good morning", "good afternoon", "good evening"];
const FAREWELLS: [&str; 5] = ["bye", "goodbye", "good bye", "see you", "that's all"];
const THANKS: [&str; 4] = ["thank you", "thanks", "thank", "cheers"];
const NEGATIONS: [&str; 4] = ["not", "no", "don't want", "rather than"];

fn request_cues(slot: &str) -> &'static [&'static str] {
    match slot {
        "phone" => &["phone", "telephone", "number", "call them"],
        "address" => &["address", "where is it", "located", "how do i get there"],
        _ => &[],
    }
}

/// Lower-case, strip punctuation except the characters values use, and pad
/// with spaces so every phrase can be searched as ` phrase `.
fn normalize(text: &str) -> String {
    let cleaned: String = text
        .to_lowercase()
        .chars()
        .map(|c| if c.is_alphanumeric() || matches!(c, '&' | '-' | '\'') { c } else { ' ' })
        .collect();
    format!(" {} ", cleaned.split_whitespace().collect::<Vec<_>>().join(" "))
}

fn contains_phrase(text: &str, phrase: &str) -> bool {
    text.contains(&format!(" {phrase} "))
}

/// Synonyms the parser accepts for a value. In the hotels domain the bare
/// word "hotel" names the venue kind, so the hotel type needs a qualifier.
fn parser_synonyms(slot: &str, value: &str) -> Vec<String> {
    if slot == "type" && value == "hotel" {
        return ["proper hotel", "regular hotel"].map(String::from).to_vec();
    }
    value_synonyms(slot, value)
}

struct Mention {
    start: usize,
    end: usize,
    slot: String,
    value: String,
    negated: bool,
}

fn find_mentions(text: &str, ont: &Ontology) -> Vec<Mention> {
    let mut candidates = Vec::new();
    for spec in &ont.constraint_slots {
        for value in &spec.values {
            for syn in parser_synonyms(&spec.name, value) {
                let needle = format!(" {} ", normalize(&syn).trim());
                let mut from = 0;
                while let Some(pos) = text[from..].find(&needle) {
                    let start = from + pos + 1;
                    let end = start + needle.len() - 2;
                    candidates.push((start, end, spec.name.clone(), value.clone()));
                    from = start;
                }
            }
        }
    }
    // Longest first, then leftmost; drop anything overlapping a kept match.
    candidates.sort_by_key(|(s, e, _, _)| (std::cmp::Reverse(e - s), *s));
    let mut kept: Vec<Mention> = Vec::new();
    for (start, end, slot, value) in candidates {
        if kept.iter().any(|m| start < m.end && m.start < end) {
            continue;
        }
        let before = &text[..start];
        let negated =
            NEGATIONS.iter().any(|n| before.ends_with(&format!(" {n} ")) || before.ends_with(&format!(" {n} a ")));
        kept.push(Mention { start, end, slot, value, negated });
    }
    kept.sort_by_key(|m| m.start);
    kept
}

/// Dialogue acts expressed by a typed user turn, social acts first, then
/// informs, disconfirmations and requests, then thanks and farewell. Input
/// with no recognisable content yields an empty list.
pub fn parse_utterance(text: &str, ont: &Ontology) -> Vec<DialogueAct> {
    let text = normalize(text);
    let mut acts = Vec::new();
    if GREETINGS.iter().any(|g| contains_phrase(&text, g)) {
        acts.push(DialogueAct::bare(CommFunction::Greet));
    }

    let mut informed = BTreeMap::new();
    let mut denied = BTreeMap::new();
    for m in find_mentions(&text, ont) {
        let target = if m.negated { &mut denied } else { &mut informed };
        target.insert(m.slot, m.value);
    }
    if !informed.is_empty() {
        acts.push(DialogueAct::inform(informed));
    }
    if !denied.is_empty() {
        acts.push(DialogueAct {
            function: CommFunction::Disconfirm,
            content: SemContent { constraints: denied, ..Default::default() },
        });
    }

    let requested: BTreeSet<String> = ont
        .info_slots
        .iter()
        .filter(|s| request_cues(&s.name).iter().any(|c| contains_phrase(&text, c)))
        .map(|s| s.name.clone())
        .collect();
    if !requested.is_empty() {
        acts.push(DialogueAct::request(requested));
    }

    if THANKS.iter().any(|t| contains_phrase(&text, t)) {
        acts.push(DialogueAct::bare(CommFunction::Thank));
    }
    if FAREWELLS.iter().any(|f| contains_phrase(&text, f)) {
        acts.push(DialogueAct::bare(CommFunction::Bye));
    }
    acts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Database;

    fn restaurants() -> Ontology {
        Database::restaurants().ontology
    }

    #[test]
    fn greeting_with_constraints() {
        let acts = parse_utterance("Hi, I need a Thai restaurant in the city centre", &restaurants());
        assert_eq!(
            acts,
            vec![
                DialogueAct::bare(CommFunction::Greet),
                DialogueAct::inform([("area", "centre"), ("cuisine", "thai")])
            ]
        );
    }

    #[test]
    fn requests_and_gibberish() {
        let ont = restaurants();
        assert_eq!(parse_utterance("what's the phone number", &ont), vec![DialogueAct::request(["phone"])]);
        assert!(parse_utterance("xyzzy plugh", &ont).is_empty());
    }

    #[test]
    fn longest_match_and_landmarks() {
        let acts = parse_utterance("somewhere central near the botanic gardens, moderately priced", &restaurants());
        assert_eq!(
            acts,
            vec![DialogueAct::inform([
                ("area", "centre"),
                ("near", "the botanic gardens"),
                ("pricerange", "moderate")
            ])]
        );
    }

    #[test]
    fn negation_becomes_disconfirm() {
        let acts = parse_utterance("no, not Chinese, I want Indian food", &restaurants());
        assert_eq!(acts[0], DialogueAct::inform([("cuisine", "indian")]));
        assert_eq!(acts[1].function, CommFunction::Disconfirm);
        assert_eq!(acts[1].content.constraints["cuisine"], "chinese");
    }

    #[test]
    fn thanks_and_goodbye() {
        let acts = parse_utterance("Thank you, goodbye!", &restaurants());
        assert_eq!(acts, vec![DialogueAct::bare(CommFunction::Thank), DialogueAct::bare(CommFunction::Bye)]);
    }

    #[test]
    fn hotel_types_and_ratings() {
        let ont = Database::hotels().ontology;
        let acts = parse_utterance("I'd like a 4 star guest house, or a bed and breakfast", &ont);
        assert_eq!(acts.len(), 1);
        assert_eq!(acts[0].content.constraints["rating"], "4");
        assert!(parse_utterance("I need a hotel", &ont).is_empty());
        let acts = parse_utterance("a proper hotel please", &ont);
        assert_eq!(acts, vec![DialogueAct::inform([("type", "hotel")])]);
    }
}
