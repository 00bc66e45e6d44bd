//! Surface forms shared by the scenario text, NLG and NLU.

use std::collections::BTreeMap;

/// Display form of a slot value ("thai" -> "Thai", "b&b" -> "B&B").
pub fn display_value(slot: &str, value: &str) -> String {
    match slot {
        "cuisine" => capitalize(value),
        "type" if value == "b&b" => "B&B".to_string(),
        _ => value.to_string(),
    }
}

pub fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Indefinite article for the word that follows.
pub fn article(word: &str) -> &'static str {
    match word.chars().next().map(|c| c.to_ascii_lowercase()) {
        Some('a' | 'e' | 'i' | 'o' | 'u') => "an",
        _ => "a",
    }
}

/// Phrase describing a venue property, e.g. "in the city centre".
pub fn constraint_phrase(slot: &str, value: &str) -> String {
    match slot {
        "area" if value == "centre" => "in the city centre".to_string(),
        "area" => format!("in the {value} of town"),
        "pricerange" => format!("in the {value} price range"),
        "near" => format!("near {value}"),
        "cuisine" => format!("serving {} food", display_value(slot, value)),
        "type" => format!("that is {} {}", article(value), display_value(slot, value)),
        "rating" if value == "1" => "with a rating of 1 star".to_string(),
        "rating" => format!("with a rating of {value} stars"),
        _ => format!("with {slot} {value}"),
    }
}

/// Clause used after "it is", e.g. "near the river" or "rated 4 stars".
pub fn property_clause(slot: &str, value: &str) -> String {
    match slot {
        "rating" if value == "1" => "rated 1 star".to_string(),
        "rating" => format!("rated {value} stars"),
        _ => constraint_phrase(slot, value),
    }
}

/// Noun phrase for a venue with the given properties, e.g. "a Thai
/// restaurant in the city centre". Cuisine and type become part of the head.
pub fn describe_venue(constraints: &BTreeMap<String, String>, noun: &str) -> String {
    let head = if let Some(c) = constraints.get("cuisine") {
        let c = display_value("cuisine", c);
        format!("{} {c} {noun}", article(&c))
    } else if let Some(t) = constraints.get("type") {
        format!("{} {}", article(t), display_value("type", t))
    } else {
        format!("{} {noun}", article(noun))
    };
    let rest: Vec<String> = constraints
        .iter()
        .filter(|(s, _)| s.as_str() != "cuisine" && s.as_str() != "type")
        .map(|(s, v)| constraint_phrase(s, v))
        .collect();
    if rest.is_empty() {
        head
    } else {
        format!("{head} {}", join_and(&rest))
    }
}

pub fn request_noun(slot: &str) -> &str {
    match slot {
        "phone" => "phone number",
        other => other,
    }
}

/// "a", "a and b", "a, b and c".
pub fn join_and(items: &[String]) -> String {
    match items {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} and {last}", init.join(", ")),
    }
}

/// User-side synonyms for slot values, longest first within a slot.
pub fn value_synonyms(slot: &str, value: &str) -> Vec<String> {
    let mut out = vec![value.to_string()];
    match (slot, value) {
        ("area", "centre") => out.extend(["center", "central", "city centre", "city center"].map(String::from)),
        ("area", "north") => out.push("northern".into()),
        ("area", "south") => out.push("southern".into()),
        ("area", "east") => out.push("eastern".into()),
        ("area", "west") => out.push("western".into()),
        ("pricerange", "cheap") => out.extend(["inexpensive", "budget"].map(String::from)),
        ("pricerange", "moderate") => {
            out.extend(["moderately priced", "mid-range", "reasonably priced"].map(String::from))
        }
        ("pricerange", "expensive") => out.extend(["upmarket", "posh", "pricey"].map(String::from)),
        ("type", "guesthouse") => out.push("guest house".into()),
        ("type", "b&b") => out.extend(["bed and breakfast", "b and b"].map(String::from)),
        ("rating", v) => {
            out.clear();
            out.extend([format!("{v} star"), format!("{v}-star"), format!("rating of {v}"), format!("rated {v}")]);
        }
        ("near", v) => {
            if let Some(bare) = v.strip_prefix("the ") {
                out.push(bare.to_string());
            }
        }
        _ => {}
    }
    out.sort_by_key(|s| std::cmp::Reverse(s.len()));
    out
}
