//! Domain ontologies, venue databases and task scenarios.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexicon;

/// Slots a user may ask about once a venue has been offered.
pub const REQUESTABLE: [&str; 2] = ["phone", "address"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotSpec {
    pub name: String,
    #[serde(default)]
    pub values: Vec<String>,
    pub informable: bool,
    pub requestable: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ontology {
    pub domain: String,
    /// Informable slots in catalogue order.
    pub constraint_slots: Vec<SlotSpec>,
    /// Requestable slots (phone, address).
    pub info_slots: Vec<SlotSpec>,
}

impl Ontology {
    pub fn slot(&self, name: &str) -> Option<&SlotSpec> {
        self.constraint_slots.iter().find(|s| s.name == name)
    }

    pub fn slot_index(&self, name: &str) -> Option<usize> {
        self.constraint_slots.iter().position(|s| s.name == name)
    }

    pub fn slot_names(&self) -> impl Iterator<Item = &str> {
        self.constraint_slots.iter().map(|s| s.name.as_str())
    }

    pub fn is_requestable(&self, name: &str) -> bool {
        self.info_slots.iter().any(|s| s.name == name)
    }

    /// Singular noun for a venue of this domain ("restaurant", "hotel").
    pub fn venue_noun(&self) -> &'static str {
        match self.domain.as_str() {
            "hotels" => "hotel",
            "restaurants" => "restaurant",
            _ => "venue",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entity {
    pub id: String,
    pub name: String,
    pub slot_values: BTreeMap<String, String>,
    pub info_values: BTreeMap<String, String>,
}

impl Entity {
    /// True iff every constraint is met by this entity.
    pub fn matches(&self, constraints: &BTreeMap<String, String>) -> bool {
        constraints.iter().all(|(s, v)| self.slot_values.get(s) == Some(v))
    }
}

/// Immutable venue database with a per-value membership index.
#[derive(Debug, Clone)]
pub struct Database {
    pub ontology: Ontology,
    pub entities: Vec<Entity>,
    /// `index[slot][value]` is a bitmask over entity positions.
    index: Vec<Vec<EntitySet>>,
}

impl PartialEq for Database {
    fn eq(&self, other: &Self) -> bool {
        self.ontology == other.ontology && self.entities == other.entities
    }
}

/// Bitmask over database entities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntitySet(Vec<u64>);

impl EntitySet {
    fn full(n: usize) -> Self {
        let mut words = vec![u64::MAX; n.div_ceil(64)];
        if !n.is_multiple_of(64) {
            *words.last_mut().unwrap() = (1u64 << (n % 64)) - 1;
        }
        EntitySet(words)
    }

    fn empty(n: usize) -> Self {
        EntitySet(vec![0; n.div_ceil(64)])
    }

    fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    pub fn intersect(&mut self, other: &EntitySet) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a &= b;
        }
    }

    pub fn len(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(wi, &w)| (0..64).filter(move |b| w & (1 << b) != 0).map(move |b| wi * 64 + b))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub constraints: BTreeMap<String, String>,
    pub requests: BTreeSet<String>,
}

/// On-disk domain document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DomainFile {
    pub domain: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub declared_venues: Option<usize>,
    pub slots: Vec<SlotSpec>,
    pub entities: Vec<Entity>,
}

const RESTAURANTS_JSON: &str = include_str!("../data/restaurants.json");
const HOTELS_JSON: &str = include_str!("../data/hotels.json");

impl Database {
    /// Validates the document and builds the database.
    pub fn from_file(doc: DomainFile) -> Result<Self> {
        let mut names = HashSet::new();
        for s in &doc.slots {
            if !names.insert(s.name.as_str()) {
                return Err(Error::Schema(format!("duplicate slot `{}`", s.name)));
            }
            if s.informable && s.values.is_empty() {
                return Err(Error::Schema(format!("informable slot `{}` has no values", s.name)));
            }
        }
        let constraint_slots: Vec<SlotSpec> = doc.slots.iter().filter(|s| s.informable).cloned().collect();
        let info_slots: Vec<SlotSpec> = doc.slots.iter().filter(|s| s.requestable && !s.informable).cloned().collect();
        if let Some(declared) = doc.declared_venues {
            if declared != doc.entities.len() {
                return Err(Error::Cardinality { domain: doc.domain.clone(), declared, actual: doc.entities.len() });
            }
        }
        let mut ids = HashSet::new();
        for e in &doc.entities {
            if !ids.insert(e.id.as_str()) {
                return Err(Error::Schema(format!("duplicate entity id `{}`", e.id)));
            }
            for slot in &constraint_slots {
                match e.slot_values.get(&slot.name) {
                    None => return Err(Error::Schema(format!("entity `{}` is missing `{}`", e.id, slot.name))),
                    Some(v) if !slot.values.contains(v) => {
                        return Err(Error::Schema(format!(
                            "entity `{}` has value `{v}` outside slot `{}`",
                            e.id, slot.name
                        )))
                    }
                    _ => {}
                }
            }
            for slot in &info_slots {
                if !e.info_values.contains_key(&slot.name) {
                    return Err(Error::Schema(format!("entity `{}` is missing `{}`", e.id, slot.name)));
                }
            }
        }
        let ontology = Ontology { domain: doc.domain, constraint_slots, info_slots };
        Ok(Self::build(ontology, doc.entities))
    }

    fn build(ontology: Ontology, entities: Vec<Entity>) -> Self {
        let n = entities.len();
        let index = ontology
            .constraint_slots
            .iter()
            .map(|slot| {
                slot.values
                    .iter()
                    .map(|v| {
                        let mut set = EntitySet::empty(n);
                        for (i, e) in entities.iter().enumerate() {
                            if e.slot_values.get(&slot.name) == Some(v) {
                                set.insert(i);
                            }
                        }
                        set
                    })
                    .collect()
            })
            .collect();
        Database { ontology, entities, index }
    }

    pub fn to_file(&self) -> DomainFile {
        let mut slots = self.ontology.constraint_slots.clone();
        slots.extend(self.ontology.info_slots.iter().cloned());
        DomainFile {
            domain: self.ontology.domain.clone(),
            declared_venues: Some(self.entities.len()),
            slots,
            entities: self.entities.clone(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: DomainFile = serde_json::from_str(text).map_err(|e| Error::parse("domain file", e))?;
        Self::from_file(doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("domain serializes")
    }

    /// Shipped 149-venue restaurant database (target domain).
    pub fn restaurants() -> Self {
        Self::from_json(RESTAURANTS_JSON).expect("bundled restaurants file is valid")
    }

    /// Shipped 39-venue hotel database (source domain).
    pub fn hotels() -> Self {
        Self::from_json(HOTELS_JSON).expect("bundled hotels file is valid")
    }

    /// Resolves `restaurants` / `hotels` to the bundled databases, anything else as a path.
    pub fn open(name_or_path: &str) -> Result<Self> {
        match name_or_path {
            "restaurants" => Ok(Self::restaurants()),
            "hotels" => Ok(Self::hotels()),
            path => load_domain(path),
        }
    }

    pub fn entity_by_name(&self, name: &str) -> Option<&Entity> {
        self.entities.iter().find(|e| e.name == name)
    }

    /// Entity positions matching `constraints`, using the value index.
    pub fn matching_set(&self, constraints: &BTreeMap<String, String>) -> Result<EntitySet> {
        let mut set = EntitySet::full(self.entities.len());
        for (slot, value) in constraints {
            let si = self.ontology.slot_index(slot).ok_or_else(|| Error::UnknownSlot(slot.clone()))?;
            match self.ontology.constraint_slots[si].values.iter().position(|v| v == value) {
                Some(vi) => set.intersect(&self.index[si][vi]),
                None => return Ok(EntitySet::empty(self.entities.len())),
            }
        }
        Ok(set)
    }

    /// Same as [`Database::matching_set`] over `(slot index, value index)` pairs.
    pub fn matching_indexed(&self, constraints: impl IntoIterator<Item = (usize, usize)>) -> EntitySet {
        let mut set = EntitySet::full(self.entities.len());
        for (si, vi) in constraints {
            set.intersect(&self.index[si][vi]);
        }
        set
    }
}

pub fn load_domain(path: impl AsRef<Path>) -> Result<Database> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Database::from_json(&text)
}

/// Entities whose slot values match every constraint.
pub fn query_entities<'a>(db: &'a Database, constraints: &BTreeMap<String, String>) -> Result<Vec<&'a Entity>> {
    Ok(db.matching_set(constraints)?.iter().map(|i| &db.entities[i]).collect())
}

/// Smallest and largest number of constraint slots a sampled task uses.
pub const MIN_TASK_CONSTRAINTS: usize = 3;
pub const MAX_TASK_CONSTRAINTS: usize = 4;

/// Draws a solvable task: a random subset of constraint slots with random
/// values, resampled until some entity matches, plus one or both requests.
pub fn sample_task<R: Rng + ?Sized>(db: &Database, rng: &mut R) -> TaskSpec {
    assert!(!db.entities.is_empty(), "cannot sample a task from an empty database");
    let slots = &db.ontology.constraint_slots;
    let max = slots.len().min(MAX_TASK_CONSTRAINTS);
    let constraints = loop {
        let k = rng.random_range(MIN_TASK_CONSTRAINTS.min(max)..=max);
        let mut chosen: Vec<&SlotSpec> = slots.iter().collect();
        chosen.shuffle(rng);
        let constraints: BTreeMap<String, String> =
            chosen[..k].iter().map(|s| (s.name.clone(), s.values.choose(rng).expect("non-empty").clone())).collect();
        if !db.matching_set(&constraints).expect("slots from ontology").is_empty() {
            break constraints;
        }
    };
    let requestable: Vec<&str> = db.ontology.info_slots.iter().map(|s| s.name.as_str()).collect();
    let requests = match rng.random_range(0..3) {
        0 => requestable.iter().map(|s| s.to_string()).collect(),
        i => std::iter::once(requestable[(i - 1) % requestable.len()].to_string()).collect(),
    };
    TaskSpec { constraints, requests }
}

/// Natural-language scenario for a human tester.
pub fn render_task_text(task: &TaskSpec, ontology: &Ontology) -> String {
    let mut text = format!("You are looking for {}", lexicon::describe_venue(&task.constraints, ontology.venue_noun()));
    text.push_str(". Once you have found one, ask for its ");
    let asks: Vec<String> = task.requests.iter().map(|r| lexicon::request_noun(r).to_string()).collect();
    text.push_str(&lexicon::join_and(&asks));
    text.push('.');
    text
}
