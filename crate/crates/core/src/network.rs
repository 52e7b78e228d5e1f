//! The concept network: entities carrying schema-fixed attribute slots and
//! unordered edges carrying schema-fixed relation slots.
//!
//! Every slot holds either a stored `(question, answer)` tuple or NULL
//! (`None`), meaning the answer does not exist yet. The attribute and
//! relation schemas are chosen when the network is created and never change
//! afterwards; every entity and edge carries exactly one entry per slot.
//!
//! A network is a plain value. Mutations bump `version` by one; callers that
//! share a network across threads go through [`crate::store::NetworkStore`],
//! which hands out immutable snapshots.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Version of the on-disk network document layout.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetworkError {
    #[error("identifier must not be empty")]
    EmptyId,
    #[error("duplicate slot id `{0}`")]
    DuplicateSlotId(String),
    #[error("slot id `{0}` must be a lowercase token ([a-z0-9_]+)")]
    InvalidSlotId(String),
    #[error("entity `{entity}` does not match the attribute schema (missing: {missing:?}, extra: {extra:?})")]
    SchemaMismatch {
        entity: String,
        missing: Vec<String>,
        extra: Vec<String>,
    },
    #[error("surface form `{form}` already belongs to entity `{existing}`")]
    SurfaceFormCollision { form: String, existing: String },
    #[error("entity `{entity}` is invalid: {reason}")]
    InvalidEntity { entity: String, reason: String },
    #[error("topic `{0}` is not declared by the network")]
    UnknownTopic(String),
    #[error("unknown entity `{0}`")]
    UnknownEntity(String),
    #[error("unknown attribute slot `{0}`")]
    UnknownAttributeSlot(String),
    #[error("unknown relation slot `{0}`")]
    UnknownRelationSlot(String),
    #[error("an edge cannot connect entity `{0}` to itself")]
    SelfLoop(String),
    #[error("question and answer must both be non-empty")]
    EmptyQaField,
}

/// Errors from reading a network document.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DocumentError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invariant violation at {path}: {reason}")]
    InvariantViolation { path: String, reason: String },
}

impl DocumentError {
    fn at(path: impl Into<String>, err: impl fmt::Display) -> Self {
        DocumentError::InvariantViolation {
            path: path.into(),
            reason: err.to_string(),
        }
    }
}

/// A stored question together with its answer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QaTuple {
    pub question: String,
    pub answer: String,
}

impl QaTuple {
    pub fn new(question: impl Into<String>, answer: impl Into<String>) -> Result<Self, NetworkError> {
        let qa = QaTuple {
            question: question.into(),
            answer: answer.into(),
        };
        qa.check()?;
        Ok(qa)
    }

    fn check(&self) -> Result<(), NetworkError> {
        if self.question.trim().is_empty() || self.answer.trim().is_empty() {
            return Err(NetworkError::EmptyQaField);
        }
        Ok(())
    }
}

/// Slot contents keyed by slot id; `None` is a NULL slot.
pub type SlotMap = BTreeMap<String, Option<QaTuple>>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Slot {
    pub id: String,
    pub prompt_hint: String,
}

impl Slot {
    pub fn new(id: impl Into<String>, prompt_hint: impl Into<String>) -> Self {
        Slot {
            id: id.into(),
            prompt_hint: prompt_hint.into(),
        }
    }
}

/// Ordered, duplicate-free list of slots. Order matters: it is the
/// tie-break order during retrieval.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct Schema {
    slots: Vec<Slot>,
}

pub type AttributeSchema = Schema;
pub type RelationSchema = Schema;

impl Schema {
    pub fn new(slots: Vec<Slot>) -> Result<Self, NetworkError> {
        let mut seen = BTreeSet::new();
        for slot in &slots {
            let valid = !slot.id.is_empty()
                && slot
                    .id
                    .chars()
                    .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_');
            if !valid {
                return Err(NetworkError::InvalidSlotId(slot.id.clone()));
            }
            if !seen.insert(slot.id.as_str()) {
                return Err(NetworkError::DuplicateSlotId(slot.id.clone()));
            }
        }
        Ok(Schema { slots })
    }

    /// definition, example, properties, types, cause_effect
    pub fn default_attributes() -> Self {
        Schema {
            slots: vec![
                Slot::new("definition", "What is <entity>?"),
                Slot::new("example", "Give an example of <entity>."),
                Slot::new("properties", "What are the properties of <entity>?"),
                Slot::new("types", "What are the types of <entity>?"),
                Slot::new("cause_effect", "What causes <entity> / what does it cause?"),
            ],
        }
    }

    /// difference, similarity, dependency
    pub fn default_relations() -> Self {
        Schema {
            slots: vec![
                Slot::new("difference", "What is the difference between <a> and <b>?"),
                Slot::new("similarity", "How are <a> and <b> similar?"),
                Slot::new("dependency", "How does <a> depend on <b>?"),
            ],
        }
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.slots.iter().map(|s| s.id.as_str())
    }

    pub fn contains(&self, id: &str) -> bool {
        self.slots.iter().any(|s| s.id == id)
    }

    /// Position of a slot in schema order.
    pub fn position(&self, id: &str) -> Option<usize> {
        self.slots.iter().position(|s| s.id == id)
    }

    /// A slot map with every slot NULL.
    pub fn empty_slots(&self) -> SlotMap {
        self.ids().map(|id| (id.to_string(), None)).collect()
    }

    fn mismatch(&self, slots: &SlotMap) -> Option<(Vec<String>, Vec<String>)> {
        let missing: Vec<String> = self
            .ids()
            .filter(|id| !slots.contains_key(*id))
            .map(str::to_string)
            .collect();
        let extra: Vec<String> = slots.keys().filter(|k| !self.contains(k)).cloned().collect();
        if missing.is_empty() && extra.is_empty() {
            None
        } else {
            Some((missing, extra))
        }
    }
}

impl<'de> Deserialize<'de> for Schema {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let slots = Vec::<Slot>::deserialize(deserializer)?;
        Schema::new(slots).map_err(serde::de::Error::custom)
    }
}

/// Lowercase and collapse runs of whitespace to a single space.
pub fn normalize_form(form: &str) -> String {
    form.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Entity {
    pub id: String,
    pub name: String,
    pub aliases: Vec<String>,
    pub topic: String,
    pub attributes: SlotMap,
}

impl Entity {
    /// An entity whose attribute slots are all NULL.
    pub fn new(
        id: impl Into<String>,
        name: impl Into<String>,
        topic: impl Into<String>,
        schema: &AttributeSchema,
    ) -> Self {
        Entity {
            id: id.into(),
            name: name.into(),
            aliases: Vec::new(),
            topic: topic.into(),
            attributes: schema.empty_slots(),
        }
    }

    pub fn with_alias(mut self, alias: impl Into<String>) -> Self {
        self.aliases.push(alias.into());
        self
    }

    pub fn with_attribute(mut self, slot: &str, qa: QaTuple) -> Self {
        self.attributes.insert(slot.to_string(), Some(qa));
        self
    }

    /// Normalized name followed by normalized aliases.
    pub fn surface_forms(&self) -> Vec<String> {
        std::iter::once(&self.name)
            .chain(&self.aliases)
            .map(|f| normalize_form(f))
            .collect()
    }

    /// Filled attribute slots in schema order.
    pub fn filled_attributes<'a>(
        &'a self,
        schema: &'a AttributeSchema,
    ) -> impl Iterator<Item = (&'a str, &'a QaTuple)> + 'a {
        schema
            .ids()
            .filter_map(move |id| self.attributes.get(id)?.as_ref().map(|qa| (id, qa)))
    }
}

/// Order two entity ids canonically (smaller first).
pub fn canonical_pair(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Edge {
    pub a: String,
    pub b: String,
    pub relations: SlotMap,
}

impl Edge {
    pub fn pair(&self) -> (&str, &str) {
        (&self.a, &self.b)
    }

    pub fn filled_relations<'a>(
        &'a self,
        schema: &'a RelationSchema,
    ) -> impl Iterator<Item = (&'a str, &'a QaTuple)> + 'a {
        schema
            .ids()
            .filter_map(move |id| self.relations.get(id)?.as_ref().map(|qa| (id, qa)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConceptNetwork {
    id: String,
    name: String,
    topics: Vec<String>,
    attribute_schema: AttributeSchema,
    relation_schema: RelationSchema,
    entities: BTreeMap<String, Entity>,
    edges: BTreeMap<(String, String), Edge>,
    version: u64,
    // normalized surface form -> entity id
    forms: BTreeMap<String, String>,
}

impl ConceptNetwork {
    pub fn new(
        id: impl Into<String>,
        name: impl Into<String>,
        topics: Vec<String>,
        attribute_schema: AttributeSchema,
        relation_schema: RelationSchema,
    ) -> Result<Self, NetworkError> {
        let id = id.into();
        if id.trim().is_empty() {
            return Err(NetworkError::EmptyId);
        }
        Ok(ConceptNetwork {
            id,
            name: name.into(),
            topics,
            attribute_schema,
            relation_schema,
            entities: BTreeMap::new(),
            edges: BTreeMap::new(),
            version: 1,
            forms: BTreeMap::new(),
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn topics(&self) -> &[String] {
        &self.topics
    }

    pub fn attribute_schema(&self) -> &AttributeSchema {
        &self.attribute_schema
    }

    pub fn relation_schema(&self) -> &RelationSchema {
        &self.relation_schema
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn entity(&self, id: &str) -> Option<&Entity> {
        self.entities.get(id)
    }

    /// Entities ordered by id.
    pub fn entities(&self) -> impl Iterator<Item = &Entity> {
        self.entities.values()
    }

    pub fn entity_count(&self) -> usize {
        self.entities.len()
    }

    /// Look up the edge between two entities in either order.
    pub fn edge(&self, a: &str, b: &str) -> Option<&Edge> {
        self.edges.get(&canonical_pair(a, b))
    }

    /// Edges ordered by canonical pair.
    pub fn edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.values()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Insert or replace an entity by id.
    pub fn upsert_entity(&mut self, entity: Entity) -> Result<(), NetworkError> {
        self.check_entity(&entity)?;
        self.insert_entity_unchecked(entity);
        self.version += 1;
        Ok(())
    }

    /// Set one attribute slot of an existing entity.
    pub fn set_attribute(&mut self, entity_id: &str, slot: &str, qa: Option<QaTuple>) -> Result<(), NetworkError> {
        if !self.attribute_schema.contains(slot) {
            return Err(NetworkError::UnknownAttributeSlot(slot.to_string()));
        }
        if let Some(qa) = &qa {
            qa.check()?;
        }
        let entity = self
            .entities
            .get_mut(entity_id)
            .ok_or_else(|| NetworkError::UnknownEntity(entity_id.to_string()))?;
        entity.attributes.insert(slot.to_string(), qa);
        self.version += 1;
        Ok(())
    }

    /// Fill (or clear, with `None`) one relation slot between two entities,
    /// creating the edge if needed.
    pub fn upsert_edge_relation(
        &mut self,
        entity_a: &str,
        entity_b: &str,
        relation_id: &str,
        qa: Option<QaTuple>,
    ) -> Result<(), NetworkError> {
        for id in [entity_a, entity_b] {
            if !self.entities.contains_key(id) {
                return Err(NetworkError::UnknownEntity(id.to_string()));
            }
        }
        if entity_a == entity_b {
            return Err(NetworkError::SelfLoop(entity_a.to_string()));
        }
        if !self.relation_schema.contains(relation_id) {
            return Err(NetworkError::UnknownRelationSlot(relation_id.to_string()));
        }
        if let Some(qa) = &qa {
            qa.check()?;
        }
        let key = canonical_pair(entity_a, entity_b);
        let schema = &self.relation_schema;
        let edge = self.edges.entry(key.clone()).or_insert_with(|| Edge {
            a: key.0,
            b: key.1,
            relations: schema.empty_slots(),
        });
        edge.relations.insert(relation_id.to_string(), qa);
        self.version += 1;
        Ok(())
    }

    /// `(normalized surface form, entity id)` for every name and alias,
    /// sorted by form.
    pub fn entity_dictionary(&self) -> Vec<(String, String)> {
        self.forms.iter().map(|(form, id)| (form.clone(), id.clone())).collect()
    }

    fn check_entity(&self, entity: &Entity) -> Result<(), NetworkError> {
        if entity.id.trim().is_empty() {
            return Err(NetworkError::EmptyId);
        }
        let invalid = |reason: &str| NetworkError::InvalidEntity {
            entity: entity.id.clone(),
            reason: reason.to_string(),
        };
        if entity.name.trim().is_empty() {
            return Err(invalid("name must not be empty"));
        }
        if !self.topics.contains(&entity.topic) {
            return Err(NetworkError::UnknownTopic(entity.topic.clone()));
        }
        if let Some((missing, extra)) = self.attribute_schema.mismatch(&entity.attributes) {
            return Err(NetworkError::SchemaMismatch {
                entity: entity.id.clone(),
                missing,
                extra,
            });
        }
        for qa in entity.attributes.values().flatten() {
            qa.check()?;
        }
        let mut own = BTreeSet::new();
        for form in entity.surface_forms() {
            if form.is_empty() {
                return Err(invalid("aliases must not be empty"));
            }
            if !own.insert(form.clone()) {
                return Err(invalid(&format!("surface form `{form}` listed twice")));
            }
            if let Some(existing) = self.forms.get(&form) {
                if *existing != entity.id {
                    return Err(NetworkError::SurfaceFormCollision {
                        form,
                        existing: existing.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    fn insert_entity_unchecked(&mut self, entity: Entity) {
        if let Some(old) = self.entities.get(&entity.id) {
            for form in old.surface_forms() {
                self.forms.remove(&form);
            }
        }
        for form in entity.surface_forms() {
            self.forms.insert(form, entity.id.clone());
        }
        self.entities.insert(entity.id.clone(), entity);
    }

    /// Canonical document text: sorted keys, entities by id, edges by pair,
    /// two-space indentation, trailing newline.
    pub fn serialize(&self) -> String {
        let doc = NetworkDocument {
            format_version: FORMAT_VERSION,
            id: self.id.clone(),
            name: self.name.clone(),
            topics: self.topics.clone(),
            attribute_schema: self.attribute_schema.slots.clone(),
            relation_schema: self.relation_schema.slots.clone(),
            entities: self.entities.values().cloned().collect(),
            edges: self.edges.values().cloned().collect(),
            version: self.version,
        };
        // serde_json::Value keeps object keys in a BTreeMap, which sorts them.
        let value = serde_json::to_value(&doc).expect("network document is always serializable");
        let mut text = serde_json::to_string_pretty(&value).expect("json value is always serializable");
        text.push('\n');
        text
    }

    pub fn deserialize(document: &str) -> Result<Self, DocumentError> {
        let header: VersionHeader = serde_json::from_str(document).map_err(|e| DocumentError::Parse(e.to_string()))?;
        if header.format_version != FORMAT_VERSION {
            return Err(DocumentError::Parse(format!(
                "unsupported format_version {}",
                header.format_version
            )));
        }
        let doc: NetworkDocument = serde_json::from_str(document).map_err(|e| DocumentError::Parse(e.to_string()))?;
        doc.into_network()
    }
}

#[derive(Deserialize)]
struct VersionHeader {
    format_version: u32,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkDocument {
    format_version: u32,
    id: String,
    name: String,
    topics: Vec<String>,
    attribute_schema: Vec<Slot>,
    relation_schema: Vec<Slot>,
    entities: Vec<Entity>,
    edges: Vec<Edge>,
    version: u64,
}

impl NetworkDocument {
    fn into_network(self) -> Result<ConceptNetwork, DocumentError> {
        let attribute_schema =
            Schema::new(self.attribute_schema).map_err(|e| DocumentError::at("attribute_schema", e))?;
        let relation_schema = Schema::new(self.relation_schema).map_err(|e| DocumentError::at("relation_schema", e))?;
        let mut network = ConceptNetwork::new(self.id, self.name, self.topics, attribute_schema, relation_schema)
            .map_err(|e| DocumentError::at("id", e))?;
        if self.version < 1 {
            return Err(DocumentError::at("version", "version must be at least 1"));
        }
        for (i, entity) in self.entities.into_iter().enumerate() {
            let path = format!("entities[{i}]");
            if network.entities.contains_key(&entity.id) {
                return Err(DocumentError::at(path, format!("duplicate entity id `{}`", entity.id)));
            }
            network.check_entity(&entity).map_err(|e| DocumentError::at(&path, e))?;
            network.insert_entity_unchecked(entity);
        }
        for (i, edge) in self.edges.into_iter().enumerate() {
            let path = format!("edges[{i}]");
            for id in [&edge.a, &edge.b] {
                if !network.entities.contains_key(id) {
                    return Err(DocumentError::at(&path, NetworkError::UnknownEntity(id.clone())));
                }
            }
            if edge.a == edge.b {
                return Err(DocumentError::at(&path, NetworkError::SelfLoop(edge.a.clone())));
            }
            if let Some((missing, extra)) = network.relation_schema.mismatch(&edge.relations) {
                return Err(DocumentError::at(
                    format!("{path}.relations"),
                    format!("relation slots do not match schema (missing: {missing:?}, extra: {extra:?})"),
                ));
            }
            for (slot, qa) in &edge.relations {
                if let Some(qa) = qa {
                    qa.check()
                        .map_err(|e| DocumentError::at(format!("{path}.relations.{slot}"), e))?;
                }
            }
            let key = canonical_pair(&edge.a, &edge.b);
            if network.edges.contains_key(&key) {
                return Err(DocumentError::at(
                    path,
                    format!("duplicate edge between `{}` and `{}`", key.0, key.1),
                ));
            }
            let edge = Edge {
                a: key.0.clone(),
                b: key.1.clone(),
                relations: edge.relations,
            };
            network.edges.insert(key, edge);
        }
        network.version = self.version;
        Ok(network)
    }
}
