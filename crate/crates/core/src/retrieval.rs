//! Answer retrieval.
//!
//! A question with one recognized entity is matched against that entity's
//! stored attribute questions; a question naming several entities is matched
//! against the relation questions on the edges between them. Anything the
//! network cannot answer confidently becomes an expert ticket.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expert::{TicketId, TicketKind, TicketQueue};
use crate::lexicon::{tokenize, EntityMatcher};
use crate::network::{canonical_pair, AttributeSchema, ConceptNetwork, Entity};
use crate::similarity::{score_words, SimilarityConfig};
use crate::wordnet::WordNetLexicon;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RetrievalError {
    #[error("matcher was built for network version {matcher:?}, network is at {network}")]
    StaleMatcher { matcher: Option<u64>, network: u64 },
}

/// Nothing to score: every candidate slot is NULL or no edge exists.
#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("no candidate slot")]
pub struct NoCandidate;

/// A slot in the network: an entity attribute or an edge relation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SlotRef {
    Attribute { entity: String, slot: String },
    Relation { pair: (String, String), slot: String },
}

impl SlotRef {
    pub fn attribute(entity: &str, slot: &str) -> Self {
        SlotRef::Attribute {
            entity: entity.to_string(),
            slot: slot.to_string(),
        }
    }

    /// Relation slot; the pair is stored canonically.
    pub fn relation(a: &str, b: &str, slot: &str) -> Self {
        SlotRef::Relation {
            pair: canonical_pair(a, b),
            slot: slot.to_string(),
        }
    }
}

/// What the network says about a question, before any ticket exists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Answer {
        answer: String,
        slot: SlotRef,
        confidence: f64,
    },
    Escalate {
        kind: TicketKind,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub matched_entities: Vec<String>,
    #[serde(flatten)]
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Answered {
        answer: String,
        matched_slot: SlotRef,
        confidence: f64,
    },
    Pending {
        ticket_id: TicketId,
        kind: TicketKind,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerResult {
    pub matched_entities: Vec<String>,
    pub network_version: u64,
    #[serde(flatten)]
    pub outcome: Outcome,
}

impl AnswerResult {
    pub fn is_answered(&self) -> bool {
        matches!(self.outcome, Outcome::Answered { .. })
    }

    /// Turn an analysis into a result, asking `ticket` for an id when the
    /// question has to be escalated.
    pub fn from_analysis<E>(
        analysis: Analysis,
        network_version: u64,
        question: &str,
        ticket: impl FnOnce(&str, &TicketKind) -> Result<TicketId, E>,
    ) -> Result<Self, E> {
        let outcome = match analysis.verdict {
            Verdict::Answer {
                answer,
                slot,
                confidence,
            } => Outcome::Answered {
                answer,
                matched_slot: slot,
                confidence,
            },
            Verdict::Escalate { kind } => Outcome::Pending {
                ticket_id: ticket(question, &kind)?,
                kind,
            },
        };
        Ok(AnswerResult {
            matched_entities: analysis.matched_entities,
            network_version,
            outcome,
        })
    }
}

/// Everything a query needs besides the network itself.
#[derive(Clone, Copy)]
pub struct Scorer<'a> {
    pub lexicon: &'a WordNetLexicon,
    pub config: &'a SimilarityConfig,
}

impl Scorer<'_> {
    fn overall(&self, question: &[String], stored: &str) -> f64 {
        let stored = tokenize(stored).into_words();
        score_words(self.config, self.lexicon, question, &stored).overall
    }
}

/// Best-scoring non-NULL attribute of `entity`. Ties keep the earlier slot in
/// schema order.
pub fn attribute_recognition(
    entity: &Entity,
    schema: &AttributeSchema,
    scorer: Scorer<'_>,
    question: &str,
) -> Result<(String, f64), NoCandidate> {
    let words = tokenize(question).into_words();
    best_attribute(entity, schema, scorer, &words)
}

fn best_attribute(
    entity: &Entity,
    schema: &AttributeSchema,
    scorer: Scorer<'_>,
    words: &[String],
) -> Result<(String, f64), NoCandidate> {
    let mut best: Option<(&str, f64)> = None;
    for (slot, qa) in entity.filled_attributes(schema) {
        let score = scorer.overall(words, &qa.question);
        if best.is_none_or(|(_, b)| score > b) {
            best = Some((slot, score));
        }
    }
    best.map(|(slot, score)| (slot.to_string(), score)).ok_or(NoCandidate)
}

/// Best-scoring non-NULL relation over every edge among `entity_ids`.
/// Ties keep the earlier canonical pair, then the earlier schema slot.
pub fn relationship_extraction(
    network: &ConceptNetwork,
    entity_ids: &[String],
    scorer: Scorer<'_>,
    question: &str,
) -> Result<((String, String), String, f64), NoCandidate> {
    let words = tokenize(question).into_words();
    best_relation(network, entity_ids, scorer, &words)
}

fn best_relation(
    network: &ConceptNetwork,
    entity_ids: &[String],
    scorer: Scorer<'_>,
    words: &[String],
) -> Result<((String, String), String, f64), NoCandidate> {
    let mut pairs = Vec::new();
    for (i, a) in entity_ids.iter().enumerate() {
        for b in &entity_ids[i + 1..] {
            if a != b {
                pairs.push(canonical_pair(a, b));
            }
        }
    }
    pairs.sort();
    pairs.dedup();

    let mut best: Option<((String, String), &str, f64)> = None;
    for pair in pairs {
        let Some(edge) = network.edge(&pair.0, &pair.1) else {
            continue;
        };
        for (slot, qa) in edge.filled_relations(network.relation_schema()) {
            let score = scorer.overall(words, &qa.question);
            if best.as_ref().is_none_or(|(_, _, b)| score > *b) {
                best = Some((pair.clone(), slot, score));
            }
        }
    }
    best.map(|(pair, slot, score)| (pair, slot.to_string(), score))
        .ok_or(NoCandidate)
}

/// Route a question through entity extraction and slot scoring without
/// creating any ticket.
pub fn analyze(
    network: &ConceptNetwork,
    matcher: &EntityMatcher,
    scorer: Scorer<'_>,
    question: &str,
) -> Result<Analysis, RetrievalError> {
    if matcher.network_version() != Some(network.version()) {
        return Err(RetrievalError::StaleMatcher {
            matcher: matcher.network_version(),
            network: network.version(),
        });
    }
    let tokens = tokenize(question);
    let matched_entities = matcher.extract(&tokens).entity_ids();
    let words = tokens.into_words();
    let tau = scorer.config.tau();

    let verdict = match matched_entities.as_slice() {
        [] => Verdict::Escalate {
            kind: TicketKind::NoEntity,
        },
        [only] => {
            let entity = network.entity(only).expect("matcher and network share a version");
            match best_attribute(entity, network.attribute_schema(), scorer, &words) {
                Ok((slot, score)) => {
                    let slot_ref = SlotRef::attribute(only, &slot);
                    if score < tau {
                        Verdict::Escalate {
                            kind: TicketKind::LowConfidence {
                                best_slot: Some(slot_ref),
                                best_score: score,
                            },
                        }
                    } else {
                        let answer = entity.attributes[&slot]
                            .as_ref()
                            .expect("scored slot is filled")
                            .answer
                            .clone();
                        Verdict::Answer {
                            answer,
                            slot: slot_ref,
                            confidence: score,
                        }
                    }
                }
                Err(NoCandidate) => Verdict::Escalate {
                    kind: TicketKind::LowConfidence {
                        best_slot: None,
                        best_score: 0.0,
                    },
                },
            }
        }
        [first, second, ..] => match best_relation(network, &matched_entities, scorer, &words) {
            Ok((pair, slot, score)) => {
                let slot_ref = SlotRef::relation(&pair.0, &pair.1, &slot);
                if score < tau {
                    Verdict::Escalate {
                        kind: TicketKind::LowConfidence {
                            best_slot: Some(slot_ref),
                            best_score: score,
                        },
                    }
                } else {
                    let answer = network.edge(&pair.0, &pair.1).expect("scored edge exists").relations[&slot]
                        .as_ref()
                        .expect("scored slot is filled")
                        .answer
                        .clone();
                    Verdict::Answer {
                        answer,
                        slot: slot_ref,
                        confidence: score,
                    }
                }
            }
            Err(NoCandidate) => Verdict::Escalate {
                kind: TicketKind::NoRelation {
                    pair: canonical_pair(first, second),
                },
            },
        },
    };
    Ok(Analysis {
        matched_entities,
        verdict,
    })
}

/// Answer a question, filing an expert ticket in `queue` when the network
/// cannot answer it.
pub fn answer_question(
    network: &ConceptNetwork,
    matcher: &EntityMatcher,
    scorer: Scorer<'_>,
    question: &str,
    queue: &mut TicketQueue,
) -> Result<AnswerResult, RetrievalError> {
    let analysis = analyze(network, matcher, scorer, question)?;
    AnswerResult::from_analysis(analysis, network.version(), question, |q, kind| {
        Ok(queue.enqueue(q, kind.clone()))
    })
}
