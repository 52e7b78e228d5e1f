//! Expert ticket queue.
//!
//! Questions the network cannot answer are filed as tickets. An expert
//! resolves a ticket by adding an entity, filling an attribute, adding a
//! relation, or dismissing it; the first three mutate the network.

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audit::Mutation;
use crate::lexicon::tokenize;
use crate::network::{Entity, QaTuple};
use crate::retrieval::SlotRef;

pub type TicketId = u64;

pub const TICKETS_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TicketKind {
    /// No entity of the network appears in the question.
    NoEntity,
    /// Several entities appear but no edge between them holds an answer.
    NoRelation { pair: (String, String) },
    /// The best candidate scored under the confidence threshold, or the
    /// entity has no filled attributes at all (`best_slot` is `None`).
    LowConfidence {
        best_slot: Option<SlotRef>,
        best_score: f64,
    },
}

impl TicketKind {
    pub fn tag(&self) -> KindTag {
        match self {
            TicketKind::NoEntity => KindTag::NoEntity,
            TicketKind::NoRelation { .. } => KindTag::NoRelation,
            TicketKind::LowConfidence { .. } => KindTag::LowConfidence,
        }
    }

    // Scores are left out so the same question keeps one ticket even if
    // unrelated edits shift its best score.
    fn dedup_key(&self) -> (KindTag, Option<&(String, String)>) {
        match self {
            TicketKind::NoRelation { pair } => (KindTag::NoRelation, Some(pair)),
            other => (other.tag(), None),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KindTag {
    NoEntity,
    NoRelation,
    LowConfidence,
}

impl FromStr for KindTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "no_entity" => Ok(KindTag::NoEntity),
            "no_relation" => Ok(KindTag::NoRelation),
            "low_confidence" => Ok(KindTag::LowConfidence),
            other => Err(format!("unknown ticket kind `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TicketStatus {
    Open,
    Resolved,
    Dismissed,
}

impl FromStr for TicketStatus {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "open" => Ok(TicketStatus::Open),
            "resolved" => Ok(TicketStatus::Resolved),
            "dismissed" => Ok(TicketStatus::Dismissed),
            other => Err(format!("unknown ticket status `{other}`")),
        }
    }
}

impl fmt::Display for TicketStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TicketStatus::Open => "open",
            TicketStatus::Resolved => "resolved",
            TicketStatus::Dismissed => "dismissed",
        })
    }
}

/// What the expert decided to do with a ticket.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Action {
    AddEntity {
        entity: Entity,
    },
    FillAttribute {
        entity_id: String,
        slot: String,
        qa: QaTuple,
    },
    AddRelation {
        pair: (String, String),
        slot: String,
        qa: QaTuple,
    },
    Dismiss {
        #[serde(default)]
        note: Option<String>,
    },
}

impl Action {
    /// The network mutation this action performs; `None` for a dismissal.
    pub fn mutation(&self) -> Option<Mutation> {
        match self {
            Action::AddEntity { entity } => Some(Mutation::UpsertEntity { entity: entity.clone() }),
            Action::FillAttribute { entity_id, slot, qa } => Some(Mutation::SetAttribute {
                entity_id: entity_id.clone(),
                slot: slot.clone(),
                qa: Some(qa.clone()),
            }),
            Action::AddRelation { pair, slot, qa } => Some(Mutation::UpsertEdgeRelation {
                a: pair.0.clone(),
                b: pair.1.clone(),
                slot: slot.clone(),
                qa: Some(qa.clone()),
            }),
            Action::Dismiss { .. } => None,
        }
    }

    fn note(&self) -> Option<String> {
        match self {
            Action::Dismiss { note } => note.clone(),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    pub action: Action,
    pub resulting_network_version: u64,
    pub note: Option<String>,
    pub resolved_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PendingTicket {
    pub id: TicketId,
    pub question: String,
    pub kind: TicketKind,
    pub status: TicketStatus,
    pub created_at: DateTime<Utc>,
    pub resolution: Option<Resolution>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TicketError {
    #[error("unknown ticket {0}")]
    UnknownTicket(TicketId),
    #[error("ticket {id} is {status}, not open")]
    TicketNotOpen { id: TicketId, status: TicketStatus },
    #[error("ticket document: {0}")]
    Document(String),
}

/// Filter for [`TicketQueue::list`]. Defaults to open tickets of any kind.
#[derive(Debug, Clone, Copy, Default)]
pub struct TicketFilter {
    /// `None` matches every status.
    pub status: Option<TicketStatus>,
    pub kind: Option<KindTag>,
}

impl TicketFilter {
    pub fn open() -> Self {
        TicketFilter {
            status: Some(TicketStatus::Open),
            kind: None,
        }
    }

    pub fn kind(mut self, kind: KindTag) -> Self {
        self.kind = Some(kind);
        self
    }

    fn accepts(&self, ticket: &PendingTicket) -> bool {
        self.status.is_none_or(|s| s == ticket.status) && self.kind.is_none_or(|k| k == ticket.kind.tag())
    }
}

/// Tickets in creation order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TicketQueue {
    tickets: Vec<PendingTicket>,
}

#[derive(Serialize, Deserialize)]
struct TicketDocument {
    format_version: u32,
    tickets: Vec<PendingTicket>,
}

fn normalize_question(question: &str) -> String {
    tokenize(question).into_words().join(" ")
}

impl TicketQueue {
    /// File an open ticket, or return the id of the open ticket already
    /// filed for the same normalized question and kind.
    pub fn enqueue(&mut self, question: &str, kind: TicketKind) -> TicketId {
        self.enqueue_at(question, kind, Utc::now())
    }

    pub fn enqueue_at(&mut self, question: &str, kind: TicketKind, now: DateTime<Utc>) -> TicketId {
        let normalized = normalize_question(question);
        if let Some(existing) = self.tickets.iter().find(|t| {
            t.status == TicketStatus::Open
                && t.kind.dedup_key() == kind.dedup_key()
                && normalize_question(&t.question) == normalized
        }) {
            return existing.id;
        }
        let id = self.tickets.iter().map(|t| t.id).max().unwrap_or(0) + 1;
        self.tickets.push(PendingTicket {
            id,
            question: question.to_string(),
            kind,
            status: TicketStatus::Open,
            created_at: now,
            resolution: None,
        });
        id
    }

    pub fn len(&self) -> usize {
        self.tickets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tickets.is_empty()
    }

    pub fn open_count(&self) -> usize {
        self.tickets.iter().filter(|t| t.status == TicketStatus::Open).count()
    }

    pub fn get(&self, id: TicketId) -> Option<&PendingTicket> {
        self.tickets.iter().find(|t| t.id == id)
    }

    /// Matching tickets, oldest first.
    pub fn list(&self, filter: TicketFilter) -> Vec<&PendingTicket> {
        self.tickets.iter().filter(|t| filter.accepts(t)).collect()
    }

    pub fn list_pending(&self, kind: Option<KindTag>) -> Vec<&PendingTicket> {
        self.list(TicketFilter {
            status: Some(TicketStatus::Open),
            kind,
        })
    }

    /// Fail unless the ticket exists and is open.
    pub fn check_open(&self, id: TicketId) -> Result<&PendingTicket, TicketError> {
        let ticket = self.get(id).ok_or(TicketError::UnknownTicket(id))?;
        if ticket.status != TicketStatus::Open {
            return Err(TicketError::TicketNotOpen {
                id,
                status: ticket.status,
            });
        }
        Ok(ticket)
    }

    /// Close an open ticket with `action`, recording the network version it
    /// produced.
    pub fn close(
        &mut self,
        id: TicketId,
        action: Action,
        resulting_network_version: u64,
    ) -> Result<&PendingTicket, TicketError> {
        self.check_open(id)?;
        let ticket = self.tickets.iter_mut().find(|t| t.id == id).expect("checked above");
        ticket.status = match action {
            Action::Dismiss { .. } => TicketStatus::Dismissed,
            _ => TicketStatus::Resolved,
        };
        ticket.resolution = Some(Resolution {
            note: action.note(),
            action,
            resulting_network_version,
            resolved_at: Utc::now(),
        });
        Ok(ticket)
    }

    pub fn to_document(&self) -> String {
        let doc = TicketDocument {
            format_version: TICKETS_FORMAT_VERSION,
            tickets: self.tickets.clone(),
        };
        let mut text = serde_json::to_string_pretty(&doc).expect("tickets serialize");
        text.push('\n');
        text
    }

    pub fn from_document(text: &str) -> Result<Self, TicketError> {
        let doc: TicketDocument = serde_json::from_str(text).map_err(|e| TicketError::Document(e.to_string()))?;
        if doc.format_version != TICKETS_FORMAT_VERSION {
            return Err(TicketError::Document(format!(
                "unsupported format_version {}",
                doc.format_version
            )));
        }
        for t in &doc.tickets {
            let closed = t.status != TicketStatus::Open;
            if closed != t.resolution.is_some() {
                return Err(TicketError::Document(format!(
                    "ticket {} has status {} but resolution {}",
                    t.id,
                    t.status,
                    if t.resolution.is_some() { "present" } else { "missing" }
                )));
            }
        }
        Ok(TicketQueue { tickets: doc.tickets })
    }
}
