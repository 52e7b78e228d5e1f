//! Question answering over a curated concept network.
//!
//! Entities carry schema-fixed attribute slots holding a stored question and
//! its answer; edges between entities carry relation slots of the same shape.
//! A question is answered by finding the entities it mentions (longest
//! surface-form match) and picking the stored question most similar to it.
//! Questions the network cannot answer become tickets for a human expert,
//! whose resolutions edit the live network.

pub mod audit;
pub mod config;
pub mod eval;
pub mod expert;
pub mod lexicon;
pub mod network;
pub mod retrieval;
pub mod service;
pub mod similarity;
pub mod store;
pub mod wordnet;

pub use audit::{replay, AuditRecord, Mutation};
pub use config::AppConfig;
pub use eval::{load_question_set, run_eval, Category, EvalReport, LabeledQuestion};
pub use expert::{Action, KindTag, PendingTicket, TicketFilter, TicketId, TicketKind, TicketQueue, TicketStatus};
pub use lexicon::{tokenize, EntityMatch, EntityMatcher, Extraction, TokenSequence};
pub use network::{
    AttributeSchema, ConceptNetwork, DocumentError, Edge, Entity, NetworkError, QaTuple, RelationSchema, Schema, Slot,
};
pub use retrieval::{analyze, answer_question, Analysis, AnswerResult, Outcome, Scorer, SlotRef, Verdict};
pub use similarity::{sim_overall, sim_semantic, sim_statistic, SimilarityConfig};
pub use store::{NetworkStore, Snapshot, StoreError};
pub use wordnet::{Synset, SynsetId, WordNetLexicon};
