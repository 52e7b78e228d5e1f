//! Append-only mutation log. Each record carries enough to replay the
//! mutation against the network it was applied to.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{ConceptNetwork, Entity, NetworkError, QaTuple};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Mutation {
    UpsertEntity {
        entity: Entity,
    },
    SetAttribute {
        entity_id: String,
        slot: String,
        qa: Option<QaTuple>,
    },
    UpsertEdgeRelation {
        a: String,
        b: String,
        slot: String,
        qa: Option<QaTuple>,
    },
}

impl Mutation {
    pub fn apply(&self, network: &mut ConceptNetwork) -> Result<(), NetworkError> {
        match self {
            Mutation::UpsertEntity { entity } => network.upsert_entity(entity.clone()),
            Mutation::SetAttribute { entity_id, slot, qa } => network.set_attribute(entity_id, slot, qa.clone()),
            Mutation::UpsertEdgeRelation { a, b, slot, qa } => network.upsert_edge_relation(a, b, slot, qa.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub actor: String,
    pub timestamp: DateTime<Utc>,
    pub before_version: u64,
    pub after_version: u64,
    pub mutation: Mutation,
}

#[derive(Debug, Error, PartialEq)]
pub enum ReplayError {
    #[error("record {index} expects version {expected}, network is at {actual}")]
    VersionGap { index: usize, expected: u64, actual: u64 },
    #[error("record {index} failed to apply: {source}")]
    Apply {
        index: usize,
        #[source]
        source: NetworkError,
    },
}

/// Re-apply `records` on top of `base`. Records older than the base
/// version are skipped.
pub fn replay(base: &ConceptNetwork, records: &[AuditRecord]) -> Result<ConceptNetwork, ReplayError> {
    let mut network = base.clone();
    for (index, record) in records.iter().enumerate() {
        if record.before_version < base.version() {
            continue;
        }
        if record.before_version != network.version() {
            return Err(ReplayError::VersionGap {
                index,
                expected: record.before_version,
                actual: network.version(),
            });
        }
        record
            .mutation
            .apply(&mut network)
            .map_err(|source| ReplayError::Apply { index, source })?;
    }
    Ok(network)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Schema;

    fn record(before: u64, mutation: Mutation) -> AuditRecord {
        AuditRecord {
            actor: "test".into(),
            timestamp: Utc::now(),
            before_version: before,
            after_version: before + 1,
            mutation,
        }
    }

    #[test]
    fn replay_rebuilds_state_and_detects_gaps() {
        let base = ConceptNetwork::new(
            "n",
            "n",
            vec!["t".into()],
            Schema::default_attributes(),
            Schema::default_relations(),
        )
        .unwrap();
        let a = Entity::new("a", "a", "t", base.attribute_schema());
        let b = Entity::new("b", "b", "t", base.attribute_schema());
        let records = vec![
            record(1, Mutation::UpsertEntity { entity: a }),
            record(2, Mutation::UpsertEntity { entity: b }),
            record(
                3,
                Mutation::UpsertEdgeRelation {
                    a: "b".into(),
                    b: "a".into(),
                    slot: "similarity".into(),
                    qa: Some(QaTuple::new("how are a and b similar", "both letters").unwrap()),
                },
            ),
        ];
        let net = replay(&base, &records).unwrap();
        assert_eq!(net.version(), 4);
        assert!(net.edge("a", "b").is_some());

        let gap = replay(&base, &records[1..]).unwrap_err();
        assert!(matches!(gap, ReplayError::VersionGap { index: 0, .. }));
    }
}
