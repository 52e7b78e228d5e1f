//! Per-category accuracy over a labeled question set.
//!
//! A question counts as correct when the network answers it from the
//! expected slot. Evaluation never files tickets or touches the network.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexicon::EntityMatcher;
use crate::network::{canonical_pair, ConceptNetwork};
use crate::retrieval::{analyze, Analysis, Scorer, SlotRef, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Definition,
    Similarity,
    Difference,
    Relationship,
    Other,
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Category::Definition => "definition",
            Category::Similarity => "similarity",
            Category::Difference => "difference",
            Category::Relationship => "relationship",
            Category::Other => "other",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabeledQuestion {
    pub question: String,
    pub category: Category,
    pub expected_entities: Vec<String>,
    pub expected_slot: SlotRef,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("line {line}: unknown reference {reference}")]
    UnknownReference { line: usize, reference: String },
}

/// Parse line-delimited JSON records and check every reference against
/// `network`. Blank lines are skipped.
pub fn load_question_set(document: &str, network: &ConceptNetwork) -> Result<Vec<LabeledQuestion>, EvalError> {
    let mut questions = Vec::new();
    for (n, line) in document.lines().enumerate() {
        let line_no = n + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut record: LabeledQuestion = serde_json::from_str(line).map_err(|e| EvalError::Parse {
            line: line_no,
            reason: e.to_string(),
        })?;
        let unknown = |reference: String| EvalError::UnknownReference {
            line: line_no,
            reference,
        };
        for id in &record.expected_entities {
            if network.entity(id).is_none() {
                return Err(unknown(format!("entity `{id}`")));
            }
        }
        match &mut record.expected_slot {
            SlotRef::Attribute { entity, slot } => {
                if network.entity(entity).is_none() {
                    return Err(unknown(format!("entity `{entity}`")));
                }
                if !network.attribute_schema().contains(slot) {
                    return Err(unknown(format!("attribute slot `{slot}`")));
                }
            }
            SlotRef::Relation { pair, slot } => {
                for id in [&pair.0, &pair.1] {
                    if network.entity(id).is_none() {
                        return Err(unknown(format!("entity `{id}`")));
                    }
                }
                if !network.relation_schema().contains(slot) {
                    return Err(unknown(format!("relation slot `{slot}`")));
                }
                *pair = canonical_pair(&pair.0, &pair.1);
            }
        }
        questions.push(record);
    }
    Ok(questions)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CategoryStats {
    pub asked: usize,
    pub correct: usize,
    pub accuracy: f64,
}

impl CategoryStats {
    fn new(asked: usize, correct: usize) -> Self {
        CategoryStats {
            asked,
            correct,
            accuracy: if asked == 0 { 0.0 } else { correct as f64 / asked as f64 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalFailure {
    pub question: String,
    pub category: Category,
    pub expected_slot: SlotRef,
    pub produced: Analysis,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub network_id: String,
    pub network_version: u64,
    /// Only categories with at least one question.
    pub categories: BTreeMap<Category, CategoryStats>,
    /// `None` for an empty question set.
    pub overall: Option<CategoryStats>,
    pub failures: Vec<EvalFailure>,
}

/// Whether an analysis answers from `expected`.
pub fn is_correct(analysis: &Analysis, expected: &SlotRef) -> bool {
    matches!(&analysis.verdict, Verdict::Answer { slot, .. } if slot == expected)
}

pub fn run_eval(network: &ConceptNetwork, scorer: Scorer<'_>, questions: &[LabeledQuestion]) -> EvalReport {
    let matcher = EntityMatcher::for_network(network);
    let mut tally: BTreeMap<Category, (usize, usize)> = BTreeMap::new();
    let mut failures = Vec::new();
    for q in questions {
        let analysis = analyze(network, &matcher, scorer, &q.question).expect("matcher built from this network");
        let entry = tally.entry(q.category).or_default();
        entry.0 += 1;
        if is_correct(&analysis, &q.expected_slot) {
            entry.1 += 1;
        } else {
            failures.push(EvalFailure {
                question: q.question.clone(),
                category: q.category,
                expected_slot: q.expected_slot.clone(),
                produced: analysis,
            });
        }
    }
    let (asked, correct) = tally.values().fold((0, 0), |(a, c), (qa, qc)| (a + qa, c + qc));
    EvalReport {
        network_id: network.id().to_string(),
        network_version: network.version(),
        categories: tally
            .into_iter()
            .map(|(cat, (a, c))| (cat, CategoryStats::new(a, c)))
            .collect(),
        overall: (asked > 0).then(|| CategoryStats::new(asked, correct)),
        failures,
    }
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Aligned text table, one row per category plus an overall row.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<14} {:>6} {:>8} {:>9}",
            "category", "asked", "correct", "accuracy"
        );
        let rows = self
            .categories
            .iter()
            .map(|(c, s)| (c.as_str(), s))
            .chain(self.overall.as_ref().map(|s| ("overall", s)));
        for (name, s) in rows {
            let _ = writeln!(
                out,
                "{:<14} {:>6} {:>8} {:>8.1}%",
                name,
                s.asked,
                s.correct,
                s.accuracy * 100.0
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{Entity, QaTuple, Schema};
    use crate::similarity::SimilarityConfig;
    use crate::wordnet::WordNetLexicon;

    fn network() -> ConceptNetwork {
        let mut net = ConceptNetwork::new(
            "t",
            "t",
            vec!["Force".into()],
            Schema::default_attributes(),
            Schema::default_relations(),
        )
        .unwrap();
        let schema = net.attribute_schema().clone();
        net.upsert_entity(
            Entity::new("force", "force", "Force", &schema)
                .with_attribute("definition", QaTuple::new("What is force?", "A push or pull.").unwrap()),
        )
        .unwrap();
        net.upsert_entity(Entity::new("pressure", "pressure", "Force", &schema))
            .unwrap();
        net
    }

    #[test]
    fn loads_records_and_rejects_bad_ones() {
        let net = network();
        let doc = r#"{"question":"What is force?","category":"definition","expected_entities":["force"],"expected_slot":{"kind":"attribute","entity":"force","slot":"definition"}}

{"question":"force vs pressure","category":"difference","expected_entities":["pressure","force"],"expected_slot":{"kind":"relation","pair":["pressure","force"],"slot":"difference"}}"#;
        let qs = load_question_set(doc, &net).unwrap();
        assert_eq!(qs.len(), 2);
        assert_eq!(
            qs[1].expected_slot,
            SlotRef::relation("force", "pressure", "difference")
        );

        let essay = r#"{"question":"q","category":"essay","expected_entities":[],"expected_slot":{"kind":"attribute","entity":"force","slot":"definition"}}"#;
        assert!(matches!(
            load_question_set(essay, &net),
            Err(EvalError::Parse { line: 1, .. })
        ));

        let ghost = format!(
            "\n{}",
            doc.lines().next().unwrap().replace("[\"force\"]", "[\"friction\"]")
        );
        assert!(matches!(
            load_question_set(&ghost, &net),
            Err(EvalError::UnknownReference { line: 2, .. })
        ));
    }

    #[test]
    fn empty_set_gives_empty_report() {
        let net = network();
        let lex = WordNetLexicon::empty();
        let config = SimilarityConfig::default();
        let report = run_eval(
            &net,
            Scorer {
                lexicon: &lex,
                config: &config,
            },
            &[],
        );
        assert!(report.categories.is_empty());
        assert!(report.overall.is_none());
        assert_eq!(report.to_table().lines().count(), 1);
    }

    #[test]
    fn counts_and_table() {
        let net = network();
        let lex = WordNetLexicon::empty();
        let config = SimilarityConfig::default();
        let qs = vec![
            LabeledQuestion {
                question: "What is force?".into(),
                category: Category::Definition,
                expected_entities: vec!["force".into()],
                expected_slot: SlotRef::attribute("force", "definition"),
            },
            LabeledQuestion {
                question: "What is pressure?".into(),
                category: Category::Definition,
                expected_entities: vec!["pressure".into()],
                expected_slot: SlotRef::attribute("pressure", "definition"),
            },
        ];
        let report = run_eval(
            &net,
            Scorer {
                lexicon: &lex,
                config: &config,
            },
            &qs,
        );
        let def = report.categories[&Category::Definition];
        assert_eq!((def.asked, def.correct), (2, 1));
        assert_eq!(def.accuracy, 0.5);
        assert_eq!(report.failures.len(), 1);
        let table = report.to_table();
        assert!(table.contains("definition          2        1     50.0%"), "{table}");
    }
}
