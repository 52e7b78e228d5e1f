mod common;

use concept_qa::eval::is_correct;
use concept_qa::{
    analyze, load_question_set, run_eval, Category, EntityMatcher, LabeledQuestion, Scorer, SimilarityConfig, SlotRef,
};

fn verbatim_set() -> Vec<LabeledQuestion> {
    let network = common::network();
    let mut out = Vec::new();
    for entity in network.entities() {
        for (slot, qa) in entity.filled_attributes(network.attribute_schema()) {
            out.push(LabeledQuestion {
                question: qa.question.clone(),
                category: Category::Definition,
                expected_entities: vec![entity.id.clone()],
                expected_slot: SlotRef::attribute(&entity.id, slot),
            });
        }
    }
    for edge in network.edges() {
        for (slot, qa) in edge.filled_relations(network.relation_schema()) {
            let category = match slot {
                "difference" => Category::Difference,
                "similarity" => Category::Similarity,
                _ => Category::Relationship,
            };
            out.push(LabeledQuestion {
                question: qa.question.clone(),
                category,
                expected_entities: vec![edge.a.clone(), edge.b.clone()],
                expected_slot: SlotRef::relation(&edge.a, &edge.b, slot),
            });
        }
    }
    out
}

#[test]
fn verbatim_questions_score_perfectly() {
    let network = common::network();
    let lexicon = common::lexicon();
    let config = SimilarityConfig::default();
    let report = run_eval(
        &network,
        Scorer {
            lexicon: &lexicon,
            config: &config,
        },
        &verbatim_set(),
    );
    assert_eq!(report.categories.len(), 4);
    for stats in report.categories.values() {
        assert_eq!(stats.accuracy, 1.0);
    }
    assert!(report.failures.is_empty());
    assert_eq!(report.overall.unwrap().asked, 38);
}

#[test]
fn report_matches_a_recount_and_round_trips() {
    let network = common::network();
    let lexicon = common::lexicon();
    let config = SimilarityConfig::default();
    let scorer = Scorer {
        lexicon: &lexicon,
        config: &config,
    };
    let text = std::fs::read_to_string(common::PARAPHRASE_FILE).unwrap();
    let questions = load_question_set(&text, &network).unwrap();
    let report = run_eval(&network, scorer, &questions);

    let matcher = EntityMatcher::for_network(&network);
    for (category, stats) in &report.categories {
        let subset: Vec<_> = questions.iter().filter(|q| q.category == *category).collect();
        let correct = subset
            .iter()
            .filter(|q| {
                is_correct(
                    &analyze(&network, &matcher, scorer, &q.question).unwrap(),
                    &q.expected_slot,
                )
            })
            .count();
        assert_eq!((stats.asked, stats.correct), (subset.len(), correct));
        assert!(stats.correct <= stats.asked);
    }
    let overall = report.overall.unwrap();
    assert_eq!(overall.asked, questions.len());
    assert_eq!(overall.asked - overall.correct, report.failures.len());

    let back: concept_qa::EvalReport = serde_json::from_str(&report.to_json()).unwrap();
    assert_eq!(back, report);
    let table = report.to_table();
    assert_eq!(table.lines().count(), report.categories.len() + 2);
    assert!(table.lines().last().unwrap().starts_with("overall"));
}

#[test]
fn question_set_entities_appear_in_the_questions() {
    let network = common::network();
    let matcher = EntityMatcher::for_network(&network);
    let text = std::fs::read_to_string(common::PARAPHRASE_FILE).unwrap();
    for q in load_question_set(&text, &network).unwrap() {
        let found = matcher.extract(&concept_qa::tokenize(&q.question)).entity_ids();
        assert_eq!(found, q.expected_entities, "{}", q.question);
    }
}
