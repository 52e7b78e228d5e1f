mod common;

use concept_qa::network::Schema;
use concept_qa::{
    replay, Action, Entity, Mutation, NetworkStore, QaTuple, Scorer, SimilarityConfig, StoreError, TicketFilter,
};

#[test]
fn reopened_store_has_network_tickets_and_log() {
    let dir = tempfile::tempdir().unwrap();
    let lexicon = common::lexicon();
    let config = SimilarityConfig::default();
    let scorer = Scorer {
        lexicon: &lexicon,
        config: &config,
    };

    let (exported, ticket) = {
        let store = NetworkStore::open(dir.path()).unwrap();
        let id = store.import(common::network()).unwrap().id;
        let pending = store.ask(&id, scorer, "What is friction?").unwrap();
        assert!(!pending.is_answered());
        let waiting = store.ask(&id, scorer, "What is buoyancy?").unwrap();
        let friction = Entity::new("friction", "friction", "Force", &Schema::default_attributes()).with_attribute(
            "definition",
            QaTuple::new("What is friction?", "It opposes motion.").unwrap(),
        );
        let tickets = store.tickets(&id, TicketFilter::open()).unwrap();
        let (_, version) = store
            .resolve_ticket(&id, tickets[0].id, Action::AddEntity { entity: friction }, 1, "expert")
            .unwrap();
        assert_eq!(version, 2);
        store
            .mutate(
                &id,
                2,
                "editor",
                Mutation::SetAttribute {
                    entity_id: "magnet".into(),
                    slot: "types".into(),
                    qa: Some(QaTuple::new("What are the types of magnet?", "Bar, horseshoe and ring.").unwrap()),
                },
            )
            .unwrap();
        let waiting = match waiting.outcome {
            concept_qa::Outcome::Pending { ticket_id, .. } => ticket_id,
            other => panic!("{other:?}"),
        };
        (store.snapshot(&id).unwrap().network.serialize(), waiting)
    };

    let store = NetworkStore::open(dir.path()).unwrap();
    let id = "force-and-pressure";
    let network = store.snapshot(id).unwrap().network.clone();
    assert_eq!(network.serialize(), exported);
    assert_eq!(network.version(), 3);
    let open = store.tickets(id, TicketFilter::open()).unwrap();
    assert_eq!(open.iter().map(|t| t.id).collect::<Vec<_>>(), [ticket]);
    let log = store.audit_log(id).unwrap();
    assert_eq!(log.len(), 2);
    assert_eq!(replay(&store.base(id).unwrap(), &log).unwrap(), *network);
    assert!(store.ask(id, scorer, "What is friction?").unwrap().is_answered());

    assert!(matches!(
        store.mutate(id, 2, "late", log[0].mutation.clone()),
        Err(StoreError::VersionConflict { expected: 2, actual: 3 })
    ));
}

#[test]
fn corrupt_network_file_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("broken.network.json"), "{\"format_version\": 1}").unwrap();
    assert!(NetworkStore::open(dir.path()).is_err());
}
