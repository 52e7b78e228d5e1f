mod common;

use concept_qa::wordnet::Pos;
use concept_qa::WordNetLexicon;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-12
}

#[test]
fn fixture_depths() {
    let lex = common::lexicon();
    assert_eq!(lex.synset_count(), 12);
    let depth = |word: &str| lex.depth(lex.synsets(word)[0].id).unwrap();
    assert_eq!(depth("entity"), 1);
    assert_eq!(depth("object"), 2);
    assert_eq!(depth("abstraction"), 2);
    assert_eq!(depth("organism"), 3);
    // Two parents at depth 3: shortest path wins.
    assert_eq!(depth("magnet"), 4);
    assert_eq!(depth("pushing"), 5);
}

#[test]
fn fixture_scores_by_hand() {
    let lex = common::lexicon();
    // 2 * depth(lcs) / (depth(a) + depth(b))
    let cases = [
        ("artifact", "organism", 2.0 * 2.0 / 6.0),
        ("magnet", "animal", 2.0 * 2.0 / 8.0),
        ("force", "pressure", 2.0 * 3.0 / 8.0),
        ("push", "pull", 2.0 * 4.0 / 10.0),
        ("tug", "pushing", 2.0 * 4.0 / 10.0),
        ("push", "pressure", 2.0 * 3.0 / 9.0),
        ("being", "beast", 2.0 * 3.0 / 7.0),
        ("artifact", "phenomenon", 2.0 * 1.0 / 6.0),
    ];
    for (a, b, want) in cases {
        assert!(close(lex.wup_similarity(a, b), want), "{a} {b}");
        assert!(close(lex.wup_similarity(b, a), want), "{b} {a}");
    }
}

#[test]
fn lcs_prefers_deepest_ancestor() {
    let lex = common::lexicon();
    let magnet = lex.synsets("magnet")[0].id;
    let force = lex.synsets("force")[0].id;
    let lcs = lex.lowest_common_hypernym(magnet, force).unwrap();
    assert_eq!(lex.synset(lcs).unwrap().lemmas, ["phenomenon"]);
}

#[test]
fn multiword_lemmas_match_with_spaces_or_underscores() {
    let data = "00000001 03 n 01 contact_force 0 000 | x\n";
    let index = "contact_force n 1 0 1 0 00000001\n";
    let lex = WordNetLexicon::parse(index, data).unwrap();
    assert_eq!(lex.wup_similarity("Contact Force", "contact_force"), 1.0);
}

fn data_lines(text: &str) -> usize {
    text.lines()
        .filter(|l| !l.starts_with("  ") && !l.trim().is_empty())
        .count()
}

#[test]
fn full_wordnet_parses() {
    let Some(dir) = common::full_wordnet_dir() else {
        eprintln!("full WordNet not found; set WORDNET_DIR to run this test");
        return;
    };
    let lex = WordNetLexicon::load_dir(&dir).unwrap();
    let nouns = std::fs::read_to_string(dir.join("data.noun")).unwrap();
    let verbs = std::fs::read_to_string(dir.join("data.verb")).unwrap_or_default();
    assert_eq!(lex.synset_count(), data_lines(&nouns) + data_lines(&verbs));

    let index = std::fs::read_to_string(dir.join("index.noun")).unwrap();
    let line = index.lines().find(|l| l.starts_with("force n ")).unwrap();
    let senses: usize = line.split(' ').nth(2).unwrap().parse().unwrap();
    let noun_senses = lex.synsets("force").iter().filter(|s| s.id.pos == Pos::Noun).count();
    assert_eq!(noun_senses, senses);

    for (a, b) in [
        ("force", "pressure"),
        ("push", "pull"),
        ("dog", "cat"),
        ("magnet", "iron"),
    ] {
        let s = lex.wup_similarity(a, b);
        assert!((0.0..=1.0).contains(&s) && s > 0.0, "{a} {b} {s}");
    }
}
