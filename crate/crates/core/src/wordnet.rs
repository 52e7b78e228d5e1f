//! Reader for WordNet 3.x flat files (`index.<pos>` / `data.<pos>`) and
//! Wu-Palmer word similarity over the hypernym graph.
//!
//! Only what similarity needs is kept: synset lemmas and hypernym pointers
//! (`@` and instance hypernyms `@i`). Depths are precomputed at load time,
//! with top-level synsets at depth 1; a synset with several hypernyms takes
//! the shortest path.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pos {
    Noun,
    Verb,
    Adjective,
    Adverb,
}

impl Pos {
    /// Parse a part-of-speech letter; satellite adjectives (`s`) share the
    /// adjective data file.
    pub fn from_letter(letter: &str) -> Option<Pos> {
        match letter {
            "n" => Some(Pos::Noun),
            "v" => Some(Pos::Verb),
            "a" | "s" => Some(Pos::Adjective),
            "r" => Some(Pos::Adverb),
            _ => None,
        }
    }

    fn letter(self) -> char {
        match self {
            Pos::Noun => 'n',
            Pos::Verb => 'v',
            Pos::Adjective => 'a',
            Pos::Adverb => 'r',
        }
    }
}

/// `(part of speech, byte offset in the data file)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SynsetId {
    pub pos: Pos,
    pub offset: u64,
}

impl fmt::Display for SynsetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:08}-{}", self.offset, self.pos.letter())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Synset {
    pub id: SynsetId,
    pub lemmas: Vec<String>,
    pub hypernyms: Vec<SynsetId>,
}

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("{document} line {line}: {reason}")]
    Parse {
        document: &'static str,
        line: usize,
        reason: String,
    },
    #[error("{from} points at missing synset {target}")]
    DanglingPointer { from: String, target: SynsetId },
    #[error("hypernym cycle through synset {0}")]
    HypernymCycle(SynsetId),
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Lowercase, trim, and join words with underscores the way WordNet stores
/// collocations.
pub fn normalize_lemma(word: &str) -> String {
    word.split(|c: char| c.is_whitespace() || c == '_')
        .filter(|p| !p.is_empty())
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join("_")
}

#[derive(Debug, Clone, Default)]
pub struct WordNetLexicon {
    synsets: BTreeMap<SynsetId, Synset>,
    index: HashMap<String, Vec<SynsetId>>,
    depth: HashMap<SynsetId, u32>,
}

impl WordNetLexicon {
    /// A lexicon with no synsets; every comparison uses the string-equality
    /// fallback.
    pub fn empty() -> Self {
        Self::default()
    }

    /// Parse one `index.<pos>` / `data.<pos>` pair.
    pub fn parse(index_document: &str, data_document: &str) -> Result<Self, LexiconError> {
        Self::parse_many(&[(index_document, data_document)])
    }

    /// Parse several part-of-speech file pairs into one lexicon.
    pub fn parse_many(documents: &[(&str, &str)]) -> Result<Self, LexiconError> {
        let mut lexicon = WordNetLexicon::default();
        for (_, data) in documents {
            lexicon.read_data(data)?;
        }
        for (index, _) in documents {
            lexicon.read_index(index)?;
        }
        lexicon.resolve()?;
        Ok(lexicon)
    }

    /// Load the noun and verb databases found in `dir`.
    pub fn load_dir(dir: &Path) -> Result<Self, LexiconError> {
        let read = |name: &str| {
            let path = dir.join(name);
            std::fs::read_to_string(&path).map_err(|source| LexiconError::Io {
                path: path.display().to_string(),
                source,
            })
        };
        let mut documents = Vec::new();
        for pos in ["noun", "verb"] {
            if dir.join(format!("data.{pos}")).exists() {
                documents.push((read(&format!("index.{pos}"))?, read(&format!("data.{pos}"))?));
            }
        }
        let borrowed: Vec<(&str, &str)> = documents.iter().map(|(i, d)| (i.as_str(), d.as_str())).collect();
        Self::parse_many(&borrowed)
    }

    pub fn synset_count(&self) -> usize {
        self.synsets.len()
    }

    pub fn lemma_count(&self) -> usize {
        self.index.len()
    }

    pub fn synset(&self, id: SynsetId) -> Option<&Synset> {
        self.synsets.get(&id)
    }

    /// Senses of `word`, in index order. Empty when the word is unknown.
    pub fn synsets(&self, word: &str) -> Vec<&Synset> {
        self.index
            .get(&normalize_lemma(word))
            .map(|ids| ids.iter().filter_map(|id| self.synsets.get(id)).collect())
            .unwrap_or_default()
    }

    pub fn depth(&self, id: SynsetId) -> Option<u32> {
        self.depth.get(&id).copied()
    }

    /// The synset and all of its hypernym ancestors.
    pub fn closure(&self, id: SynsetId) -> BTreeSet<SynsetId> {
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::from([id]);
        while let Some(next) = queue.pop_front() {
            if !seen.insert(next) {
                continue;
            }
            if let Some(synset) = self.synsets.get(&next) {
                queue.extend(synset.hypernyms.iter().copied());
            }
        }
        seen
    }

    /// Deepest common ancestor; ties go to the smaller synset id.
    pub fn lowest_common_hypernym(&self, a: SynsetId, b: SynsetId) -> Option<SynsetId> {
        lcs_of(&self.closure(a), &self.closure(b), &self.depth)
    }

    /// Wu-Palmer score between two synsets, 0 when they share no ancestor.
    pub fn wup_synsets(&self, a: SynsetId, b: SynsetId) -> f64 {
        self.wup_with_closures(a, &self.closure(a), b, &self.closure(b))
    }

    fn wup_with_closures(
        &self,
        a: SynsetId,
        closure_a: &BTreeSet<SynsetId>,
        b: SynsetId,
        closure_b: &BTreeSet<SynsetId>,
    ) -> f64 {
        let Some(lcs) = lcs_of(closure_a, closure_b, &self.depth) else {
            return 0.0;
        };
        let (da, db, dl) = (self.depth[&a], self.depth[&b], self.depth[&lcs]);
        // With several hypernym paths the LCS may sit deeper than a
        // synset's own shortest path, so cap at 1.
        (2.0 * f64::from(dl) / f64::from(da + db)).min(1.0)
    }

    /// Best Wu-Palmer score over all sense pairs. Words without senses
    /// compare by normalized equality instead.
    pub fn wup_similarity(&self, word_a: &str, word_b: &str) -> f64 {
        let senses_a = self.synsets(word_a);
        let senses_b = self.synsets(word_b);
        if senses_a.is_empty() || senses_b.is_empty() {
            return if normalize_lemma(word_a) == normalize_lemma(word_b) {
                1.0
            } else {
                0.0
            };
        }
        let closures_b: Vec<_> = senses_b.iter().map(|s| (s.id, self.closure(s.id))).collect();
        let mut best = 0.0f64;
        for sa in senses_a {
            let closure_a = self.closure(sa.id);
            for (sb, closure_b) in &closures_b {
                best = best.max(self.wup_with_closures(sa.id, &closure_a, *sb, closure_b));
                if best >= 1.0 {
                    return 1.0;
                }
            }
        }
        best
    }

    fn read_data(&mut self, document: &str) -> Result<(), LexiconError> {
        for (n, line) in document.lines().enumerate() {
            if line.starts_with("  ") || line.trim().is_empty() {
                continue;
            }
            let synset = parse_data_line(line).map_err(|reason| LexiconError::Parse {
                document: "data",
                line: n + 1,
                reason,
            })?;
            self.synsets.insert(synset.id, synset);
        }
        Ok(())
    }

    fn read_index(&mut self, document: &str) -> Result<(), LexiconError> {
        for (n, line) in document.lines().enumerate() {
            if line.starts_with("  ") || line.trim().is_empty() {
                continue;
            }
            let (lemma, ids) = parse_index_line(line).map_err(|reason| LexiconError::Parse {
                document: "index",
                line: n + 1,
                reason,
            })?;
            for id in &ids {
                if !self.synsets.contains_key(id) {
                    return Err(LexiconError::DanglingPointer {
                        from: format!("index entry `{lemma}`"),
                        target: *id,
                    });
                }
            }
            let entry = self.index.entry(lemma).or_default();
            for id in ids {
                if !entry.contains(&id) {
                    entry.push(id);
                }
            }
        }
        Ok(())
    }

    fn resolve(&mut self) -> Result<(), LexiconError> {
        for synset in self.synsets.values() {
            for target in &synset.hypernyms {
                if !self.synsets.contains_key(target) {
                    return Err(LexiconError::DanglingPointer {
                        from: format!("synset {}", synset.id),
                        target: *target,
                    });
                }
            }
        }
        self.depth = compute_depths(&self.synsets)?;
        Ok(())
    }
}

fn lcs_of(a: &BTreeSet<SynsetId>, b: &BTreeSet<SynsetId>, depth: &HashMap<SynsetId, u32>) -> Option<SynsetId> {
    // BTreeSet iterates in id order, so the first maximum wins ties.
    let mut best: Option<(u32, SynsetId)> = None;
    for id in a.intersection(b) {
        let d = depth[id];
        if best.is_none_or(|(bd, _)| d > bd) {
            best = Some((d, *id));
        }
    }
    best.map(|(_, id)| id)
}

fn compute_depths(synsets: &BTreeMap<SynsetId, Synset>) -> Result<HashMap<SynsetId, u32>, LexiconError> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Visiting,
        Done(u32),
    }
    let mut marks: HashMap<SynsetId, Mark> = HashMap::with_capacity(synsets.len());
    for &root in synsets.keys() {
        if marks.contains_key(&root) {
            continue;
        }
        // Iterative post-order walk up the hypernym graph.
        let mut stack = vec![(root, false)];
        while let Some((id, expanded)) = stack.pop() {
            if expanded {
                let parents = &synsets[&id].hypernyms;
                let depth = parents
                    .iter()
                    .map(|p| match marks[p] {
                        Mark::Done(d) => d,
                        Mark::Visiting => unreachable!("parents finish before children"),
                    })
                    .min()
                    .map_or(1, |d| d + 1);
                marks.insert(id, Mark::Done(depth));
                continue;
            }
            match marks.get(&id) {
                Some(Mark::Done(_)) => continue,
                Some(Mark::Visiting) => return Err(LexiconError::HypernymCycle(id)),
                None => {}
            }
            marks.insert(id, Mark::Visiting);
            stack.push((id, true));
            for parent in &synsets[&id].hypernyms {
                match marks.get(parent) {
                    Some(Mark::Done(_)) => {}
                    Some(Mark::Visiting) => return Err(LexiconError::HypernymCycle(*parent)),
                    None => stack.push((*parent, false)),
                }
            }
        }
    }
    Ok(marks
        .into_iter()
        .map(|(id, mark)| match mark {
            Mark::Done(d) => (id, d),
            Mark::Visiting => unreachable!("walk finished"),
        })
        .collect())
}

fn parse_offset(field: &str) -> Result<u64, String> {
    if field.len() != 8 || !field.bytes().all(|b| b.is_ascii_digit()) {
        return Err(format!("bad synset offset `{field}`"));
    }
    field.parse().map_err(|_| format!("bad synset offset `{field}`"))
}

fn next_field<'a>(fields: &mut impl Iterator<Item = &'a str>, what: &str) -> Result<&'a str, String> {
    fields.next().ok_or_else(|| format!("missing {what}"))
}

/// `synset_offset lex_filenum ss_type w_cnt word lex_id [word lex_id...]
/// p_cnt [ptr...] [frames...] | gloss`
fn parse_data_line(line: &str) -> Result<Synset, String> {
    let body = line.split(" | ").next().unwrap_or(line);
    let mut fields = body.split_ascii_whitespace();
    let offset = parse_offset(next_field(&mut fields, "synset offset")?)?;
    let lex_filenum = next_field(&mut fields, "lex_filenum")?;
    if lex_filenum.len() != 2 || !lex_filenum.bytes().all(|b| b.is_ascii_digit()) {
        return Err(format!("bad lex_filenum `{lex_filenum}`"));
    }
    let ss_type = next_field(&mut fields, "ss_type")?;
    let pos = Pos::from_letter(ss_type).ok_or_else(|| format!("bad ss_type `{ss_type}`"))?;
    let w_cnt = next_field(&mut fields, "w_cnt")?;
    let w_cnt = usize::from_str_radix(w_cnt, 16).map_err(|_| format!("bad w_cnt `{w_cnt}`"))?;
    if w_cnt == 0 {
        return Err("synset without words".into());
    }
    let mut lemmas = Vec::with_capacity(w_cnt);
    for _ in 0..w_cnt {
        let word = next_field(&mut fields, "word")?;
        let lex_id = next_field(&mut fields, "lex_id")?;
        u8::from_str_radix(lex_id, 16).map_err(|_| format!("bad lex_id `{lex_id}`"))?;
        // Adjective syntactic markers: "(a)", "(p)", "(ip)".
        let word = word.split('(').next().unwrap_or(word);
        lemmas.push(word.to_string());
    }
    let p_cnt = next_field(&mut fields, "p_cnt")?;
    let p_cnt: usize = p_cnt.parse().map_err(|_| format!("bad p_cnt `{p_cnt}`"))?;
    let mut hypernyms = Vec::new();
    for _ in 0..p_cnt {
        let symbol = next_field(&mut fields, "pointer symbol")?;
        let target = parse_offset(next_field(&mut fields, "pointer offset")?)?;
        let target_pos = next_field(&mut fields, "pointer pos")?;
        let target_pos = Pos::from_letter(target_pos).ok_or_else(|| format!("bad pointer pos `{target_pos}`"))?;
        let source_target = next_field(&mut fields, "pointer source/target")?;
        if source_target.len() != 4 || u16::from_str_radix(source_target, 16).is_err() {
            return Err(format!("bad pointer source/target `{source_target}`"));
        }
        if symbol == "@" || symbol == "@i" {
            hypernyms.push(SynsetId {
                pos: target_pos,
                offset: target,
            });
        }
    }
    Ok(Synset {
        id: SynsetId { pos, offset },
        lemmas,
        hypernyms,
    })
}

/// `lemma pos synset_cnt p_cnt [ptr_symbol...] sense_cnt tagsense_cnt
/// synset_offset [synset_offset...]`
fn parse_index_line(line: &str) -> Result<(String, Vec<SynsetId>), String> {
    let mut fields = line.split_ascii_whitespace();
    let lemma = next_field(&mut fields, "lemma")?.to_lowercase();
    let pos = next_field(&mut fields, "pos")?;
    let pos = Pos::from_letter(pos).ok_or_else(|| format!("bad pos `{pos}`"))?;
    let synset_cnt = next_field(&mut fields, "synset_cnt")?;
    let synset_cnt: usize = synset_cnt
        .parse()
        .map_err(|_| format!("bad synset_cnt `{synset_cnt}`"))?;
    let p_cnt = next_field(&mut fields, "p_cnt")?;
    let p_cnt: usize = p_cnt.parse().map_err(|_| format!("bad p_cnt `{p_cnt}`"))?;
    for _ in 0..p_cnt {
        next_field(&mut fields, "pointer symbol")?;
    }
    for what in ["sense_cnt", "tagsense_cnt"] {
        let value = next_field(&mut fields, what)?;
        value.parse::<usize>().map_err(|_| format!("bad {what} `{value}`"))?;
    }
    let ids = (0..synset_cnt)
        .map(|_| parse_offset(next_field(&mut fields, "synset offset")?).map(|offset| SynsetId { pos, offset }))
        .collect::<Result<Vec<_>, _>>()?;
    if fields.next().is_some() {
        return Err("trailing fields after synset offsets".into());
    }
    Ok((lemma, ids))
}
