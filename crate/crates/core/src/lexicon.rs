//! Question tokenization and longest-match entity extraction.
//!
//! Entity surface forms are tokenized the same way questions are and loaded
//! into a token-level trie. Extraction scans the question left to right; at
//! each position it takes the longest surface form starting there, emits it
//! and jumps past it, otherwise it moves one token forward.

use std::collections::HashMap;
use std::ops::Range;

use serde::Serialize;

use crate::network::ConceptNetwork;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    /// Byte range of the token (after punctuation stripping) in the input.
    pub span: Range<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TokenSequence {
    tokens: Vec<Token>,
}

impl TokenSequence {
    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn words(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.text.as_str()).collect()
    }

    pub fn into_words(self) -> Vec<String> {
        self.tokens.into_iter().map(|t| t.text).collect()
    }
}

/// Split on whitespace, strip leading/trailing punctuation from each piece,
/// lowercase, and drop pieces that end up empty.
pub fn tokenize(text: &str) -> TokenSequence {
    let mut tokens = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices().chain(std::iter::once((text.len(), ' '))) {
        match (c.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                push_token(&mut tokens, text, s, i);
                start = None;
            }
            _ => {}
        }
    }
    TokenSequence { tokens }
}

fn push_token(tokens: &mut Vec<Token>, text: &str, start: usize, end: usize) {
    let raw = &text[start..end];
    let trimmed_front = raw.trim_start_matches(is_strippable);
    let lead = raw.len() - trimmed_front.len();
    let trimmed = trimmed_front.trim_end_matches(is_strippable);
    if trimmed.is_empty() {
        return;
    }
    tokens.push(Token {
        text: trimmed.to_lowercase(),
        span: start + lead..start + lead + trimmed.len(),
    });
}

fn is_strippable(c: char) -> bool {
    !c.is_alphanumeric()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EntityMatch {
    pub entity_id: String,
    /// Half-open token range in the question.
    pub token_span: Range<usize>,
    pub form: String,
}

/// Result of [`EntityMatcher::extract`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Extraction {
    /// One match per distinct entity, in order of first appearance.
    pub matches: Vec<EntityMatch>,
    /// Every emitted span, including repeats of the same entity.
    pub spans: Vec<EntityMatch>,
}

impl Extraction {
    pub fn entity_ids(&self) -> Vec<String> {
        self.matches.iter().map(|m| m.entity_id.clone()).collect()
    }
}

#[derive(Debug, Default, Clone)]
struct Node {
    children: HashMap<String, usize>,
    // (entity id, surface form)
    payload: Option<(String, String)>,
}

/// Token trie over entity surface forms. Immutable once built.
#[derive(Debug, Clone)]
pub struct EntityMatcher {
    nodes: Vec<Node>,
    forms: usize,
    network_version: Option<u64>,
}

impl EntityMatcher {
    /// Build from `(surface form, entity id)` pairs. Forms that tokenize to
    /// nothing are skipped; when two forms tokenize identically the first
    /// one wins.
    pub fn build<S: AsRef<str>, I: AsRef<str>>(dictionary: &[(S, I)]) -> Self {
        let mut matcher = EntityMatcher {
            nodes: vec![Node::default()],
            forms: 0,
            network_version: None,
        };
        for (form, id) in dictionary {
            matcher.insert(form.as_ref(), id.as_ref());
        }
        matcher
    }

    /// Build from a network's entity dictionary, remembering its version.
    pub fn for_network(network: &ConceptNetwork) -> Self {
        let mut matcher = Self::build(&network.entity_dictionary());
        matcher.network_version = Some(network.version());
        matcher
    }

    /// Version of the network this matcher was built from, if any.
    pub fn network_version(&self) -> Option<u64> {
        self.network_version
    }

    /// Number of distinct surface forms indexed.
    pub fn len(&self) -> usize {
        self.forms
    }

    pub fn is_empty(&self) -> bool {
        self.forms == 0
    }

    fn insert(&mut self, form: &str, id: &str) {
        let words = tokenize(form).into_words();
        if words.is_empty() {
            return;
        }
        let mut node = 0;
        for word in words {
            node = match self.nodes[node].children.get(&word) {
                Some(&next) => next,
                None => {
                    self.nodes.push(Node::default());
                    let next = self.nodes.len() - 1;
                    self.nodes[node].children.insert(word, next);
                    next
                }
            };
        }
        if self.nodes[node].payload.is_none() {
            self.nodes[node].payload = Some((id.to_string(), form.to_string()));
            self.forms += 1;
        }
    }

    /// Entity id for an exact surface form.
    pub fn lookup(&self, form: &str) -> Option<&str> {
        let mut node = 0;
        for word in tokenize(form).into_words() {
            node = *self.nodes[node].children.get(&word)?;
        }
        self.nodes[node].payload.as_ref().map(|(id, _)| id.as_str())
    }

    /// Longest match starting at `start`: `(end, node)`.
    fn longest_at<S: AsRef<str>>(&self, words: &[S], start: usize) -> Option<(usize, usize)> {
        let mut node = 0;
        let mut best = None;
        for (offset, word) in words[start..].iter().enumerate() {
            match self.nodes[node].children.get(word.as_ref()) {
                Some(&next) => node = next,
                None => break,
            }
            if self.nodes[node].payload.is_some() {
                best = Some((start + offset + 1, node));
            }
        }
        best
    }

    pub fn extract(&self, tokens: &TokenSequence) -> Extraction {
        self.extract_words(&tokens.words())
    }

    /// Greedy left-to-right longest-match extraction over normalized words.
    pub fn extract_words<S: AsRef<str>>(&self, words: &[S]) -> Extraction {
        let mut extraction = Extraction::default();
        let mut i = 0;
        while i < words.len() {
            let Some((end, node)) = self.longest_at(words, i) else {
                i += 1;
                continue;
            };
            let (id, form) = self.nodes[node].payload.clone().expect("match node has payload");
            let m = EntityMatch {
                entity_id: id,
                token_span: i..end,
                form,
            };
            if !extraction.matches.iter().any(|e| e.entity_id == m.entity_id) {
                extraction.matches.push(m.clone());
            }
            extraction.spans.push(m);
            i = end;
        }
        extraction
    }
}
