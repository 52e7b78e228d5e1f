#![allow(dead_code)]

use std::collections::HashMap;
use std::io::{Read, Write};
use std::net::TcpStream;
use std::path::{Path, PathBuf};

use concept_qa::{ConceptNetwork, WordNetLexicon};

pub const NETWORK_FILE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/force_pressure.json");
pub const PARAPHRASE_FILE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/paraphrases.jsonl");
pub const LEXICON_DIR: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/wordnet");

pub fn network_text() -> String {
    std::fs::read_to_string(NETWORK_FILE).unwrap()
}

pub fn network() -> ConceptNetwork {
    ConceptNetwork::deserialize(&network_text()).unwrap()
}

pub fn lexicon() -> WordNetLexicon {
    WordNetLexicon::load_dir(Path::new(LEXICON_DIR)).unwrap()
}

/// `$WORDNET_DIR`, else a system copy if one exists.
pub fn full_wordnet_dir() -> Option<PathBuf> {
    let candidates = std::env::var_os("WORDNET_DIR")
        .map(PathBuf::from)
        .into_iter()
        .chain(["/opt/wordnet-3.0", "/usr/share/wordnet"].map(PathBuf::from));
    candidates
        .into_iter()
        .find(|dir| dir.join("data.noun").is_file() && dir.join("index.noun").is_file())
}

/// Enumerate every dictionary span, then walk left to right taking the
/// longest span that starts at the cursor. Returns (start, end, entity).
pub fn brute_force_extract(words: &[String], dictionary: &[(String, String)]) -> Vec<(usize, usize, String)> {
    let mut forms: HashMap<String, String> = HashMap::new();
    for (form, id) in dictionary {
        let key = form.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
        forms.entry(key).or_insert_with(|| id.clone());
    }
    let mut all = Vec::new();
    for i in 0..words.len() {
        for j in i + 1..=words.len() {
            if let Some(id) = forms.get(&words[i..j].join(" ")) {
                all.push((i, j, id.clone()));
            }
        }
    }
    let mut out = Vec::new();
    let mut cursor = 0;
    while cursor < words.len() {
        let longest = all.iter().filter(|(i, _, _)| *i == cursor).max_by_key(|(_, j, _)| *j);
        match longest {
            Some(span) => {
                cursor = span.1;
                out.push(span.clone());
            }
            None => cursor += 1,
        }
    }
    out
}

pub struct HttpResponse {
    pub status: u16,
    pub body: String,
}

impl HttpResponse {
    pub fn json(&self) -> serde_json::Value {
        serde_json::from_str(&self.body).unwrap_or_else(|e| panic!("{e}: {}", self.body))
    }
}

/// One HTTP/1.1 request over a fresh connection.
pub fn http(addr: std::net::SocketAddr, method: &str, path: &str, body: Option<&str>) -> HttpResponse {
    let mut stream = TcpStream::connect(addr).unwrap();
    let body = body.unwrap_or("");
    write!(
        stream,
        "{method} {path} HTTP/1.1\r\nHost: {addr}\r\nConnection: close\r\nContent-Type: application/json\r\nContent-Length: {}\r\n\r\n{body}",
        body.len()
    )
    .unwrap();
    let mut raw = String::new();
    stream.read_to_string(&mut raw).unwrap();
    let (head, rest) = raw.split_once("\r\n\r\n").expect("response head");
    let status = head.split(' ').nth(1).unwrap().parse().unwrap();
    let chunked = head
        .lines()
        .any(|l| l.to_ascii_lowercase().starts_with("transfer-encoding: chunked"));
    let body = if chunked { dechunk(rest) } else { rest.to_string() };
    HttpResponse { status, body }
}

fn dechunk(mut rest: &str) -> String {
    let mut out = String::new();
    loop {
        let (size, tail) = rest.split_once("\r\n").unwrap();
        let size = usize::from_str_radix(size.trim(), 16).unwrap();
        if size == 0 {
            return out;
        }
        out.push_str(&tail[..size]);
        rest = &tail[size + 2..];
    }
}
