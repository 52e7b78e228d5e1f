//! Shared, optionally persistent home for concept networks.
//!
//! Readers grab an `Arc<Snapshot>` (network plus matching entity matcher)
//! and never block on writers for longer than a pointer swap. Writers are
//! serialized per network, must name the version they expect, and get
//! [`StoreError::VersionConflict`] when someone else got there first.
//!
//! With a data directory each network `<id>` is kept in four files:
//! `<id>.network.json` (current state), `<id>.base.json` (state at import),
//! `<id>.audit.jsonl` (mutations since import) and `<id>.tickets.json`.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use chrono::Utc;
use thiserror::Error;

use crate::audit::{AuditRecord, Mutation};
use crate::expert::{Action, PendingTicket, TicketError, TicketFilter, TicketId, TicketKind, TicketQueue};
use crate::lexicon::EntityMatcher;
use crate::network::{ConceptNetwork, DocumentError, NetworkError};
use crate::retrieval::{analyze, AnswerResult, RetrievalError, Scorer};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("unknown network `{0}`")]
    UnknownNetwork(String),
    #[error("network id `{0}` is not a valid file name")]
    InvalidNetworkId(String),
    #[error("expected network version {expected}, current is {actual}")]
    VersionConflict { expected: u64, actual: u64 },
    #[error(transparent)]
    Ticket(#[from] TicketError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Retrieval(#[from] RetrievalError),
    #[error("{path}: {source}")]
    Document {
        path: String,
        #[source]
        source: DocumentError,
    },
    #[error("{path}: {reason}")]
    Corrupt { path: String, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// A network version together with the matcher built from it.
#[derive(Debug)]
pub struct Snapshot {
    pub network: Arc<ConceptNetwork>,
    pub matcher: Arc<EntityMatcher>,
}

impl Snapshot {
    fn new(network: ConceptNetwork) -> Arc<Self> {
        let matcher = EntityMatcher::for_network(&network);
        Arc::new(Snapshot {
            network: Arc::new(network),
            matcher: Arc::new(matcher),
        })
    }
}

#[derive(Debug)]
struct WriterState {
    base: Arc<ConceptNetwork>,
    queue: TicketQueue,
    audit: Vec<AuditRecord>,
}

#[derive(Debug)]
struct Entry {
    snapshot: RwLock<Arc<Snapshot>>,
    writer: Mutex<WriterState>,
}

impl Entry {
    fn current(&self) -> Arc<Snapshot> {
        self.snapshot.read().expect("snapshot lock poisoned").clone()
    }

    fn publish(&self, network: ConceptNetwork) -> Arc<Snapshot> {
        let snapshot = Snapshot::new(network);
        *self.snapshot.write().expect("snapshot lock poisoned") = snapshot.clone();
        snapshot
    }
}

/// Summary row for listings.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct NetworkInfo {
    pub id: String,
    pub name: String,
    pub version: u64,
}

#[derive(Debug, Default)]
pub struct NetworkStore {
    entries: RwLock<BTreeMap<String, Arc<Entry>>>,
    dir: Option<PathBuf>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn write_atomic(path: &Path, contents: &str) -> Result<(), StoreError> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

fn valid_network_id(id: &str) -> bool {
    !id.is_empty()
        && !id.starts_with('.')
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
}

impl NetworkStore {
    /// A store that keeps everything in memory.
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Open (creating if needed) a data directory and load every network in it.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        let store = NetworkStore {
            entries: RwLock::default(),
            dir: Some(dir.clone()),
        };
        let mut ids = Vec::new();
        for item in fs::read_dir(&dir).map_err(io_err(&dir))? {
            let item = item.map_err(io_err(&dir))?;
            let name = item.file_name().to_string_lossy().into_owned();
            if let Some(id) = name.strip_suffix(".network.json") {
                ids.push(id.to_string());
            }
        }
        ids.sort();
        let mut entries = store.entries.write().expect("entries lock poisoned");
        for id in ids {
            let entry = store.load_entry(&dir, &id)?;
            entries.insert(id, Arc::new(entry));
        }
        drop(entries);
        Ok(store)
    }

    fn load_entry(&self, dir: &Path, id: &str) -> Result<Entry, StoreError> {
        let read_network = |path: PathBuf| -> Result<ConceptNetwork, StoreError> {
            let text = fs::read_to_string(&path).map_err(io_err(&path))?;
            ConceptNetwork::deserialize(&text).map_err(|source| StoreError::Document {
                path: path.display().to_string(),
                source,
            })
        };
        let current = read_network(dir.join(format!("{id}.network.json")))?;
        let base_path = dir.join(format!("{id}.base.json"));
        let base = if base_path.exists() {
            read_network(base_path)?
        } else {
            current.clone()
        };
        let tickets_path = dir.join(format!("{id}.tickets.json"));
        let queue = if tickets_path.exists() {
            let text = fs::read_to_string(&tickets_path).map_err(io_err(&tickets_path))?;
            TicketQueue::from_document(&text)?
        } else {
            TicketQueue::default()
        };
        let audit_path = dir.join(format!("{id}.audit.jsonl"));
        let mut audit = Vec::new();
        if audit_path.exists() {
            let text = fs::read_to_string(&audit_path).map_err(io_err(&audit_path))?;
            for (n, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
                let record = serde_json::from_str(line).map_err(|e| StoreError::Corrupt {
                    path: audit_path.display().to_string(),
                    reason: format!("line {}: {e}", n + 1),
                })?;
                audit.push(record);
            }
        }
        Ok(Entry {
            snapshot: RwLock::new(Snapshot::new(current)),
            writer: Mutex::new(WriterState {
                base: Arc::new(base),
                queue,
                audit,
            }),
        })
    }

    fn entry(&self, id: &str) -> Result<Arc<Entry>, StoreError> {
        self.entries
            .read()
            .expect("entries lock poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| StoreError::UnknownNetwork(id.to_string()))
    }

    fn path(&self, id: &str, suffix: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{id}.{suffix}")))
    }

    fn persist_network(&self, network: &ConceptNetwork) -> Result<(), StoreError> {
        match self.path(network.id(), "network.json") {
            Some(path) => write_atomic(&path, &network.serialize()),
            None => Ok(()),
        }
    }

    fn persist_tickets(&self, id: &str, queue: &TicketQueue) -> Result<(), StoreError> {
        match self.path(id, "tickets.json") {
            Some(path) => write_atomic(&path, &queue.to_document()),
            None => Ok(()),
        }
    }

    fn append_audit(&self, id: &str, record: &AuditRecord) -> Result<(), StoreError> {
        let Some(path) = self.path(id, "audit.jsonl") else {
            return Ok(());
        };
        let mut file = fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(io_err(&path))?;
        let line = serde_json::to_string(record).expect("audit record serializes");
        writeln!(file, "{line}").map_err(io_err(&path))
    }

    /// Register a network, replacing any network with the same id. The
    /// imported state becomes the new audit base; open tickets are kept.
    pub fn import(&self, network: ConceptNetwork) -> Result<NetworkInfo, StoreError> {
        let id = network.id().to_string();
        if !valid_network_id(&id) {
            return Err(StoreError::InvalidNetworkId(id));
        }
        let info = NetworkInfo {
            id: id.clone(),
            name: network.name().to_string(),
            version: network.version(),
        };
        let mut entries = self.entries.write().expect("entries lock poisoned");
        if let Some(base) = self.path(&id, "base.json") {
            write_atomic(&base, &network.serialize())?;
            self.persist_network(&network)?;
            if let Some(audit) = self.path(&id, "audit.jsonl") {
                write_atomic(&audit, "")?;
            }
        }
        match entries.get(&id) {
            Some(entry) => {
                let mut writer = entry.writer.lock().expect("writer lock poisoned");
                writer.base = Arc::new(network.clone());
                writer.audit.clear();
                entry.publish(network);
            }
            None => {
                let queue = TicketQueue::default();
                self.persist_tickets(&id, &queue)?;
                entries.insert(
                    id,
                    Arc::new(Entry {
                        writer: Mutex::new(WriterState {
                            base: Arc::new(network.clone()),
                            queue,
                            audit: Vec::new(),
                        }),
                        snapshot: RwLock::new(Snapshot::new(network)),
                    }),
                );
            }
        }
        Ok(info)
    }

    pub fn list(&self) -> Vec<NetworkInfo> {
        self.entries
            .read()
            .expect("entries lock poisoned")
            .iter()
            .map(|(id, entry)| {
                let snap = entry.current();
                NetworkInfo {
                    id: id.clone(),
                    name: snap.network.name().to_string(),
                    version: snap.network.version(),
                }
            })
            .collect()
    }

    /// The latest snapshot of a network.
    pub fn snapshot(&self, id: &str) -> Result<Arc<Snapshot>, StoreError> {
        Ok(self.entry(id)?.current())
    }

    /// The network as it was imported, before any audited mutation.
    pub fn base(&self, id: &str) -> Result<Arc<ConceptNetwork>, StoreError> {
        let entry = self.entry(id)?;
        let writer = entry.writer.lock().expect("writer lock poisoned");
        Ok(writer.base.clone())
    }

    pub fn audit_log(&self, id: &str) -> Result<Vec<AuditRecord>, StoreError> {
        let entry = self.entry(id)?;
        let writer = entry.writer.lock().expect("writer lock poisoned");
        Ok(writer.audit.clone())
    }

    /// Apply `mutation` if the network is still at `expected_version`.
    pub fn mutate(&self, id: &str, expected_version: u64, actor: &str, mutation: Mutation) -> Result<u64, StoreError> {
        let entry = self.entry(id)?;
        let mut writer = entry.writer.lock().expect("writer lock poisoned");
        let current = entry.current();
        check_version(&current.network, expected_version)?;
        let (next, record) = apply(&current.network, actor, mutation)?;
        self.persist_network(&next)?;
        self.append_audit(id, &record)?;
        writer.audit.push(record);
        Ok(entry.publish(next).network.version())
    }

    /// File a ticket (idempotent for an identical open question and kind).
    pub fn enqueue(&self, id: &str, question: &str, kind: TicketKind) -> Result<TicketId, StoreError> {
        let entry = self.entry(id)?;
        let mut writer = entry.writer.lock().expect("writer lock poisoned");
        let before = writer.queue.len();
        let ticket = writer.queue.enqueue(question, kind);
        if writer.queue.len() != before {
            self.persist_tickets(id, &writer.queue)?;
        }
        Ok(ticket)
    }

    pub fn tickets(&self, id: &str, filter: TicketFilter) -> Result<Vec<PendingTicket>, StoreError> {
        let entry = self.entry(id)?;
        let writer = entry.writer.lock().expect("writer lock poisoned");
        Ok(writer.queue.list(filter).into_iter().cloned().collect())
    }

    /// Resolve an open ticket. The network mutation (if any) and the ticket
    /// update happen together or not at all.
    pub fn resolve_ticket(
        &self,
        id: &str,
        ticket_id: TicketId,
        action: Action,
        expected_version: u64,
        actor: &str,
    ) -> Result<(PendingTicket, u64), StoreError> {
        let entry = self.entry(id)?;
        let mut writer = entry.writer.lock().expect("writer lock poisoned");
        writer.queue.check_open(ticket_id)?;
        let current = entry.current();
        check_version(&current.network, expected_version)?;

        let Some(mutation) = action.mutation() else {
            let version = current.network.version();
            let mut queue = writer.queue.clone();
            let ticket = queue.close(ticket_id, action, version)?.clone();
            self.persist_tickets(id, &queue)?;
            writer.queue = queue;
            return Ok((ticket, version));
        };

        let (next, record) = apply(&current.network, actor, mutation)?;
        let version = next.version();
        let mut queue = writer.queue.clone();
        let ticket = queue.close(ticket_id, action, version)?.clone();
        self.persist_network(&next)?;
        self.append_audit(id, &record)?;
        self.persist_tickets(id, &queue)?;
        writer.audit.push(record);
        writer.queue = queue;
        entry.publish(next);
        Ok((ticket, version))
    }

    /// Answer against the latest snapshot, filing a ticket when the
    /// question cannot be answered.
    pub fn ask(&self, id: &str, scorer: Scorer<'_>, question: &str) -> Result<AnswerResult, StoreError> {
        let snapshot = self.snapshot(id)?;
        let analysis = analyze(&snapshot.network, &snapshot.matcher, scorer, question)?;
        AnswerResult::from_analysis(analysis, snapshot.network.version(), question, |q, kind| {
            self.enqueue(id, q, kind.clone())
        })
    }
}

fn check_version(network: &ConceptNetwork, expected: u64) -> Result<(), StoreError> {
    if network.version() != expected {
        return Err(StoreError::VersionConflict {
            expected,
            actual: network.version(),
        });
    }
    Ok(())
}

fn apply(
    network: &ConceptNetwork,
    actor: &str,
    mutation: Mutation,
) -> Result<(ConceptNetwork, AuditRecord), StoreError> {
    let mut next = network.clone();
    mutation.apply(&mut next)?;
    let record = AuditRecord {
        actor: actor.to_string(),
        timestamp: Utc::now(),
        before_version: network.version(),
        after_version: next.version(),
        mutation,
    };
    Ok((next, record))
}
