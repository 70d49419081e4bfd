use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use parking_lot::{Mutex, RwLock};
use serde::{Deserialize, Serialize};

use super::aggregate::{aggregate, AggregateReport};
use super::{
    AnnotationItem, HumanEvalError, ItemView, Judgment, JudgmentInput, LabelAgreement, Naturalness, OriginGuess,
    Session,
};

const SESSION_FILE: &str = "session.json";
const LOG_FILE: &str = "judgments.log";
const SNAPSHOT_FILE: &str = "snapshot.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Progress {
    pub answered: usize,
    pub total: usize,
}

/// Per-criterion counts shown on the completion screen.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CompletionSummary {
    pub naturalness: BTreeMap<Naturalness, usize>,
    pub label_agree: BTreeMap<LabelAgreement, usize>,
    pub origin_guess: BTreeMap<OriginGuess, usize>,
}

/// Response of the next-item endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum NextItem {
    Item {
        item: ItemView,
        progress: Progress,
    },
    Complete {
        progress: Progress,
        summary: CompletionSummary,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubmitOutcome {
    pub accepted: bool,
    pub overwritten: bool,
    pub progress: Progress,
}

/// One line of the append-only judgment log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub seq: u64,
    pub judgment: Judgment,
    /// The judgment this one replaced, if any.
    pub replaced: Option<Judgment>,
}

/// One line of a session export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ExportLine {
    Session {
        session_id: String,
        annotators: Vec<String>,
    },
    Item(AnnotationItem),
    Judgment(Judgment),
}

type JudgmentKey = (String, String);

#[derive(Debug, Default)]
struct Snapshot {
    seq: u64,
    judgments: BTreeMap<JudgmentKey, Judgment>,
}

struct SessionState {
    session: Session,
    dir: PathBuf,
    snapshot: RwLock<Arc<Snapshot>>,
    write: Mutex<()>,
}

impl SessionState {
    fn current(&self) -> Arc<Snapshot> {
        self.snapshot.read().clone()
    }
}

fn storage_err(path: &Path) -> impl FnOnce(std::io::Error) -> HumanEvalError + '_ {
    move |e| HumanEvalError::Storage {
        path: path.display().to_string(),
        reason: e.to_string(),
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), HumanEvalError> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).map_err(storage_err(&tmp))?;
    fs::rename(&tmp, path).map_err(storage_err(path))
}

/// Sessions on disk, one directory each, with an append-only judgment log
/// and a derived snapshot. Writes are serialized per session; readers work
/// on an immutable snapshot.
pub struct SessionStore {
    root: PathBuf,
    sessions: RwLock<HashMap<String, Arc<SessionState>>>,
}

impl SessionStore {
    /// Opens `root`, replaying the log of every session found there.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, HumanEvalError> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(storage_err(&root))?;
        let mut sessions = HashMap::new();
        for entry in fs::read_dir(&root).map_err(storage_err(&root))? {
            let dir = entry.map_err(storage_err(&root))?.path();
            let session_file = dir.join(SESSION_FILE);
            if !session_file.is_file() {
                continue;
            }
            let raw = fs::read_to_string(&session_file).map_err(storage_err(&session_file))?;
            let session: Session = serde_json::from_str(&raw).map_err(|e| HumanEvalError::Storage {
                path: session_file.display().to_string(),
                reason: e.to_string(),
            })?;
            let snapshot = replay(&dir.join(LOG_FILE))?;
            sessions.insert(
                session.id.clone(),
                Arc::new(SessionState {
                    session,
                    dir,
                    snapshot: RwLock::new(Arc::new(snapshot)),
                    write: Mutex::new(()),
                }),
            );
        }
        Ok(Self {
            root,
            sessions: RwLock::new(sessions),
        })
    }

    pub fn create(&self, session: Session) -> Result<(), HumanEvalError> {
        let mut sessions = self.sessions.write();
        if sessions.contains_key(&session.id) {
            return Err(HumanEvalError::SessionExists(session.id));
        }
        if session.id.is_empty()
            || !session
                .id
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
        {
            return Err(HumanEvalError::Invalid(format!(
                "session id {:?} must be [A-Za-z0-9_-]+",
                session.id
            )));
        }
        let dir = self.root.join(&session.id);
        fs::create_dir_all(&dir).map_err(storage_err(&dir))?;
        let json = serde_json::to_vec_pretty(&session).expect("session serializes");
        write_atomic(&dir.join(SESSION_FILE), &json)?;
        write_atomic(&dir.join(SNAPSHOT_FILE), b"[]")?;
        sessions.insert(
            session.id.clone(),
            Arc::new(SessionState {
                session,
                dir,
                snapshot: RwLock::new(Arc::new(Snapshot::default())),
                write: Mutex::new(()),
            }),
        );
        Ok(())
    }

    fn state(&self, id: &str) -> Result<Arc<SessionState>, HumanEvalError> {
        self.sessions
            .read()
            .get(id)
            .cloned()
            .ok_or_else(|| HumanEvalError::NotFound(format!("session {id}")))
    }

    pub fn session(&self, id: &str) -> Result<Session, HumanEvalError> {
        Ok(self.state(id)?.session.clone())
    }

    pub fn session_ids(&self) -> Vec<String> {
        let mut ids: Vec<_> = self.sessions.read().keys().cloned().collect();
        ids.sort();
        ids
    }

    /// Resolves an annotator token; `annotator`, when given, must match.
    pub fn authenticate(&self, id: &str, token: &str, annotator: Option<&str>) -> Result<String, HumanEvalError> {
        let state = self.state(id)?;
        let found = state
            .session
            .annotator_for_token(token)
            .ok_or(HumanEvalError::Unauthorized)?;
        if annotator.is_some_and(|a| a != found.id) {
            return Err(HumanEvalError::Unauthorized);
        }
        Ok(found.id.clone())
    }

    pub fn is_admin(&self, id: &str, token: &str) -> Result<bool, HumanEvalError> {
        Ok(self.state(id)?.session.admin_token == token)
    }

    fn progress(session: &Session, snapshot: &Snapshot, annotator: &str) -> Progress {
        let answered = session
            .items
            .iter()
            .filter(|i| {
                snapshot
                    .judgments
                    .contains_key(&(annotator.to_string(), i.item_id.clone()))
            })
            .count();
        Progress {
            answered,
            total: session.items.len(),
        }
    }

    /// First item, in position order, the annotator has not judged.
    pub fn next_item(&self, id: &str, annotator: &str) -> Result<NextItem, HumanEvalError> {
        let state = self.state(id)?;
        let snapshot = state.current();
        let session = &state.session;
        let progress = Self::progress(session, &snapshot, annotator);
        let pending = session.items.iter().find(|i| {
            !snapshot
                .judgments
                .contains_key(&(annotator.to_string(), i.item_id.clone()))
        });
        Ok(match pending {
            Some(item) => NextItem::Item {
                item: ItemView {
                    total: session.items.len(),
                    ..ItemView::from(item)
                },
                progress,
            },
            None => {
                let mut summary = CompletionSummary::default();
                for ((who, _), j) in &snapshot.judgments {
                    if who == annotator {
                        *summary.naturalness.entry(j.input.naturalness).or_default() += 1;
                        *summary.label_agree.entry(j.input.label_agree).or_default() += 1;
                        *summary.origin_guess.entry(j.input.origin_guess).or_default() += 1;
                    }
                }
                NextItem::Complete { progress, summary }
            }
        })
    }

    /// Validates and persists a judgment. A repeat for the same item
    /// replaces the earlier one; both stay in the log.
    pub fn submit(&self, id: &str, annotator: &str, input: JudgmentInput) -> Result<SubmitOutcome, HumanEvalError> {
        input.validate()?;
        let state = self.state(id)?;
        if state.session.item(&input.item_id).is_none() {
            return Err(HumanEvalError::NotFound(format!("item {}", input.item_id)));
        }
        if !state.session.annotators.iter().any(|a| a.id == annotator) {
            return Err(HumanEvalError::Unauthorized);
        }
        let _guard = state.write.lock();
        let current = state.current();
        let key = (annotator.to_string(), input.item_id.clone());
        let judgment = Judgment {
            annotator_id: annotator.to_string(),
            input,
            timestamp: chrono::Utc::now(),
        };
        let entry = AuditEntry {
            seq: current.seq + 1,
            replaced: current.judgments.get(&key).cloned(),
            judgment: judgment.clone(),
        };
        let log_path = state.dir.join(LOG_FILE);
        let mut line = serde_json::to_vec(&entry).expect("audit entry serializes");
        line.push(b'\n');
        let mut log = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&log_path)
            .map_err(storage_err(&log_path))?;
        log.write_all(&line).map_err(storage_err(&log_path))?;
        log.sync_data().map_err(storage_err(&log_path))?;

        let mut judgments = current.judgments.clone();
        judgments.insert(key, judgment);
        let next = Snapshot {
            seq: entry.seq,
            judgments,
        };
        let list: Vec<&Judgment> = next.judgments.values().collect();
        write_atomic(
            &state.dir.join(SNAPSHOT_FILE),
            &serde_json::to_vec_pretty(&list).expect("judgments serialize"),
        )?;
        let progress = Self::progress(&state.session, &next, annotator);
        *state.snapshot.write() = Arc::new(next);
        Ok(SubmitOutcome {
            accepted: true,
            overwritten: entry.replaced.is_some(),
            progress,
        })
    }

    /// Current judgments, ordered by annotator then item.
    pub fn judgments(&self, id: &str) -> Result<Vec<Judgment>, HumanEvalError> {
        Ok(self.state(id)?.current().judgments.values().cloned().collect())
    }

    pub fn audit_log(&self, id: &str) -> Result<Vec<AuditEntry>, HumanEvalError> {
        read_log(&self.state(id)?.dir.join(LOG_FILE))
    }

    pub fn report(&self, id: &str) -> Result<AggregateReport, HumanEvalError> {
        let state = self.state(id)?;
        let snapshot = state.current();
        let judgments: Vec<Judgment> = snapshot.judgments.values().cloned().collect();
        let annotators: Vec<String> = state.session.annotators.iter().map(|a| a.id.clone()).collect();
        aggregate(&state.session.items, &annotators, &judgments)
    }

    /// Writes the session items and current judgments as JSON lines.
    pub fn export(&self, id: &str, path: &Path) -> Result<usize, HumanEvalError> {
        let state = self.state(id)?;
        let snapshot = state.current();
        let mut out = Vec::new();
        let mut push = |line: ExportLine| {
            out.extend(serde_json::to_vec(&line).expect("export line serializes"));
            out.push(b'\n');
        };
        push(ExportLine::Session {
            session_id: state.session.id.clone(),
            annotators: state.session.annotators.iter().map(|a| a.id.clone()).collect(),
        });
        for item in &state.session.items {
            push(ExportLine::Item(item.clone()));
        }
        for j in snapshot.judgments.values() {
            push(ExportLine::Judgment(j.clone()));
        }
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).map_err(storage_err(parent))?;
        }
        fs::write(path, out).map_err(storage_err(path))?;
        Ok(snapshot.judgments.len())
    }
}

fn read_log(path: &Path) -> Result<Vec<AuditEntry>, HumanEvalError> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(storage_err(path)(e)),
    };
    let lines: Vec<String> = BufReader::new(file)
        .lines()
        .collect::<Result<_, _>>()
        .map_err(storage_err(path))?;
    let last = lines.iter().rposition(|l| !l.trim().is_empty());
    let mut entries = Vec::new();
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(line) {
            Ok(entry) => entries.push(entry),
            // a torn final line from an interrupted append is dropped
            Err(e) if Some(i) == last => {
                log::warn!("{}:{}: dropping incomplete log line: {e}", path.display(), i + 1);
            }
            Err(e) => {
                return Err(HumanEvalError::Storage {
                    path: path.display().to_string(),
                    reason: format!("line {}: {e}", i + 1),
                })
            }
        }
    }
    Ok(entries)
}

fn replay(path: &Path) -> Result<Snapshot, HumanEvalError> {
    let mut snapshot = Snapshot::default();
    for entry in read_log(path)? {
        snapshot.seq = entry.seq;
        let j = entry.judgment;
        snapshot
            .judgments
            .insert((j.annotator_id.clone(), j.input.item_id.clone()), j);
    }
    Ok(snapshot)
}

/// Rebuilds the aggregate report from an export file alone.
pub fn recompute_from_export(path: &Path) -> Result<AggregateReport, HumanEvalError> {
    let raw = fs::read_to_string(path).map_err(storage_err(path))?;
    let mut annotators = Vec::new();
    let mut items = Vec::new();
    let mut judgments = Vec::new();
    for (i, line) in raw.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let parsed: ExportLine = serde_json::from_str(line).map_err(|e| HumanEvalError::Storage {
            path: path.display().to_string(),
            reason: format!("line {}: {e}", i + 1),
        })?;
        match parsed {
            ExportLine::Session { annotators: a, .. } => annotators = a,
            ExportLine::Item(item) => items.push(item),
            ExportLine::Judgment(j) => judgments.push(j),
        }
    }
    aggregate(&items, &annotators, &judgments)
}
