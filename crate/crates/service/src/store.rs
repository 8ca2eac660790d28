//! Session records and their on-disk form: one JSON document per session,
//! replaced atomically on every change.

use std::collections::HashMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use seqdiag_core::session::{Session, SessionConfig, SessionError};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    pub code: String,
    pub message: String,
}

impl ApiError {
    pub fn new(code: &str, message: impl Into<String>) -> Self {
        ApiError {
            code: code.into(),
            message: message.into(),
        }
    }
}

impl From<&SessionError> for ApiError {
    fn from(e: &SessionError) -> Self {
        ApiError::new(e.code(), e.to_string())
    }
}

/// Engine work accepted but not yet finished.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Job {
    Start,
    Answer { outcome: bool },
}

/// An accepted answer, kept so that a resubmission is recognised.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AcceptedAnswer {
    pub key: String,
    pub outcome: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Record {
    pub id: String,
    pub created_ms: u64,
    pub dpi: String,
    pub config: SessionConfig,
    /// State after the last finished engine run; absent until the first.
    pub session: Option<Session>,
    pub job: Option<Job>,
    pub answers: Vec<AcceptedAnswer>,
    /// Why the first iteration failed, if it did.
    pub error: Option<ApiError>,
}

impl Record {
    pub fn new(id: String, dpi: String, config: SessionConfig) -> Self {
        let created_ms = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_millis() as u64);
        Record {
            id,
            created_ms,
            dpi,
            config,
            session: None,
            job: Some(Job::Start),
            answers: Vec::new(),
            error: None,
        }
    }

    pub fn status(&self) -> &'static str {
        if self.job.is_some() {
            "computing"
        } else if self.error.is_some() {
            "failed"
        } else {
            self.session
                .as_ref()
                .map_or("failed", |s| s.status().name())
        }
    }
}

/// One session: the last published record, plus a lock serialising
/// mutations.
#[derive(Debug)]
pub struct Entry {
    current: RwLock<Arc<Record>>,
    pub mutation: Arc<tokio::sync::Mutex<()>>,
}

impl Entry {
    fn new(record: Record) -> Self {
        Entry {
            current: RwLock::new(Arc::new(record)),
            mutation: Arc::new(tokio::sync::Mutex::new(())),
        }
    }

    pub fn snapshot(&self) -> Arc<Record> {
        self.current.read().expect("snapshot lock").clone()
    }

    pub fn publish(&self, record: Record) {
        *self.current.write().expect("snapshot lock") = Arc::new(record);
    }
}

#[derive(Debug)]
pub struct Store {
    dir: PathBuf,
    sessions: RwLock<HashMap<String, Arc<Entry>>>,
}

impl Store {
    /// Opens `dir`, creating it if needed, and loads every stored session.
    pub fn open(dir: impl Into<PathBuf>) -> io::Result<Store> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        let mut sessions = HashMap::new();
        for entry in fs::read_dir(&dir)? {
            let path = entry?.path();
            if path.extension().is_some_and(|x| x == "json") {
                let record: Record =
                    serde_json::from_str(&fs::read_to_string(&path)?).map_err(|e| {
                        io::Error::new(
                            io::ErrorKind::InvalidData,
                            format!("{}: {e}", path.display()),
                        )
                    })?;
                sessions.insert(record.id.clone(), Arc::new(Entry::new(record)));
            }
        }
        Ok(Store {
            dir,
            sessions: RwLock::new(sessions),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn get(&self, id: &str) -> Option<Arc<Entry>> {
        self.sessions
            .read()
            .expect("session map lock")
            .get(id)
            .cloned()
    }

    pub fn all(&self) -> Vec<Arc<Entry>> {
        self.sessions
            .read()
            .expect("session map lock")
            .values()
            .cloned()
            .collect()
    }

    pub fn insert(&self, record: Record) -> Arc<Entry> {
        let id = record.id.clone();
        let entry = Arc::new(Entry::new(record));
        self.sessions
            .write()
            .expect("session map lock")
            .insert(id, entry.clone());
        entry
    }

    /// Writes `record` to a temporary file and renames it over the old
    /// document.
    pub fn persist(&self, record: &Record) -> io::Result<()> {
        let path = self.dir.join(format!("{}.json", record.id));
        let tmp = self.dir.join(format!("{}.json.tmp", record.id));
        let text = serde_json::to_vec(record).map_err(io::Error::other)?;
        let mut file = fs::File::create(&tmp)?;
        file.write_all(&text)?;
        file.sync_all()?;
        fs::rename(&tmp, &path)
    }
}
