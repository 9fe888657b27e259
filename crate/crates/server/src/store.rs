//! In-memory sessions backed by append-only journal files.
//!
//! Each session's journal `<id>.jsonl` is its session log: a header line
//! written at creation, then one line per finished interaction, flushed
//! before the request that produced it returns.

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use rand::Rng;
use shrdlurn::log::{header_line, record_line};
use shrdlurn::session::{now_millis, ConfigError, RestoreError};
use shrdlurn::{Level, Session, SessionConfig, SessionLog};
use tokio::sync::Mutex;

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("journal {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("journal {path}: {message}")]
    Corrupt { path: PathBuf, message: String },
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// A live session plus its journal.
#[derive(Debug)]
pub struct Entry {
    pub session: Session,
    pub created_at: u64,
    journal: Option<(PathBuf, File)>,
    /// History records already written.
    journaled: usize,
}

impl Entry {
    /// Appends every finished record not yet in the journal, then flushes.
    pub fn sync_journal(&mut self) -> Result<(), StoreError> {
        let history = self.session.history();
        if let Some((path, file)) = &mut self.journal {
            let io_err = |source| StoreError::Io {
                path: path.clone(),
                source,
            };
            let mut buf = String::new();
            for r in &history[self.journaled..] {
                buf.push_str(&record_line(self.session.id(), r));
                buf.push('\n');
            }
            file.write_all(buf.as_bytes()).map_err(io_err)?;
            file.sync_data().map_err(io_err)?;
        }
        self.journaled = history.len();
        Ok(())
    }

    pub fn log(&self) -> SessionLog {
        SessionLog::from_session(&self.session, self.created_at)
    }
}

pub type SharedEntry = Arc<Mutex<Entry>>;

/// Every session known to the server. Cheap to clone.
#[derive(Debug, Clone)]
pub struct Store {
    sessions: Arc<RwLock<HashMap<String, SharedEntry>>>,
    data_dir: Option<PathBuf>,
    curriculum: Arc<Vec<Level>>,
}

fn new_id() -> String {
    format!("{:032x}", rand::thread_rng().gen::<u128>())
}

fn journal_path(dir: &Path, id: &str) -> PathBuf {
    dir.join(format!("{id}.jsonl"))
}

impl Store {
    /// A store without journals.
    pub fn in_memory(curriculum: Vec<Level>) -> Self {
        Store {
            sessions: Arc::default(),
            data_dir: None,
            curriculum: Arc::new(curriculum),
        }
    }

    /// Opens `dir`, creating it if needed, and rebuilds every session
    /// journaled there by replaying its records.
    pub fn open(dir: impl Into<PathBuf>, curriculum: Vec<Level>) -> Result<Self, StoreError> {
        let dir = dir.into();
        let io_err = |path: &Path| {
            let path = path.to_path_buf();
            move |source| StoreError::Io { path, source }
        };
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        let store = Store {
            sessions: Arc::default(),
            data_dir: Some(dir.clone()),
            curriculum: Arc::new(curriculum),
        };
        let mut paths: Vec<PathBuf> = fs::read_dir(&dir)
            .map_err(io_err(&dir))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
            .collect();
        paths.sort();
        for path in paths {
            let text = fs::read_to_string(&path).map_err(io_err(&path))?;
            let corrupt = |message: String| StoreError::Corrupt {
                path: path.clone(),
                message,
            };
            let log = SessionLog::parse(&text).map_err(|e| corrupt(e.to_string()))?;
            let session = Session::restore(
                log.session_id.clone(),
                log.config.clone(),
                store.curriculum.to_vec(),
                &log.records,
            )
            .map_err(|e: RestoreError| corrupt(e.to_string()))?;
            let file = OpenOptions::new()
                .append(true)
                .open(&path)
                .map_err(io_err(&path))?;
            let entry = Entry {
                journaled: session.history().len(),
                session,
                created_at: log.created_at,
                journal: Some((path, file)),
            };
            store.insert(entry);
        }
        Ok(store)
    }

    fn insert(&self, entry: Entry) -> SharedEntry {
        let id = entry.session.id().to_string();
        let shared = Arc::new(Mutex::new(entry));
        self.sessions
            .write()
            .expect("session map poisoned")
            .insert(id, shared.clone());
        shared
    }

    pub fn curriculum(&self) -> &[Level] {
        &self.curriculum
    }

    pub fn data_dir(&self) -> Option<&Path> {
        self.data_dir.as_deref()
    }

    pub fn get(&self, id: &str) -> Option<SharedEntry> {
        self.sessions
            .read()
            .expect("session map poisoned")
            .get(id)
            .cloned()
    }

    pub fn len(&self) -> usize {
        self.sessions.read().expect("session map poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Creates a session and writes its journal header.
    pub fn create(&self, config: SessionConfig) -> Result<SharedEntry, StoreError> {
        let session = Session::new(new_id(), config, self.curriculum.to_vec())?;
        let created_at = now_millis();
        let journal = match &self.data_dir {
            Some(dir) => {
                let path = journal_path(dir, session.id());
                let io_err = |source| StoreError::Io {
                    path: path.clone(),
                    source,
                };
                let mut file = OpenOptions::new()
                    .create_new(true)
                    .append(true)
                    .open(&path)
                    .map_err(io_err)?;
                let header = header_line(session.id(), created_at, session.config()) + "\n";
                file.write_all(header.as_bytes()).map_err(io_err)?;
                file.sync_data().map_err(io_err)?;
                Some((path, file))
            }
            None => None,
        };
        Ok(self.insert(Entry {
            session,
            created_at,
            journal,
            journaled: 0,
        }))
    }
}
