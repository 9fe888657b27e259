//! Session logs: one JSON object per line.
//!
//! Line 0 is a header carrying the session id, creation time and config;
//! every later line is an [`InteractionRecord`] tagged with the session id.
//! Export of a parsed log reproduces the input byte for byte.

use serde::{Deserialize, Serialize};

use crate::session::{InteractionRecord, Session, SessionConfig};
use crate::world::WorldState;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HeaderLine {
    session_id: String,
    seq: u64,
    created_at: u64,
    config: SessionConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RecordLine {
    session_id: String,
    seq: u64,
    level: String,
    utterance: String,
    start_state: WorldState,
    candidates: Vec<WorldState>,
    selected_index: Option<usize>,
    ts: u64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("log line {line}: {message}")]
pub struct LogError {
    /// 1-based.
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionLog {
    pub session_id: String,
    /// Milliseconds since the Unix epoch.
    pub created_at: u64,
    pub config: SessionConfig,
    pub records: Vec<InteractionRecord>,
}

impl SessionLog {
    pub fn new(session_id: impl Into<String>, created_at: u64, config: SessionConfig) -> Self {
        SessionLog {
            session_id: session_id.into(),
            created_at,
            config,
            records: Vec::new(),
        }
    }

    /// The finished records of `session`; a pending utterance is left out.
    pub fn from_session(session: &Session, created_at: u64) -> Self {
        SessionLog {
            session_id: session.id().to_string(),
            created_at,
            config: session.config().clone(),
            records: session.history().to_vec(),
        }
    }

    pub fn header_line(&self) -> String {
        header_line(&self.session_id, self.created_at, &self.config)
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = self.header_line();
        out.push('\n');
        for r in &self.records {
            out.push_str(&record_line(&self.session_id, r));
            out.push('\n');
        }
        out
    }

    /// Parses a log, checking that ids match and sequence numbers count up
    /// from 1. Blank lines are not allowed.
    pub fn parse(text: &str) -> Result<SessionLog, LogError> {
        let mut lines = text.lines().enumerate();
        let err = |i: usize, message: String| LogError {
            line: i + 1,
            message,
        };
        let (_, first) = lines.next().ok_or_else(|| err(0, "empty log".into()))?;
        let header: HeaderLine =
            serde_json::from_str(first).map_err(|e| err(0, format!("bad header: {e}")))?;
        if header.seq != 0 {
            return Err(err(0, "header must have seq 0".into()));
        }
        header
            .config
            .validate()
            .map_err(|e| err(0, e.to_string()))?;
        let mut records = Vec::new();
        for (i, line) in lines {
            let r: RecordLine =
                serde_json::from_str(line).map_err(|e| err(i, format!("bad record: {e}")))?;
            if r.session_id != header.session_id {
                return Err(err(
                    i,
                    format!("session id {} does not match header", r.session_id),
                ));
            }
            if r.seq != records.len() as u64 + 1 {
                return Err(err(
                    i,
                    format!("expected seq {}, found {}", records.len() + 1, r.seq),
                ));
            }
            if let Some(k) = r.selected_index {
                if k >= r.candidates.len() {
                    return Err(err(i, format!("selected_index {k} out of range")));
                }
            }
            records.push(InteractionRecord {
                seq: r.seq,
                level: r.level,
                utterance: r.utterance,
                start_state: r.start_state,
                candidates: r.candidates,
                selected_index: r.selected_index,
                ts: r.ts,
            });
        }
        Ok(SessionLog {
            session_id: header.session_id,
            created_at: header.created_at,
            config: header.config,
            records,
        })
    }
}

pub fn header_line(session_id: &str, created_at: u64, config: &SessionConfig) -> String {
    serde_json::to_string(&HeaderLine {
        session_id: session_id.to_string(),
        seq: 0,
        created_at,
        config: config.clone(),
    })
    .expect("header serializes")
}

pub fn record_line(session_id: &str, r: &InteractionRecord) -> String {
    serde_json::to_string(&RecordLine {
        session_id: session_id.to_string(),
        seq: r.seq,
        level: r.level.clone(),
        utterance: r.utterance.clone(),
        start_state: r.start_state.clone(),
        candidates: r.candidates.clone(),
        selected_index: r.selected_index,
        ts: r.ts,
    })
    .expect("record serializes")
}
