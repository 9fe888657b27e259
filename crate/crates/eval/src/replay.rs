//! Single-pass replay of a session log through a fresh learner.

use std::time::Instant;

use shrdlurn::{tokenize, Agent, SessionConfig, SessionLog};

use crate::report::Row;

/// Per-record outcome of a replay.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub seq: u64,
    /// Where the labeled state landed in the recomputed list, if present.
    pub rank: Option<usize>,
    /// Length of the recomputed list.
    pub listed: usize,
}

#[derive(Debug, Clone)]
pub struct Replay {
    pub row: Row,
    pub predictions: Vec<Prediction>,
    /// The learner after the last record.
    pub agent: Agent,
}

/// Streams the labeled records of `log` in order. For each one the
/// candidates are ranked with the current parameters before the update on
/// that record. A label missing from the recomputed list counts as a miss,
/// costs the whole list in scrolls, and triggers no update.
pub fn replay(log: &SessionLog, config: &SessionConfig) -> Replay {
    let started = Instant::now();
    let mut agent = Agent::new(config);
    let mut predictions = Vec::new();
    for r in &log.records {
        let Some(label) = r.selected_denotation() else {
            continue;
        };
        let tokens = tokenize(&r.utterance);
        let list = agent.candidates(&tokens, &r.start_state);
        let rank = list.position(label);
        predictions.push(Prediction {
            seq: r.seq,
            rank,
            listed: list.len(),
        });
        if rank.is_some() {
            agent
                .learn(&tokens, &list, label)
                .expect("label is on the list");
        }
    }
    let t = predictions.len();
    let correct = predictions.iter().filter(|p| p.rank == Some(0)).count();
    let scrolls: usize = predictions.iter().map(|p| p.rank.unwrap_or(p.listed)).sum();
    let row = Row {
        variant: config.variant,
        pragmatics: config.pragmatics,
        seed: None,
        examples: t,
        online_accuracy: if t == 0 {
            f64::NAN
        } else {
            correct as f64 / t as f64
        },
        average_scrolls: if t == 0 {
            f64::NAN
        } else {
            scrolls as f64 / t as f64
        },
        wall_ms: started.elapsed().as_millis() as u64,
    };
    Replay {
        row,
        predictions,
        agent,
    }
}
