//! Online accuracy and scroll counts over an interaction history.
//!
//! Only labeled records count. A record is correct when the selected
//! denotation was ranked first, i.e. the model's prediction from the
//! parameters it had before that example's update.

use serde::{Deserialize, Serialize};

use crate::session::InteractionRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("no labeled interactions")]
pub struct EmptyHistory;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// Number of labeled records T.
    pub examples: usize,
    pub online_accuracy: f64,
    pub average_scrolls: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelMetrics {
    pub level: String,
    #[serde(flatten)]
    pub metrics: Metrics,
}

fn labeled(history: &[InteractionRecord]) -> impl Iterator<Item = &InteractionRecord> {
    history.iter().filter(|r| r.is_labeled())
}

pub fn online_accuracy(history: &[InteractionRecord]) -> Result<f64, EmptyHistory> {
    summarize(history).map(|m| m.online_accuracy)
}

pub fn average_scrolls(history: &[InteractionRecord]) -> Result<f64, EmptyHistory> {
    summarize(history).map(|m| m.average_scrolls)
}

pub fn summarize(history: &[InteractionRecord]) -> Result<Metrics, EmptyHistory> {
    let mut t = 0usize;
    let mut correct = 0usize;
    let mut scrolls = 0usize;
    for r in labeled(history) {
        t += 1;
        correct += usize::from(r.correct() == Some(true));
        scrolls += r.scrolls().unwrap_or(0);
    }
    if t == 0 {
        return Err(EmptyHistory);
    }
    Ok(Metrics {
        examples: t,
        online_accuracy: correct as f64 / t as f64,
        average_scrolls: scrolls as f64 / t as f64,
    })
}

/// Metrics per level id, in order of first appearance. Levels with no
/// labeled records are omitted.
pub fn per_level(history: &[InteractionRecord]) -> Vec<LevelMetrics> {
    let mut order: Vec<&str> = Vec::new();
    for r in labeled(history) {
        if !order.contains(&r.level.as_str()) {
            order.push(&r.level);
        }
    }
    order
        .into_iter()
        .map(|level| {
            let records: Vec<InteractionRecord> = labeled(history)
                .filter(|r| r.level == level)
                .cloned()
                .collect();
            LevelMetrics {
                level: level.to_string(),
                metrics: summarize(&records).expect("level has labeled records"),
            }
        })
        .collect()
}
