//! Result rows and their text and JSON renderings.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use shrdlurn::Variant;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Row {
    pub variant: Variant,
    pub pragmatics: bool,
    /// `None` for replays and for rows averaged over seeds.
    pub seed: Option<u64>,
    pub examples: usize,
    pub online_accuracy: f64,
    pub average_scrolls: f64,
    /// Excluded from equality.
    pub wall_ms: u64,
}

impl PartialEq for Row {
    fn eq(&self, other: &Self) -> bool {
        self.variant == other.variant
            && self.pragmatics == other.pragmatics
            && self.seed == other.seed
            && self.examples == other.examples
            && self.online_accuracy.to_bits() == other.online_accuracy.to_bits()
            && self.average_scrolls.to_bits() == other.average_scrolls.to_bits()
    }
}

impl Row {
    pub fn label(&self) -> String {
        if self.pragmatics {
            format!("{}+prag", self.variant)
        } else {
            self.variant.to_string()
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub rows: Vec<Row>,
}

impl Report {
    pub fn find(&self, variant: Variant, pragmatics: bool) -> Option<&Row> {
        self.rows
            .iter()
            .find(|r| r.variant == variant && r.pragmatics == pragmatics && r.seed.is_none())
    }

    /// Appends one averaged row per (variant, pragmatics) pair, in first
    /// appearance order, over the per-seed rows already present.
    pub fn add_means(&mut self) {
        let mut keys: Vec<(Variant, bool)> = Vec::new();
        for r in &self.rows {
            if r.seed.is_some() && !keys.contains(&(r.variant, r.pragmatics)) {
                keys.push((r.variant, r.pragmatics));
            }
        }
        for (variant, pragmatics) in keys {
            let cell: Vec<&Row> = self
                .rows
                .iter()
                .filter(|r| r.seed.is_some() && r.variant == variant && r.pragmatics == pragmatics)
                .collect();
            let n = cell.len() as f64;
            let mean = Row {
                variant,
                pragmatics,
                seed: None,
                examples: cell.iter().map(|r| r.examples).sum(),
                online_accuracy: cell.iter().map(|r| r.online_accuracy).sum::<f64>() / n,
                average_scrolls: cell.iter().map(|r| r.average_scrolls).sum::<f64>() / n,
                wall_ms: cell.iter().map(|r| r.wall_ms).sum(),
            };
            self.rows.push(mean);
        }
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "{:<14} {:>6} {:>8} {:>10} {:>9} {:>9}",
            "setting", "seed", "T", "accuracy", "scrolls", "ms"
        )
        .unwrap();
        for r in &self.rows {
            let seed = r.seed.map_or("mean".to_string(), |s| s.to_string());
            writeln!(
                out,
                "{:<14} {:>6} {:>8} {:>10.4} {:>9.3} {:>9}",
                r.label(),
                seed,
                r.examples,
                r.online_accuracy,
                r.average_scrolls,
                r.wall_ms
            )
            .unwrap();
        }
        out
    }

    pub fn to_jsonl(&self) -> String {
        self.rows
            .iter()
            .map(|r| serde_json::to_string(r).expect("row serializes") + "\n")
            .collect()
    }
}
