//! Size-incremental beam search over the action grammar.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::features::Variant;
use crate::learner::{Model, Projection};
use crate::lf::{Action, Category, LogicalForm, SetExpr};
use crate::world::Color;

pub const DEFAULT_MAX_SIZE: usize = 8;
pub const DEFAULT_BEAM_WIDTH: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BeamConfig {
    pub max_size: usize,
    /// `None` keeps every form.
    pub beam_width: Option<usize>,
}

impl Default for BeamConfig {
    fn default() -> Self {
        BeamConfig {
            max_size: DEFAULT_MAX_SIZE,
            beam_width: Some(DEFAULT_BEAM_WIDTH),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BeamEntry {
    pub lf: LogicalForm,
    pub canonical: String,
    pub score: f64,
    /// Tree-grams rooted at this form's head, indexed by depth. Only
    /// populated for the full variant.
    rooted: Arc<Vec<Vec<String>>>,
}

/// Scored forms per (size, category) cell, each sorted best first.
#[derive(Debug, Clone, Default)]
pub struct Beam {
    cells: BTreeMap<(usize, Category), Vec<BeamEntry>>,
}

impl Beam {
    pub fn cell(&self, size: usize, category: Category) -> &[BeamEntry] {
        self.cells.get(&(size, category)).map_or(&[], Vec::as_slice)
    }

    /// The final beam Z: every action, smallest size first, best first
    /// within a size.
    pub fn actions(&self) -> Vec<LogicalForm> {
        self.cells
            .iter()
            .filter(|((_, cat), _)| *cat == Category::Act)
            .flat_map(|(_, entries)| entries.iter().map(|e| e.lf.clone()))
            .collect()
    }

    /// Human-readable listing of every cell.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for ((size, cat), entries) in &self.cells {
            writeln!(out, "size {size} {cat} ({})", entries.len()).unwrap();
            for e in entries {
                writeln!(out, "  {:>10.4} {}", e.score, e.canonical).unwrap();
            }
        }
        out
    }
}

struct Scorer {
    projection: Projection,
    variant: Variant,
    max_depth: usize,
}

impl Scorer {
    fn entry(&self, lf: LogicalForm, children: &[&BeamEntry]) -> BeamEntry {
        let canonical = lf.canonical();
        match self.variant {
            Variant::Full => {
                // ψ(h,0) = {h}; ψ(h,d) = {(h,i,g) : g ∈ ψ(h.i, d-1)}
                let pred = lf.node().predicate();
                let mut rooted = vec![vec![pred.to_string()]];
                for d in 1..=self.max_depth {
                    let mut level = Vec::new();
                    for (i, child) in children.iter().enumerate() {
                        if let Some(grams) = child.rooted.get(d - 1) {
                            for g in grams {
                                level.push(format!("({pred},{},{g})", i + 1));
                            }
                        }
                    }
                    rooted.push(level);
                }
                let own: f64 = rooted
                    .iter()
                    .flatten()
                    .map(|g| self.projection.weight(&format!("z:{g}")))
                    .sum();
                let score = children.iter().map(|c| c.score).sum::<f64>() + own;
                BeamEntry {
                    lf,
                    canonical,
                    score,
                    rooted: Arc::new(rooted),
                }
            }
            Variant::Half | Variant::Memorize => BeamEntry {
                score: self.projection.weight(&format!("lf:{canonical}")),
                lf,
                canonical,
                rooted: Arc::new(Vec::new()),
            },
        }
    }
}

fn set_of(e: &BeamEntry) -> Arc<SetExpr> {
    match &e.lf {
        LogicalForm::Set(s) => s.clone(),
        _ => unreachable!("set cell holds a non-set"),
    }
}

fn color_of(e: &BeamEntry) -> Color {
    match &e.lf {
        LogicalForm::Color(c) => *c,
        _ => unreachable!("color cell holds a non-color"),
    }
}

fn prune(mut entries: Vec<BeamEntry>, width: Option<usize>) -> Vec<BeamEntry> {
    let mut seen = HashSet::new();
    entries.retain(|e| seen.insert(e.canonical.clone()));
    entries.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.canonical.cmp(&b.canonical))
    });
    if let Some(w) = width {
        entries.truncate(w);
    }
    entries
}

/// Builds forms of size 1..=max_size bottom-up, scoring every partial form
/// with θ·φ(x, ·) and pruning each (size, category) cell to the beam width.
pub fn enumerate<S: AsRef<str>>(tokens: &[S], model: &Model, config: &BeamConfig) -> Beam {
    let scorer = Scorer {
        projection: model.project(tokens),
        variant: model.featurizer.variant,
        max_depth: model.featurizer.max_depth,
    };
    let mut beam = Beam::default();

    for n in 1..=config.max_size {
        let mut sets = Vec::new();
        let mut colors = Vec::new();
        let mut acts = Vec::new();

        if n == 1 {
            sets.push(scorer.entry(SetExpr::All.into(), &[]));
            for c in Color::ALL {
                colors.push(scorer.entry(c.into(), &[]));
            }
        } else {
            for c in beam.cell(n - 1, Category::Color) {
                sets.push(scorer.entry(SetExpr::With(color_of(c)).into(), &[c]));
            }
            for s in beam.cell(n - 1, Category::Set) {
                let inner = set_of(s);
                sets.push(scorer.entry(SetExpr::Not(inner.clone()).into(), &[s]));
                sets.push(scorer.entry(SetExpr::Leftmost(inner.clone()).into(), &[s]));
                sets.push(scorer.entry(SetExpr::Rightmost(inner.clone()).into(), &[s]));
                acts.push(scorer.entry(Action::Remove(inner).into(), &[s]));
            }
            for k in 1..n - 1 {
                for s in beam.cell(k, Category::Set) {
                    for c in beam.cell(n - 1 - k, Category::Color) {
                        let lf = Action::Add(set_of(s), color_of(c)).into();
                        acts.push(scorer.entry(lf, &[s, c]));
                    }
                }
            }
        }

        for (cat, entries) in [
            (Category::Set, sets),
            (Category::Color, colors),
            (Category::Act, acts),
        ] {
            if !entries.is_empty() {
                beam.cells
                    .insert((n, cat), prune(entries, config.beam_width));
            }
        }
    }
    beam
}
