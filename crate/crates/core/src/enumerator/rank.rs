//! Groups beam forms by denotation and orders the denotations.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::features::LfParts;
use crate::learner::{softmax, Model};
use crate::lf::LogicalForm;
use crate::pragmatics::PragmaticsState;
use crate::world::WorldState;

/// One distinct successor state offered to the player.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub denotation: WorldState,
    /// Highest-probability form producing this state.
    pub best_lf: LogicalForm,
    pub max_prob: f64,
    /// Every beam form producing this state, in beam order.
    pub support: Vec<LogicalForm>,
}

/// Ranked, deduplicated denotations of a beam, plus the per-form data the
/// learner needs once the player picks one.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateList {
    pub entries: Vec<Candidate>,
    /// The final beam Z.
    pub beam: Vec<LogicalForm>,
    pub beam_canonical: Vec<String>,
    /// p(z|x) for each beam form.
    pub literal: Vec<f64>,
    /// Feature parts of each beam form, kept for the update.
    pub parts: Vec<LfParts>,
    /// Index into `entries` of each beam form's denotation.
    pub beam_candidate: Vec<usize>,
}

impl CandidateList {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn denotations(&self) -> Vec<WorldState> {
        self.entries.iter().map(|c| c.denotation.clone()).collect()
    }

    pub fn position(&self, state: &WorldState) -> Option<usize> {
        self.entries.iter().position(|c| &c.denotation == state)
    }

    /// Which beam forms execute to candidate `index`.
    pub fn consistent_with(&self, index: usize) -> Vec<bool> {
        self.beam_candidate.iter().map(|&c| c == index).collect()
    }
}

/// Executes every beam form on `state`, groups forms by denotation and
/// scores each group by the largest probability of any member: p(z|x), or
/// the normalized pragmatic listener when `pragmatics` is given.
pub fn rank_candidates<S: AsRef<str>>(
    beam: Vec<LogicalForm>,
    state: &WorldState,
    model: &Model,
    tokens: &[S],
    pragmatics: Option<&PragmaticsState>,
) -> CandidateList {
    assert!(!beam.is_empty(), "cannot rank an empty beam");
    let parts: Vec<LfParts> = beam.iter().map(|z| model.featurizer.lf_parts(z)).collect();
    let literal = softmax(&model.scores_from_parts(&model.project(tokens), &parts));
    let canonical: Vec<String> = beam.iter().map(LogicalForm::canonical).collect();
    let ranking_prob = match pragmatics {
        Some(prag) => {
            let l = prag.listener(&canonical, &literal);
            let total: f64 = l.iter().sum();
            if total > 0.0 && total.is_finite() {
                l.into_iter().map(|v| v / total).collect()
            } else {
                literal.clone()
            }
        }
        None => literal.clone(),
    };

    // group in first-seen order, then sort
    let mut groups: Vec<(WorldState, Vec<usize>)> = Vec::new();
    let mut index: HashMap<WorldState, usize> = HashMap::new();
    for (i, z) in beam.iter().enumerate() {
        let act = z.as_action().expect("beam holds only actions");
        let y = act.execute(state);
        match index.get(&y) {
            Some(&g) => groups[g].1.push(i),
            None => {
                index.insert(y.clone(), groups.len());
                groups.push((y, vec![i]));
            }
        }
    }

    let mut scored: Vec<(usize, f64, usize)> = groups
        .iter()
        .enumerate()
        .map(|(g, (_, members))| {
            let best = *members
                .iter()
                .min_by(|&&a, &&b| {
                    ranking_prob[b]
                        .total_cmp(&ranking_prob[a])
                        .then_with(|| canonical[a].cmp(&canonical[b]))
                })
                .unwrap();
            (g, ranking_prob[best], best)
        })
        .collect();
    scored.sort_by(|a, b| {
        b.1.total_cmp(&a.1)
            .then_with(|| canonical[a.2].cmp(&canonical[b.2]))
    });

    let mut beam_candidate = vec![0; beam.len()];
    let entries = scored
        .iter()
        .enumerate()
        .map(|(rank, &(g, max_prob, best))| {
            let (denotation, members) = &groups[g];
            for &m in members {
                beam_candidate[m] = rank;
            }
            Candidate {
                denotation: denotation.clone(),
                best_lf: beam[best].clone(),
                max_prob,
                support: members.iter().map(|&m| beam[m].clone()).collect(),
            }
        })
        .collect();

    CandidateList {
        entries,
        beam,
        beam_canonical: canonical,
        literal,
        parts,
        beam_candidate,
    }
}
