//! Synthetic-teacher experiments over a grid of model settings.

use std::thread;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use shrdlurn::curriculum::random_curriculum;
use shrdlurn::{metrics, Session, SessionConfig, Variant};

use crate::report::{Report, Row};
use crate::teacher::{PlanCache, SyntheticTeacher, TeachError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    /// Probability of the preferred word for each predicate.
    pub rho: f64,
    pub seeds: Vec<u64>,
    /// Labeled interactions per run.
    pub interactions: usize,
    pub variants: Vec<Variant>,
    pub pragmatics: Vec<bool>,
    /// Settings shared by every run; variant and pragmatics are overridden.
    pub base: SessionConfig,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            rho: 1.0,
            seeds: (1..=5).collect(),
            interactions: 200,
            variants: Variant::ALL.to_vec(),
            pragmatics: vec![false, true],
            base: SessionConfig::default(),
        }
    }
}

/// One finished run.
#[derive(Debug)]
pub struct Run {
    pub row: Row,
    pub session: Session,
    /// Turns where the intended state was missing from the list.
    pub fallbacks: usize,
    /// The teacher gave up on a level and the run ended early.
    pub stuck: Option<String>,
}

/// Turns a teacher may spend on one level before giving up.
pub const MAX_TURNS_PER_LEVEL: usize = 8;

fn play(
    config: SessionConfig,
    seed: u64,
    rho: f64,
    interactions: usize,
    plans: &mut PlanCache,
) -> Result<Run, TeachError> {
    let started = Instant::now();
    // every level takes at least one interaction
    let per_tier = interactions.div_ceil(5);
    let curriculum = random_curriculum(seed, per_tier);
    let mut session = Session::new(format!("synth-{seed}"), config, curriculum)
        .expect("synthetic config is valid");
    let mut teacher = SyntheticTeacher::new(seed, rho);
    let mut fallbacks = 0;
    let mut labeled = 0;
    let mut stuck = None;
    let mut level_turns = (usize::MAX, 0);
    while labeled < interactions && !session.is_complete() {
        let level = session.level_index();
        level_turns = if level_turns.0 == level {
            (level, level_turns.1 + 1)
        } else {
            (level, 1)
        };
        let id = &session.curriculum()[level].id;
        if level_turns.1 > MAX_TURNS_PER_LEVEL {
            stuck = Some(id.clone());
            break;
        }
        match teacher.play_turn(&mut session, plans) {
            Ok(turn) => {
                fallbacks += usize::from(turn.fallback);
                labeled += 1;
            }
            Err(TeachError::Stuck(id)) => {
                stuck = Some(id);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let m = metrics::summarize(session.history()).expect("at least one interaction");
    let row = Row {
        variant: session.config().variant,
        pragmatics: session.config().pragmatics,
        seed: Some(seed),
        examples: m.examples,
        online_accuracy: m.online_accuracy,
        average_scrolls: m.average_scrolls,
        wall_ms: started.elapsed().as_millis() as u64,
    };
    Ok(Run {
        row,
        session,
        fallbacks,
        stuck,
    })
}

/// Plays one run per (seed, variant, pragmatics) cell. Seeds run on
/// separate threads; within a seed the cells share a plan cache, since the
/// teacher's intended states do not depend on the model.
pub fn run_synthetic(config: &SynthConfig) -> Result<(Report, Vec<Run>), TeachError> {
    assert!((0.0..=1.0).contains(&config.rho), "rho must lie in [0, 1]");
    let per_seed: Vec<Result<Vec<Run>, TeachError>> = thread::scope(|scope| {
        let handles: Vec<_> = config
            .seeds
            .iter()
            .map(|&seed| {
                scope.spawn(move || {
                    let mut plans = PlanCache::default();
                    let mut runs = Vec::new();
                    for &variant in &config.variants {
                        for &pragmatics in &config.pragmatics {
                            let cfg = SessionConfig {
                                variant,
                                pragmatics,
                                ..config.base.clone()
                            };
                            runs.push(play(
                                cfg,
                                seed,
                                config.rho,
                                config.interactions,
                                &mut plans,
                            )?);
                        }
                    }
                    Ok(runs)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("run panicked"))
            .collect()
    });
    let mut runs = Vec::new();
    for r in per_seed {
        runs.extend(r?);
    }
    // report order: grid cell, then seed
    let mut report = Report::default();
    for &variant in &config.variants {
        for &pragmatics in &config.pragmatics {
            for run in &runs {
                if run.row.variant == variant && run.row.pragmatics == pragmatics {
                    report.rows.push(run.row.clone());
                }
            }
        }
    }
    report.add_means();
    Ok((report, runs))
}
