//! The game loop: utterance, ranked candidates, selection, update.

use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::curriculum::Level;
use crate::enumerator::{enumerate, rank_candidates, BeamConfig, CandidateList};
use crate::features::{tokenize, Featurizer, Variant, DEFAULT_MAX_DEPTH};
use crate::learner::{softmax, LearnError, LearnerConfig, Model, DEFAULT_ADAGRAD_EPS};
use crate::pragmatics::{PragmaticsConfig, PragmaticsState};
use crate::world::WorldState;

/// Every tunable of a session. Serialized as the header of a session log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SessionConfig {
    pub variant: Variant,
    pub pragmatics: bool,
    /// Per-cell beam width; `None` disables pruning.
    pub beam_width: Option<usize>,
    pub max_size: usize,
    pub max_depth: usize,
    /// Step size; `None` picks the variant's default.
    pub eta: Option<f64>,
    pub l2: f64,
    pub adagrad_eps: f64,
    pub alpha: f64,
    pub beta: f64,
    pub epsilon: f64,
    /// Recorded with the session; the game loop itself draws no random numbers.
    pub seed: u64,
}

impl Default for SessionConfig {
    fn default() -> Self {
        let beam = BeamConfig::default();
        let prag = PragmaticsConfig::default();
        SessionConfig {
            variant: Variant::Full,
            pragmatics: false,
            beam_width: beam.beam_width,
            max_size: beam.max_size,
            max_depth: DEFAULT_MAX_DEPTH,
            eta: None,
            l2: 0.0,
            adagrad_eps: DEFAULT_ADAGRAD_EPS,
            alpha: prag.alpha,
            beta: prag.beta,
            epsilon: prag.epsilon,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid config field `{field}`: {message}")]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

fn check(ok: bool, field: &str, message: &str) -> Result<(), ConfigError> {
    if ok {
        Ok(())
    } else {
        Err(ConfigError {
            field: field.to_string(),
            message: message.to_string(),
        })
    }
}

impl SessionConfig {
    pub fn with_variant(variant: Variant) -> Self {
        SessionConfig {
            variant,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        check(
            self.beam_width.is_none_or(|w| w >= 1),
            "beam_width",
            "must be at least 1",
        )?;
        check(
            (2..=12).contains(&self.max_size),
            "max_size",
            "must be between 2 and 12",
        )?;
        check(self.max_depth <= 8, "max_depth", "must be at most 8")?;
        check(
            self.eta.is_none_or(|e| e.is_finite() && e > 0.0),
            "eta",
            "must be positive",
        )?;
        check(
            self.l2.is_finite() && self.l2 >= 0.0,
            "l2",
            "must be non-negative",
        )?;
        check(
            self.adagrad_eps.is_finite() && self.adagrad_eps > 0.0,
            "adagrad_eps",
            "must be positive",
        )?;
        check(
            self.alpha.is_finite() && self.alpha >= 0.0,
            "alpha",
            "must be non-negative",
        )?;
        check(
            self.beta.is_finite() && self.beta >= 1.0,
            "beta",
            "must be at least 1",
        )?;
        check(
            self.epsilon.is_finite() && self.epsilon > 0.0,
            "epsilon",
            "must be positive",
        )
    }

    /// Validates and fills in the variant-dependent step size.
    pub fn resolved(mut self) -> Result<Self, ConfigError> {
        self.validate()?;
        if self.eta.is_none() {
            self.eta = Some(LearnerConfig::for_variant(self.variant).eta);
        }
        Ok(self)
    }

    pub fn beam(&self) -> BeamConfig {
        BeamConfig {
            max_size: self.max_size,
            beam_width: self.beam_width,
        }
    }

    pub fn learner(&self) -> LearnerConfig {
        LearnerConfig {
            eta: self
                .eta
                .unwrap_or_else(|| LearnerConfig::for_variant(self.variant).eta),
            l2: self.l2,
            adagrad_eps: self.adagrad_eps,
        }
    }

    pub fn pragmatics_config(&self) -> PragmaticsConfig {
        PragmaticsConfig {
            alpha: self.alpha,
            beta: self.beta,
            epsilon: self.epsilon,
        }
    }
}

/// The computer player: a model, optional pragmatic state, and beam
/// settings. Sees utterances and current states only.
#[derive(Debug, Clone, PartialEq)]
pub struct Agent {
    pub model: Model,
    pub prag: Option<PragmaticsState>,
    pub beam: BeamConfig,
}

impl Agent {
    pub fn new(config: &SessionConfig) -> Self {
        let featurizer = Featurizer {
            variant: config.variant,
            max_depth: config.max_depth,
        };
        Agent {
            model: Model::with_config(featurizer, config.learner()),
            prag: config
                .pragmatics
                .then(|| PragmaticsState::new(config.pragmatics_config())),
            beam: config.beam(),
        }
    }

    pub fn candidates<S: AsRef<str>>(&self, tokens: &[S], state: &WorldState) -> CandidateList {
        let z = enumerate(tokens, &self.model, &self.beam).actions();
        rank_candidates(z, state, &self.model, tokens, self.prag.as_ref())
    }

    /// One AdaGrad step toward the forms that produce `label`, then the
    /// pragmatic update with the post-update model.
    pub fn learn<S: AsRef<str>>(
        &mut self,
        tokens: &[S],
        list: &CandidateList,
        label: &WorldState,
    ) -> Result<(), LearnError> {
        let index = list.position(label).ok_or(LearnError::UnreachableLabel)?;
        let consistent = list.consistent_with(index);
        self.model
            .step_with_parts(tokens, &list.beam, &list.parts, &consistent)?;
        if let Some(prag) = &mut self.prag {
            let proj = self.model.project(tokens);
            let literal = softmax(&self.model.scores_from_parts(&proj, &list.parts));
            let mass: f64 = literal
                .iter()
                .zip(&consistent)
                .filter(|(_, &c)| c)
                .map(|(p, _)| p)
                .sum();
            let posterior: Vec<f64> = literal
                .iter()
                .zip(&consistent)
                .map(|(p, &c)| if c { p / mass } else { 0.0 })
                .collect();
            prag.observe(&list.beam_canonical, &literal, &posterior);
        }
        Ok(())
    }
}

/// One utterance and what happened to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionRecord {
    pub seq: u64,
    /// Id of the level being played.
    pub level: String,
    pub utterance: String,
    pub start_state: WorldState,
    /// Denotations in the order shown.
    pub candidates: Vec<WorldState>,
    /// `None` when the player moved on without selecting.
    pub selected_index: Option<usize>,
    /// Milliseconds since the Unix epoch at submission.
    pub ts: u64,
}

impl InteractionRecord {
    pub fn is_labeled(&self) -> bool {
        self.selected_index.is_some()
    }

    pub fn selected_denotation(&self) -> Option<&WorldState> {
        self.selected_index.map(|i| &self.candidates[i])
    }

    pub fn predicted_top(&self) -> Option<&WorldState> {
        self.candidates.first()
    }

    /// Candidates passed over before the selection; 0 for the top item.
    pub fn scrolls(&self) -> Option<usize> {
        self.selected_index
    }

    /// Whether the top prediction was the selected state.
    pub fn correct(&self) -> Option<bool> {
        self.selected_denotation()
            .map(|y| Some(y) == self.predicted_top())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SessionError {
    #[error("no candidate list is pending selection")]
    NoPending,
    #[error("candidate index {index} out of range for {len} candidates")]
    InvalidIndex { index: usize, len: usize },
    #[error("every level is complete")]
    Complete,
    #[error(transparent)]
    Learn(#[from] LearnError),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RestoreError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("record {seq}: {source}")]
    Session { seq: u64, source: SessionError },
    #[error("record {seq}: {field} differs from the recomputed value")]
    Diverged { seq: u64, field: &'static str },
}

#[derive(Debug, Clone)]
struct Pending {
    utterance: String,
    tokens: Vec<String>,
    start_state: WorldState,
    list: CandidateList,
    ts: u64,
}

/// What a selection did to the game.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub record: InteractionRecord,
    pub level_completed: bool,
    pub session_complete: bool,
}

/// One player's game against one computer.
#[derive(Debug, Clone)]
pub struct Session {
    id: String,
    config: SessionConfig,
    agent: Agent,
    curriculum: Vec<Level>,
    level_index: usize,
    state: WorldState,
    history: Vec<InteractionRecord>,
    pending: Option<Pending>,
}

pub fn now_millis() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as u64)
}

impl Session {
    pub fn new(
        id: impl Into<String>,
        config: SessionConfig,
        curriculum: Vec<Level>,
    ) -> Result<Self, ConfigError> {
        let config = config.resolved()?;
        assert!(!curriculum.is_empty(), "curriculum has no levels");
        let state = curriculum[0].start.clone();
        Ok(Session {
            id: id.into(),
            agent: Agent::new(&config),
            config,
            curriculum,
            level_index: 0,
            state,
            history: Vec::new(),
            pending: None,
        })
    }

    /// Rebuilds a session by replaying `records`, checking that every
    /// recomputed candidate list matches the recorded one.
    pub fn restore(
        id: impl Into<String>,
        config: SessionConfig,
        curriculum: Vec<Level>,
        records: &[InteractionRecord],
    ) -> Result<Self, RestoreError> {
        let mut session = Session::new(id, config, curriculum)?;
        for r in records {
            let wrap = |source| RestoreError::Session { seq: r.seq, source };
            session.abandon_pending();
            if session.next_seq() != r.seq {
                return Err(RestoreError::Diverged {
                    seq: r.seq,
                    field: "seq",
                });
            }
            if session.level().map(|l| l.id.as_str()) != Some(r.level.as_str()) {
                return Err(RestoreError::Diverged {
                    seq: r.seq,
                    field: "level",
                });
            }
            if session.state != r.start_state {
                return Err(RestoreError::Diverged {
                    seq: r.seq,
                    field: "start_state",
                });
            }
            let list = session
                .submit_utterance_at(&r.utterance, r.ts)
                .map_err(wrap)?;
            if list.denotations() != r.candidates {
                return Err(RestoreError::Diverged {
                    seq: r.seq,
                    field: "candidates",
                });
            }
            if let Some(i) = r.selected_index {
                session.select_candidate(i).map_err(wrap)?;
            }
        }
        session.abandon_pending();
        Ok(session)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn agent(&self) -> &Agent {
        &self.agent
    }

    pub fn model(&self) -> &Model {
        &self.agent.model
    }

    pub fn pragmatics(&self) -> Option<&PragmaticsState> {
        self.agent.prag.as_ref()
    }

    pub fn curriculum(&self) -> &[Level] {
        &self.curriculum
    }

    pub fn level_index(&self) -> usize {
        self.level_index
    }

    /// The level in play, or `None` once all are done.
    pub fn level(&self) -> Option<&Level> {
        self.curriculum.get(self.level_index)
    }

    pub fn is_complete(&self) -> bool {
        self.level_index >= self.curriculum.len()
    }

    pub fn state(&self) -> &WorldState {
        &self.state
    }

    pub fn history(&self) -> &[InteractionRecord] {
        &self.history
    }

    pub fn pending(&self) -> Option<&CandidateList> {
        self.pending.as_ref().map(|p| &p.list)
    }

    fn next_seq(&self) -> u64 {
        self.history.len() as u64 + 1
    }

    pub fn submit_utterance(&mut self, text: &str) -> Result<&CandidateList, SessionError> {
        self.submit_utterance_at(text, now_millis())
    }

    /// Ranks candidates for `text` on the current state. A list still
    /// pending from an earlier utterance is logged unlabeled first.
    pub fn submit_utterance_at(
        &mut self,
        text: &str,
        ts: u64,
    ) -> Result<&CandidateList, SessionError> {
        if self.is_complete() {
            return Err(SessionError::Complete);
        }
        self.abandon_pending();
        let tokens = tokenize(text);
        let list = self.agent.candidates(&tokens, &self.state);
        assert!(!list.is_empty(), "size-2 actions always exist");
        let pending = self.pending.insert(Pending {
            utterance: text.to_string(),
            tokens,
            start_state: self.state.clone(),
            list,
            ts,
        });
        Ok(&pending.list)
    }

    /// Moves a pending utterance into the history without a label.
    /// Returns the record, if there was one.
    pub fn abandon_pending(&mut self) -> Option<&InteractionRecord> {
        let p = self.pending.take()?;
        let record = self.record(&p, None);
        self.history.push(record);
        self.history.last()
    }

    fn record(&self, p: &Pending, selected_index: Option<usize>) -> InteractionRecord {
        InteractionRecord {
            seq: self.next_seq(),
            level: self.level().map(|l| l.id.clone()).unwrap_or_default(),
            utterance: p.utterance.clone(),
            start_state: p.start_state.clone(),
            candidates: p.list.denotations(),
            selected_index,
            ts: p.ts,
        }
    }

    /// Accepts candidate `index`: updates the model, moves to the chosen
    /// state, and advances the level once the goal is reached.
    pub fn select_candidate(&mut self, index: usize) -> Result<Selection, SessionError> {
        let p = self.pending.as_ref().ok_or(SessionError::NoPending)?;
        let len = p.list.len();
        if index >= len {
            return Err(SessionError::InvalidIndex { index, len });
        }
        let p = self.pending.take().unwrap();
        let label = p.list.entries[index].denotation.clone();
        self.agent.learn(&p.tokens, &p.list, &label)?;
        let record = self.record(&p, Some(index));
        self.history.push(record.clone());

        self.state = label;
        let mut level_completed = false;
        if self.level().is_some_and(|l| l.goal == self.state) {
            level_completed = true;
            self.level_index += 1;
            if let Some(next) = self.level() {
                self.state = next.start.clone();
            }
        }
        Ok(Selection {
            record,
            level_completed,
            session_complete: self.is_complete(),
        })
    }
}
