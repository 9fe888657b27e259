//! A blocks-world language game in which a computer learns a player's
//! language from the states the player picks.
//!
//! The player types an utterance; the computer enumerates logical forms,
//! ranks their denotations, and learns from whichever successor state the
//! player selects.

pub mod curriculum;
pub mod enumerator;
pub mod features;
pub mod learner;
pub mod lf;
pub mod log;
pub mod metrics;
pub mod pragmatics;
pub mod session;
pub mod world;

pub use curriculum::{default_curriculum, Level, Planner};
pub use enumerator::{enumerate, rank_candidates, BeamConfig, Candidate, CandidateList};
pub use features::{tokenize, Featurizer, Variant};
pub use learner::{LearnError, Model};
pub use lf::{parse_action, parse_lf, Action, LogicalForm, SetExpr};
pub use log::SessionLog;
pub use metrics::{EmptyHistory, Metrics};
pub use pragmatics::{PragmaticsConfig, PragmaticsState};
pub use session::{Agent, InteractionRecord, Session, SessionConfig, SessionError};
pub use world::{Color, WorldState};
