//! Candidate generation: beam search over logical forms, then ranking of
//! their denotations.

mod beam;
mod rank;

pub use beam::{enumerate, Beam, BeamConfig, BeamEntry, DEFAULT_BEAM_WIDTH, DEFAULT_MAX_SIZE};
pub use rank::{rank_candidates, Candidate, CandidateList};
