//! Offline evaluation: replaying session logs through learner variants and
//! running synthetic-teacher games.

pub mod replay;
pub mod report;
pub mod synth;
pub mod teacher;

pub use replay::{replay, Prediction, Replay};
pub use report::{Report, Row};
pub use synth::{run_synthetic, Run, SynthConfig};
pub use teacher::{PlanCache, SyntheticTeacher, TeachError};
