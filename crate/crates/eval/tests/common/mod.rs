use shrdlurn::{SessionLog, Variant};
use shrdlurn_eval::{run_synthetic, SynthConfig};

/// A short synthetic session exported as a log.
pub fn synthetic_log(seed: u64, interactions: usize, pragmatics: bool) -> SessionLog {
    let config = SynthConfig {
        seeds: vec![seed],
        interactions,
        variants: vec![Variant::Full],
        pragmatics: vec![pragmatics],
        ..SynthConfig::default()
    };
    let (_, runs) = run_synthetic(&config).unwrap();
    SessionLog::from_session(&runs[0].session, 1_700_000_000_000)
}
