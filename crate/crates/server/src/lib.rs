//! HTTP front end for game sessions.
//!
//! Sessions live in memory; each is journaled to `<id>.jsonl` in the data
//! directory, and a restarted server rebuilds them by replaying those
//! journals. Commands on one session are serialized by a per-session lock.

pub mod api;
pub mod store;

pub use api::router;
pub use store::{Entry, Store, StoreError};
