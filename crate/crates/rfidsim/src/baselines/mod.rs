//! The classical comparison protocols: query tree, framed slotted Aloha,
//! and counter-based binary splitting. All three run on the plain
//! collision/no-collision slotted channel and share the run-result and
//! bit-accounting machinery.

mod aloha;
mod query_tree;
mod splitting;

pub use aloha::{run_framed_slotted_aloha, FsaConfig, FsaMode};
pub use query_tree::run_query_tree;
pub use splitting::run_binary_splitting;

use thiserror::Error;

use crate::result::RunResult;

/// A run that hit its cycle or slot bound with tags still unidentified.
/// Carries everything observed up to the bound.
#[derive(Debug, Error)]
#[error(
    "{} stalled after {} slots: {} of {} tags identified",
    .partial.protocol.label(),
    .partial.query_count,
    .partial.identified.len(),
    .population_size
)]
pub struct Starvation {
    pub partial: RunResult,
    pub population_size: usize,
}
