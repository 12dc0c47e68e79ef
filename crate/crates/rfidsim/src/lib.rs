//! RFID tag anti-collision simulation.
//!
//! The centerpiece is a splitting identification protocol running over an
//! idealized superposition channel: tags transmit their IDs as ±1 symbol
//! trains, simultaneous answers arrive as exact per-position sums, and the
//! reader recursively splits the colliding set using the structure of those
//! sums. Derived answers make one of each split's two halves free, so a
//! population of N distinct tags is identified with exactly N queries, a
//! system efficiency of 100%.
//!
//! For comparison the crate also simulates the classical baselines on a
//! plain collision/no-collision channel: the memoryless query tree, framed
//! slotted Aloha (fixed and doubling frame sizes), and counter-based binary
//! splitting. A seeded experiment harness runs protocol sweeps on shared
//! populations and writes reproducible CSV or JSON reports; the `rfidsim`
//! binary exposes all of it on the command line.

pub mod baselines;
pub mod channel;
pub mod experiment;
pub mod population;
pub mod protocol_p;
pub mod result;
pub mod tag;

pub use baselines::{
    run_binary_splitting, run_framed_slotted_aloha, run_query_tree, FsaConfig, FsaMode, Starvation,
};
pub use channel::{classify_slot, decode_if_singleton, superpose, AnswerVector, SlotOutcome};
pub use experiment::{
    derive_seed, export_report, run_experiment, ExperimentReport, ExperimentSpec, OutputSpec,
    ReportFormat, ReportRow,
};
pub use population::{
    load_population, parse_population, save_population, Distribution, Population, PopulationError,
    PopulationFileError, PopulationSpec,
};
pub use protocol_p::{
    render_trace, run_protocol_p, select_split, verify_trace, NodeKind, ProtocolError,
    SplitDecision, TraceNode, TreeStats,
};
pub use result::{system_efficiency, BitAccounting, MetricError, Protocol, RunExtra, RunResult};
pub use tag::{wire_len, IdParseError, Mask, SignalForm, TagId};
