//! What one identification round reports, and the metrics computed from it.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::protocol_p::TraceNode;
use crate::tag::TagId;

/// The protocols this crate simulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    SuperpositionSplit,
    QueryTree,
    FramedSlottedAloha,
    BinarySplitting,
}

impl Protocol {
    /// Short tag used in CLI flags and report rows.
    pub fn label(&self) -> &'static str {
        match self {
            Protocol::SuperpositionSplit => "p",
            Protocol::QueryTree => "qt",
            Protocol::FramedSlottedAloha => "fsa",
            Protocol::BinarySplitting => "bs",
        }
    }

    pub fn from_label(label: &str) -> Option<Protocol> {
        match label {
            "p" => Some(Protocol::SuperpositionSplit),
            "qt" => Some(Protocol::QueryTree),
            "fsa" => Some(Protocol::FramedSlottedAloha),
            "bs" => Some(Protocol::BinarySplitting),
            _ => None,
        }
    }
}

/// Total bits on the air, both directions. Reader queries are fixed-width
/// ternary masks at 2 bits per position; a tag response costs one bit per
/// transmitted symbol.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitAccounting {
    pub reader_bits: u64,
    pub tag_bits: u64,
}

impl BitAccounting {
    pub fn count_query(&mut self, wire_len: usize, responders: usize) {
        self.reader_bits += 2 * wire_len as u64;
        self.tag_bits += (responders * wire_len) as u64;
    }
}

/// Protocol-specific counters beyond the shared query count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum RunExtra {
    None,
    QueryTree {
        idle_queries: u64,
        collision_queries: u64,
    },
    FramedSlottedAloha {
        cycles: u64,
        final_frame_size: u32,
        idle_slots: u64,
        collision_slots: u64,
    },
    BinarySplitting {
        idle_slots: u64,
        collision_slots: u64,
    },
}

/// Everything recorded about one full identification round.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub protocol: Protocol,
    /// Tags in identification order; no duplicates.
    pub identified: Vec<TagId>,
    /// Queries issued (time slots, for the slotted baselines).
    pub query_count: u64,
    /// Execution tree of the splitting protocol, when retention was on.
    pub trace: Option<TraceNode>,
    pub extra: RunExtra,
    pub bits: BitAccounting,
}

impl RunResult {
    /// Tags identified divided by queries issued; the standard figure of
    /// merit for tag identification rounds.
    pub fn system_efficiency(&self) -> Result<f64, MetricError> {
        system_efficiency(self)
    }

    pub fn bits_transmitted(&self) -> BitAccounting {
        self.bits
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricError {
    #[error("system efficiency is undefined for an empty identification round")]
    Undefined,
}

/// Ratio of identified tags to issued queries, in [0, 1] for complete runs.
/// Undefined when nothing was identified or nothing was asked.
pub fn system_efficiency(result: &RunResult) -> Result<f64, MetricError> {
    if result.identified.is_empty() || result.query_count == 0 {
        return Err(MetricError::Undefined);
    }
    Ok(result.identified.len() as f64 / result.query_count as f64)
}
