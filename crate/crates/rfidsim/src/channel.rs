//! The ideal signal-superposition channel and the classical slotted channel.
//!
//! Simultaneous transmissions arrive at the reader as the exact per-position
//! integer sum of the ±1 symbols, with no loss. Four tags sending
//! `011010, 010101, 110001, 011111` are received as `-2 4 0 0 0 2`. The
//! slotted outcome model (idle / single / collision) is what the baseline
//! protocols observe instead.

use std::ops::{Add, Sub};

use crate::tag::{SignalForm, TagId};

/// The reader's observable: per-position sums of superposed ±1 symbols.
///
/// For `n` responders every entry lies in `[-n, n]` and has the parity of
/// `n`. With the prefix bit enabled, the entry at position 0 equals `n`
/// exactly.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AnswerVector {
    values: Vec<i32>,
}

impl AnswerVector {
    pub fn zero(len: usize) -> AnswerVector {
        AnswerVector {
            values: vec![0; len],
        }
    }

    pub fn from_values(values: Vec<i32>) -> AnswerVector {
        AnswerVector { values }
    }

    pub fn values(&self) -> &[i32] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_all_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0)
    }

    /// Largest absolute value present (the pseudocode's `m1`).
    pub fn max_abs(&self) -> i32 {
        self.values.iter().map(|v| v.abs()).max().unwrap_or(0)
    }

    /// The responder count as exposed by the prefix position, when the
    /// prefix bit is in use.
    pub fn responder_count_hint(&self, prefix_enabled: bool) -> Option<i32> {
        if prefix_enabled {
            self.values.first().copied()
        } else {
            None
        }
    }

    /// Renders the entries comma-separated, e.g. `-2,4,0,0,0,2`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&v.to_string());
        }
        out
    }
}

impl Add for &AnswerVector {
    type Output = AnswerVector;

    fn add(self, other: &AnswerVector) -> AnswerVector {
        assert_eq!(self.len(), other.len(), "answer length mismatch");
        AnswerVector {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &AnswerVector {
    type Output = AnswerVector;

    fn sub(self, other: &AnswerVector) -> AnswerVector {
        assert_eq!(self.len(), other.len(), "answer length mismatch");
        AnswerVector {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

/// Sums the signals of all responders position by position. The empty set
/// yields the all-zero vector of the given wire length.
///
/// Panics if responders disagree on length; the population construction
/// rules make mixed lengths impossible in a run.
pub fn superpose<'a, I>(responders: I, len: usize) -> AnswerVector
where
    I: IntoIterator<Item = &'a SignalForm>,
{
    let mut values = vec![0i32; len];
    for signal in responders {
        assert_eq!(signal.len(), len, "mixed signal lengths in superposition");
        for (acc, &s) in values.iter_mut().zip(signal.symbols()) {
            *acc += i32::from(s);
        }
    }
    AnswerVector { values }
}

/// Attempts to read a single tag ID out of an answer.
///
/// With the prefix enabled the criterion is that the prefix position equals
/// 1 (exactly one responder). Without the prefix the criterion is that every
/// entry is ±1; a collision whose sum happens to be all ±1 then sign-decodes
/// as a phantom ID that no tag carries. That false positive is inherent to
/// prefix-off operation and is reproduced here on purpose.
pub fn decode_if_singleton(answer: &AnswerVector, prefix_enabled: bool) -> Option<TagId> {
    let id_values = if prefix_enabled {
        if answer.values.first() != Some(&1) {
            return None;
        }
        &answer.values[1..]
    } else {
        &answer.values[..]
    };
    if id_values.is_empty() || !id_values.iter().all(|&v| v == 1 || v == -1) {
        return None;
    }
    Some(TagId::from_bits(
        id_values.iter().map(|&v| u8::from(v == 1)).collect(),
    ))
}

/// Outcome of one time slot on the classical collision channel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SlotOutcome {
    Idle,
    Single(TagId),
    Collision,
}

impl SlotOutcome {
    pub fn identified(&self) -> Option<&TagId> {
        match self {
            SlotOutcome::Single(id) => Some(id),
            _ => None,
        }
    }
}

/// Maps a responder count onto the slot outcome the reader observes:
/// 0 is idle, 1 identifies the lone transmitter, 2 or more collide.
///
/// Panics when `sole_tag` disagrees with the count; callers always know the
/// transmitting set.
pub fn classify_slot(responder_count: usize, sole_tag: Option<TagId>) -> SlotOutcome {
    match (responder_count, sole_tag) {
        (0, None) => SlotOutcome::Idle,
        (1, Some(id)) => SlotOutcome::Single(id),
        (n, None) if n >= 2 => SlotOutcome::Collision,
        (n, tag) => panic!(
            "inconsistent slot: {} responders with sole_tag {:?}",
            n,
            tag.map(|t| t.to_string())
        ),
    }
}
