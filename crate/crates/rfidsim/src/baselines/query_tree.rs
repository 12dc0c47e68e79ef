//! Query tree: prefix queries, one bit longer after every collision.

use std::collections::VecDeque;

use crate::channel::{classify_slot, SlotOutcome};
use crate::population::Population;
use crate::result::{BitAccounting, Protocol, RunExtra, RunResult};

/// Runs the memoryless query-tree protocol to completion.
///
/// The reader starts from the empty prefix. Every matching tag answers; a
/// collision enqueues both one-bit extensions, a lone answer identifies the
/// tag, an idle query is simply paid for. Prefix length is bounded by the
/// ID length, so the run always terminates. No randomness is involved: the
/// query sequence is a function of the population alone.
pub fn run_query_tree(population: &Population) -> RunResult {
    let k = population.k();
    let mut pending: VecDeque<Vec<u8>> = VecDeque::new();
    pending.push_back(Vec::new());
    let mut identified = Vec::new();
    let mut queries = 0u64;
    let mut idle_queries = 0u64;
    let mut collision_queries = 0u64;
    let mut bits = BitAccounting::default();

    while let Some(prefix) = pending.pop_front() {
        queries += 1;
        let responders: Vec<_> = population
            .tags()
            .iter()
            .filter(|t| t.has_prefix(&prefix))
            .collect();
        bits.count_query(k, responders.len());
        let sole = (responders.len() == 1).then(|| responders[0].clone());
        match classify_slot(responders.len(), sole) {
            SlotOutcome::Idle => idle_queries += 1,
            SlotOutcome::Single(id) => identified.push(id),
            SlotOutcome::Collision => {
                collision_queries += 1;
                let mut zero = prefix.clone();
                zero.push(0);
                let mut one = prefix;
                one.push(1);
                pending.push_back(zero);
                pending.push_back(one);
            }
        }
    }

    RunResult {
        protocol: Protocol::QueryTree,
        identified,
        query_count: queries,
        trace: None,
        extra: RunExtra::QueryTree {
            idle_queries,
            collision_queries,
        },
        bits,
    }
}
