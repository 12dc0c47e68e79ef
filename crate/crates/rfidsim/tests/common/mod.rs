//! Independent oracle used by the integration suites.
//!
//! Everything here recomputes answers from first principles on plain bit
//! strings: its own symbol encoding, its own mask matcher, and its own
//! depth-first execution of the splitting rules, scanning the whole
//! population at every broadcast. It shares no code path with the library
//! internals it checks.

#![allow(dead_code)]

use rfidsim::protocol_p::TraceNode;

/// The ±1 symbol a tag transmits at a wire position.
fn symbol(id: &str, pos: usize, prefix: bool) -> i64 {
    let bit = if prefix {
        if pos == 0 {
            return 1;
        }
        id.as_bytes()[pos - 1]
    } else {
        id.as_bytes()[pos]
    };
    if bit == b'1' {
        1
    } else {
        -1
    }
}

/// Mask matching over the rendered alphabet `{+, -, .}`.
fn matches(id: &str, mask: &str, prefix: bool) -> bool {
    mask.bytes().enumerate().all(|(pos, cell)| match cell {
        b'.' => true,
        b'+' => symbol(id, pos, prefix) == 1,
        b'-' => symbol(id, pos, prefix) == -1,
        other => panic!("bad mask cell {other}"),
    })
}

/// Brute-force superposition of every population member matching the mask.
pub fn oracle_superpose(ids: &[String], mask: &str, prefix: bool) -> Vec<i64> {
    let mut sum = vec![0i64; mask.len()];
    for id in ids {
        if matches(id, mask, prefix) {
            for (pos, acc) in sum.iter_mut().enumerate() {
                *acc += symbol(id, pos, prefix);
            }
        }
    }
    sum
}

pub struct OracleOutcome {
    pub queries: u64,
    pub identified: Vec<String>,
    pub nodes: usize,
}

/// Independent depth-first execution of the splitting protocol, following
/// the reader rules literally and recomputing each broadcast's answer from
/// the full population.
pub fn oracle_run(ids: &[String], prefix: bool) -> OracleOutcome {
    let k = ids.first().map(|s| s.len()).unwrap_or(1);
    let wire = if prefix { k + 1 } else { k };
    let mut oracle = Oracle {
        ids,
        prefix,
        mask: vec![b'.'; wire],
        queries: 1,
        identified: Vec::new(),
        nodes: 0,
    };
    let answer = oracle.broadcast();
    if answer.iter().all(|&v| v == 0) && ids.is_empty() {
        return OracleOutcome {
            queries: 1,
            identified: Vec::new(),
            nodes: 0,
        };
    }
    oracle.check(answer);
    OracleOutcome {
        queries: oracle.queries,
        identified: oracle.identified,
        nodes: oracle.nodes,
    }
}

struct Oracle<'a> {
    ids: &'a [String],
    prefix: bool,
    mask: Vec<u8>,
    queries: u64,
    identified: Vec<String>,
    nodes: usize,
}

impl Oracle<'_> {
    fn broadcast(&self) -> Vec<i64> {
        let mask = std::str::from_utf8(&self.mask).unwrap();
        oracle_superpose(self.ids, mask, self.prefix)
    }

    fn check(&mut self, answer: Vec<i64>) {
        self.nodes += 1;
        let m1 = answer.iter().map(|v| v.abs()).max().unwrap();
        if m1 == 1 {
            let id_part = if self.prefix { &answer[1..] } else { &answer[..] };
            let decoded: String = id_part
                .iter()
                .map(|&v| if v > 0 { '1' } else { '0' })
                .collect();
            self.identified.push(decoded);
            return;
        }
        if m1 > 1 {
            let m2 = answer
                .iter()
                .map(|v| v.abs())
                .filter(|&a| a < m1)
                .max()
                .expect("distinct IDs leave a splittable position");
            let p2 = answer.iter().position(|v| v.abs() == m2).unwrap();
            let s2 = if answer[p2] >= 0 { b'+' } else { b'-' };
            self.mask[p2] = s2;
            self.queries += 1;
            let new_answer = self.broadcast();
            self.check(new_answer.clone());
            self.mask[p2] = if s2 == b'+' { b'-' } else { b'+' };
            let derived: Vec<i64> = answer
                .iter()
                .zip(&new_answer)
                .map(|(a, b)| a - b)
                .collect();
            self.check(derived);
            self.mask[p2] = b'.';
        }
    }
}

/// Pre-order collection of an execution tree's nodes.
pub fn collect_nodes(root: &TraceNode) -> Vec<&TraceNode> {
    let mut out = Vec::new();
    fn walk<'t>(node: &'t TraceNode, out: &mut Vec<&'t TraceNode>) {
        out.push(node);
        if let Some((left, right)) = node.children() {
            walk(left, out);
            walk(right, out);
        }
    }
    walk(root, &mut out);
    out
}

/// Bit strings for a population, in population order.
pub fn id_strings(population: &rfidsim::Population) -> Vec<String> {
    population.tags().iter().map(|t| t.to_string()).collect()
}
