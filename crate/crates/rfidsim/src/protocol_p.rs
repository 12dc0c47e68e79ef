//! The perfect-identification protocol over the superposition channel.
//!
//! The reader broadcasts ternary masks. All matching tags answer at once and
//! the channel delivers the per-position sum. A sum whose prefix position
//! equals 1 is a single tag and is read off directly. Anything larger is
//! split: the reader finds the first position `p2` whose absolute value
//! `m2` is the largest one strictly below the maximum `m1`, constrains `p2`
//! to the sign found there, and queries that half. The other half's answer
//! is obtained for free by subtracting the queried answer from the parent
//! answer, so every internal split costs exactly one query. The execution
//! forms a full binary tree walked depth-first, left (queried) side first;
//! identification order is the tree's leaf order.
//!
//! For `N` distinct tags this takes exactly `N` queries: the tree has
//! `2N-1` nodes, `N` leaves, and `N-1` queried-left edges plus the initial
//! broadcast at the root.

use std::fmt;

use thiserror::Error;

use crate::channel::{decode_if_singleton, superpose, AnswerVector};
use crate::population::Population;
use crate::result::{BitAccounting, Protocol, RunExtra, RunResult};
use crate::tag::{wire_len, Mask, SignalForm, TagId};

/// How a node's answer came to be.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    /// The initial all-wildcard broadcast.
    Root,
    /// Answer obtained by broadcasting the tightened mask.
    QueriedLeft,
    /// Answer derived by subtraction, no broadcast.
    DerivedRight,
}

impl NodeKind {
    pub fn token(&self) -> &'static str {
        match self {
            NodeKind::Root => "root",
            NodeKind::QueriedLeft => "queried-left",
            NodeKind::DerivedRight => "derived-right",
        }
    }
}

/// The reader's choice at a collision answer.
///
/// `m1` is the maximum absolute value and `p1` the first position attaining
/// it. `m2` is the largest absolute value strictly below `m1` (possibly 0),
/// `p2` the first position attaining `m2`, and `s2` the sign of the entry
/// there, with 0 counting as positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitDecision {
    pub m1: i32,
    pub p1: usize,
    pub m2: i32,
    pub p2: usize,
    pub s2: i8,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SplitError {
    #[error("every position ties at the maximum {m1}; colliding tags share one ID")]
    NoSplit { m1: i32 },
}

/// Picks the split position for a collision answer.
///
/// Requires a genuine collision (`max_abs >= 2`). Fails only when every
/// position attains the maximum, which cannot happen for distinct tag IDs.
pub fn select_split(answer: &AnswerVector) -> Result<SplitDecision, SplitError> {
    let m1 = answer.max_abs();
    assert!(m1 >= 2, "split requested on a non-collision answer");
    let p1 = answer
        .values()
        .iter()
        .position(|v| v.abs() == m1)
        .expect("max position exists");
    let m2 = answer
        .values()
        .iter()
        .map(|v| v.abs())
        .filter(|&a| a < m1)
        .max()
        .ok_or(SplitError::NoSplit { m1 })?;
    let p2 = answer
        .values()
        .iter()
        .position(|v| v.abs() == m2)
        .expect("second-max position exists");
    let s2 = if answer.values()[p2] >= 0 { 1 } else { -1 };
    Ok(SplitDecision { m1, p1, m2, p2, s2 })
}

/// One node of the execution tree.
///
/// `mask_snapshot` is the mask in force when this node's answer was
/// obtained. Internal nodes carry the split decision and exactly two
/// children, queried-left first; leaves carry the identified tag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceNode {
    pub kind: NodeKind,
    pub mask_snapshot: Mask,
    pub answer: AnswerVector,
    pub decision: Option<SplitDecision>,
    pub children: Option<Box<(TraceNode, TraceNode)>>,
    pub identified: Option<TagId>,
}

impl TraceNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }

    pub fn children(&self) -> Option<(&TraceNode, &TraceNode)> {
        self.children.as_deref().map(|(l, r)| (l, r))
    }
}

/// Snapshot of the node at which a run had to give up.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeDiagnostic {
    pub kind: NodeKind,
    pub mask: Mask,
    pub answer: AnswerVector,
}

impl fmt::Display for NodeDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} node, mask {}, answer {}",
            self.kind.token(),
            self.mask.render(),
            self.answer.render()
        )
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProtocolError {
    /// The run reached an answer it cannot act on. With distinct IDs and
    /// the prefix bit on this cannot happen; duplicates or prefix-off
    /// operation can get here.
    #[error("channel assumption violated at {node}: {reason}")]
    AssumptionViolation {
        reason: AssumptionFailure,
        node: NodeDiagnostic,
    },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AssumptionFailure {
    #[error("all-zero answer from responding tags (complementary IDs cancel without the prefix bit)")]
    ZeroAnswer,
    #[error("{0}")]
    NoSplit(#[from] SplitError),
    #[error("answer passed the single-tag test but does not sign-decode")]
    UndecodableSingleton,
}

/// Runs one full identification round.
///
/// `record_trace` keeps the execution tree in the result; large-population
/// sweeps can turn it off and keep only the counters. The round is fully
/// deterministic.
pub fn run_protocol_p(
    population: &Population,
    prefix_enabled: bool,
    record_trace: bool,
) -> Result<RunResult, ProtocolError> {
    let wire = wire_len(population.k(), prefix_enabled);
    let signals: Vec<SignalForm> = population
        .tags()
        .iter()
        .map(|t| SignalForm::encode(t, prefix_enabled))
        .collect();
    let mut run = Run {
        signals: &signals,
        prefix_enabled,
        wire,
        mask: Mask::wildcard(wire),
        queries: 0,
        identified: Vec::with_capacity(population.len()),
        bits: BitAccounting::default(),
        record_trace,
    };

    // Initial broadcast: the all-wildcard mask asks every tag for its ID.
    let all: Vec<u32> = (0..population.len() as u32).collect();
    let (answer, responders, _) = run.broadcast(&all);
    if responders.is_empty() {
        // Nothing in range. The query was still spent.
        return Ok(RunResult {
            protocol: Protocol::SuperpositionSplit,
            identified: Vec::new(),
            query_count: run.queries,
            trace: None,
            extra: RunExtra::None,
            bits: run.bits,
        });
    }
    let root = run.check(answer, responders, NodeKind::Root)?;
    Ok(RunResult {
        protocol: Protocol::SuperpositionSplit,
        identified: run.identified,
        query_count: run.queries,
        trace: root,
        extra: RunExtra::None,
        bits: run.bits,
    })
}

struct Run<'a> {
    signals: &'a [SignalForm],
    prefix_enabled: bool,
    wire: usize,
    mask: Mask,
    queries: u64,
    identified: Vec<TagId>,
    bits: BitAccounting,
    record_trace: bool,
}

impl Run<'_> {
    /// Broadcasts the current mask: every candidate tag checks the mask
    /// against its own signal and the matching ones answer simultaneously.
    /// Candidates are the parent's responders; a tag that failed a looser
    /// mask cannot match a tighter one.
    fn broadcast(&mut self, candidates: &[u32]) -> (AnswerVector, Vec<u32>, Vec<u32>) {
        self.queries += 1;
        let (matched, unmatched): (Vec<u32>, Vec<u32>) = candidates
            .iter()
            .partition(|&&i| self.signals[i as usize].matches(&self.mask));
        let answer = superpose(matched.iter().map(|&i| &self.signals[i as usize]), self.wire);
        if self.prefix_enabled {
            debug_assert_eq!(answer.values()[0] as usize, matched.len());
        }
        self.bits.count_query(self.wire, matched.len());
        (answer, matched, unmatched)
    }

    fn is_single_tag(&self, answer: &AnswerVector) -> bool {
        if self.prefix_enabled {
            answer.responder_count_hint(true) == Some(1)
        } else {
            answer.max_abs() == 1
        }
    }

    fn diagnostic(&self, kind: NodeKind, answer: &AnswerVector) -> NodeDiagnostic {
        NodeDiagnostic {
            kind,
            mask: self.mask.clone(),
            answer: answer.clone(),
        }
    }

    fn node(
        &self,
        kind: NodeKind,
        answer: AnswerVector,
        decision: Option<SplitDecision>,
        children: Option<(TraceNode, TraceNode)>,
        identified: Option<TagId>,
    ) -> TraceNode {
        TraceNode {
            kind,
            mask_snapshot: self.mask.clone(),
            answer,
            decision,
            children: children.map(Box::new),
            identified,
        }
    }

    /// The recursive analysis step. `responders` is the set whose
    /// superposition `answer` is; the simulator threads it through to feed
    /// later broadcasts, the reader itself only ever sees `answer`.
    fn check(
        &mut self,
        answer: AnswerVector,
        responders: Vec<u32>,
        kind: NodeKind,
    ) -> Result<Option<TraceNode>, ProtocolError> {
        if self.is_single_tag(&answer) {
            let id = match decode_if_singleton(&answer, self.prefix_enabled) {
                Some(id) => id,
                None => {
                    return Err(ProtocolError::AssumptionViolation {
                        reason: AssumptionFailure::UndecodableSingleton,
                        node: self.diagnostic(kind, &answer),
                    });
                }
            };
            self.identified.push(id.clone());
            return Ok(self
                .record_trace
                .then(|| self.node(kind, answer, None, None, Some(id))));
        }
        if answer.is_all_zero() {
            // Responders are present (the empty case never reaches check),
            // yet their signals cancelled completely.
            return Err(ProtocolError::AssumptionViolation {
                reason: AssumptionFailure::ZeroAnswer,
                node: self.diagnostic(kind, &answer),
            });
        }
        let decision =
            select_split(&answer).map_err(|e| ProtocolError::AssumptionViolation {
                reason: AssumptionFailure::NoSplit(e),
                node: self.diagnostic(kind, &answer),
            })?;
        let mask_snapshot = self.record_trace.then(|| self.mask.clone());

        // Query the tags carrying s2 at p2.
        self.mask.set(decision.p2, decision.s2);
        let (new_answer, left_responders, rest) = self.broadcast(&responders);
        debug_assert!(!left_responders.is_empty() && !rest.is_empty());
        let left = self.check(new_answer.clone(), left_responders, NodeKind::QueriedLeft)?;

        // The complement holds -s2 at p2; its answer costs no query.
        self.mask.set(decision.p2, -decision.s2);
        let derived = &answer - &new_answer;
        let right = self.check(derived, rest, NodeKind::DerivedRight)?;

        self.mask.clear(decision.p2);
        Ok(match (left, right) {
            (Some(l), Some(r)) => Some(TraceNode {
                kind,
                mask_snapshot: mask_snapshot.expect("snapshot recorded with trace on"),
                answer,
                decision: Some(decision),
                children: Some(Box::new((l, r))),
                identified: None,
            }),
            _ => None,
        })
    }
}

/// Shape summary of an execution tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeStats {
    pub nodes: usize,
    pub leaves: usize,
    pub internal: usize,
    pub max_depth: usize,
    pub queried_left_count: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TraceError {
    #[error("node {path}: leaf without an identified tag")]
    LeafWithoutTag { path: String },
    #[error("node {path}: internal node carries an identified tag")]
    InternalWithTag { path: String },
    #[error("node {path}: internal node has no split decision")]
    MissingDecision { path: String },
    #[error("node {path}: expected kind {expected:?}, found {found:?}")]
    WrongKind {
        path: String,
        expected: NodeKind,
        found: NodeKind,
    },
    #[error("tree has {nodes} nodes for {n} tags, expected {expected}")]
    NodeCount {
        nodes: usize,
        n: usize,
        expected: usize,
    },
    #[error("tree has {leaves} leaves for {n} tags")]
    LeafCount { leaves: usize, n: usize },
    #[error("tree has {queried} queried-left nodes for {n} tags, expected {expected}")]
    QueriedLeftCount {
        queried: usize,
        n: usize,
        expected: usize,
    },
}

/// Checks the full-binary-tree shape of a completed run against the tag
/// count: `2N-1` nodes, `N` leaves, `N-1` queried-left edges. The walk is
/// depth-first so the first offending node is reported.
pub fn verify_trace(trace: &TraceNode, n: usize) -> Result<TreeStats, TraceError> {
    let mut stats = TreeStats {
        nodes: 0,
        leaves: 0,
        internal: 0,
        max_depth: 0,
        queried_left_count: 0,
    };
    if trace.kind != NodeKind::Root {
        return Err(TraceError::WrongKind {
            path: "root".into(),
            expected: NodeKind::Root,
            found: trace.kind,
        });
    }
    walk(trace, "root".to_string(), 0, &mut stats)?;
    if stats.nodes != 2 * n - 1 {
        return Err(TraceError::NodeCount {
            nodes: stats.nodes,
            n,
            expected: 2 * n - 1,
        });
    }
    if stats.leaves != n {
        return Err(TraceError::LeafCount {
            leaves: stats.leaves,
            n,
        });
    }
    if stats.queried_left_count != n - 1 {
        return Err(TraceError::QueriedLeftCount {
            queried: stats.queried_left_count,
            n,
            expected: n - 1,
        });
    }
    Ok(stats)
}

fn walk(
    node: &TraceNode,
    path: String,
    depth: usize,
    stats: &mut TreeStats,
) -> Result<(), TraceError> {
    stats.nodes += 1;
    stats.max_depth = stats.max_depth.max(depth);
    if node.kind == NodeKind::QueriedLeft {
        stats.queried_left_count += 1;
    }
    match node.children() {
        None => {
            stats.leaves += 1;
            if node.identified.is_none() {
                return Err(TraceError::LeafWithoutTag { path });
            }
        }
        Some((left, right)) => {
            stats.internal += 1;
            if node.identified.is_some() {
                return Err(TraceError::InternalWithTag { path });
            }
            if node.decision.is_none() {
                return Err(TraceError::MissingDecision { path });
            }
            if left.kind != NodeKind::QueriedLeft {
                return Err(TraceError::WrongKind {
                    path: format!("{path}.L"),
                    expected: NodeKind::QueriedLeft,
                    found: left.kind,
                });
            }
            if right.kind != NodeKind::DerivedRight {
                return Err(TraceError::WrongKind {
                    path: format!("{path}.R"),
                    expected: NodeKind::DerivedRight,
                    found: right.kind,
                });
            }
            walk(left, format!("{path}.L"), depth + 1, stats)?;
            walk(right, format!("{path}.R"), depth + 1, stats)?;
        }
    }
    Ok(())
}

/// Serializes a trace one node per line, pre-order:
/// `depth kind mask answer identified-or-dash`. The output is byte-stable
/// across runs on the same population.
pub fn render_trace(root: &TraceNode) -> String {
    let mut out = String::new();
    render_node(root, 0, &mut out);
    out
}

fn render_node(node: &TraceNode, depth: usize, out: &mut String) {
    out.push_str(&format!(
        "{} {} {} {} {}\n",
        depth,
        node.kind.token(),
        node.mask_snapshot.render(),
        node.answer.render(),
        node.identified
            .as_ref()
            .map(|id| id.to_string())
            .unwrap_or_else(|| "-".to_string()),
    ));
    if let Some((left, right)) = node.children() {
        render_node(left, depth + 1, out);
        render_node(right, depth + 1, out);
    }
}
