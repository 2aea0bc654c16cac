//! Secure network-coding and secure index-coding instances.
//!
//! Instances are plain immutable data: a directed acyclic graph with
//! per-edge alphabets plus a connection requirement and an eavesdropping
//! pattern on the network side, and messages/receivers/eavesdroppers plus
//! a broadcast alphabet on the index side. Validation reports violations
//! as data rather than failing; every other module assumes a validated
//! instance.

use std::collections::{BTreeMap, BTreeSet};

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// A finite symbol alphabet `{0, 1, ..., size-1}`.
///
/// Rates are never stored: the rate of a variable with alphabet size `m`
/// at block size `n` is `log2(m) / n`, see [`Alphabet::rate_bits`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Alphabet {
    size: u64,
}

impl Alphabet {
    /// The one-symbol alphabet (carries no information).
    pub const TRIVIAL: Alphabet = Alphabet { size: 1 };

    /// Creates an alphabet with `size` symbols. Panics if `size == 0`.
    pub fn new(size: u64) -> Alphabet {
        assert!(size >= 1, "alphabet size must be positive");
        Alphabet { size }
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    /// Whether a symbol value is valid for this alphabet.
    pub fn contains(&self, symbol: u64) -> bool {
        symbol < self.size
    }

    /// Rate in bits per block symbol: `log2(size) / n`.
    pub fn rate_bits(&self, block_size_n: u32) -> f64 {
        (self.size as f64).log2() / f64::from(block_size_n)
    }
}

impl Serialize for Alphabet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(self.size)
    }
}

impl<'de> Deserialize<'de> for Alphabet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let size = u64::deserialize(d)?;
        if size == 0 {
            return Err(D::Error::custom("alphabet size must be positive"));
        }
        Ok(Alphabet { size })
    }
}

/// A directed edge with its symbol alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub id: String,
    pub tail: String,
    pub head: String,
    pub alphabet: Alphabet,
}

/// A source message: where it originates and which nodes demand it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Source {
    pub id: String,
    pub origin: String,
    pub alphabet: Alphabet,
    pub destinations: BTreeSet<String>,
}

/// One wiretapper: the edges it observes and the sources it targets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkEavesdropper {
    pub id: String,
    pub tapped_edges: BTreeSet<String>,
    pub target_sources: BTreeSet<String>,
}

/// A secure network-coding instance: DAG, connection requirement,
/// eavesdropping pattern.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkInstance {
    pub block_size_n: u32,
    pub nodes: Vec<String>,
    pub edges: Vec<Edge>,
    pub sources: Vec<Source>,
    pub eavesdroppers: Vec<NetworkEavesdropper>,
}

/// A broadcast message available at the sender.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub id: String,
    pub alphabet: Alphabet,
}

/// An index-coding receiver: what it wants and what it already has.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Receiver {
    pub id: String,
    pub wants: BTreeSet<String>,
    pub has: BTreeSet<String>,
}

/// An index-coding eavesdropper: it sees the broadcast plus its side
/// information and targets a set of messages.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexEavesdropper {
    pub id: String,
    pub side_info: BTreeSet<String>,
    pub target_messages: BTreeSet<String>,
}

/// A secure index-coding instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexInstance {
    pub block_size_n: u32,
    pub broadcast_alphabet: Alphabet,
    pub messages: Vec<Message>,
    pub receivers: Vec<Receiver>,
    pub eavesdroppers: Vec<IndexEavesdropper>,
}

/// Outcome of instance validation. Violations are data, not faults.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_ok() {
            write!(f, "ok")
        } else {
            for (i, v) in self.violations.iter().enumerate() {
                if i > 0 {
                    writeln!(f)?;
                }
                write!(f, "violation: {v}")?;
            }
            Ok(())
        }
    }
}

/// The graph contains a directed cycle.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("graph contains a cycle")]
pub struct CycleError;

impl NetworkInstance {
    pub fn edge(&self, id: &str) -> Option<&Edge> {
        self.edges.iter().find(|e| e.id == id)
    }

    pub fn source(&self, id: &str) -> Option<&Source> {
        self.sources.iter().find(|s| s.id == id)
    }

    pub fn has_node(&self, id: &str) -> bool {
        self.nodes.iter().any(|n| n == id)
    }

    /// Edges into `node`, sorted by edge id.
    pub fn in_edges(&self, node: &str) -> Vec<&Edge> {
        let mut v: Vec<&Edge> = self.edges.iter().filter(|e| e.head == node).collect();
        v.sort_by(|a, b| a.id.cmp(&b.id));
        v
    }

    /// Edges out of `node`, sorted by edge id.
    pub fn out_edges(&self, node: &str) -> Vec<&Edge> {
        let mut v: Vec<&Edge> = self.edges.iter().filter(|e| e.tail == node).collect();
        v.sort_by(|a, b| a.id.cmp(&b.id));
        v
    }

    /// Sources originating at `node`, sorted by source id.
    pub fn sources_at(&self, node: &str) -> Vec<&Source> {
        let mut v: Vec<&Source> = self.sources.iter().filter(|s| s.origin == node).collect();
        v.sort_by(|a, b| a.id.cmp(&b.id));
        v
    }

    /// Sources that `node` must decode, sorted by source id.
    pub fn required_sources(&self, node: &str) -> Vec<&Source> {
        let mut v: Vec<&Source> = self
            .sources
            .iter()
            .filter(|s| s.destinations.contains(node))
            .collect();
        v.sort_by(|a, b| a.id.cmp(&b.id));
        v
    }

    pub fn is_destination(&self, node: &str) -> bool {
        self.sources.iter().any(|s| s.destinations.contains(node))
    }

    /// Destination nodes in instance node order.
    pub fn destination_nodes(&self) -> Vec<&str> {
        self.nodes
            .iter()
            .filter(|n| self.is_destination(n))
            .map(|n| n.as_str())
            .collect()
    }
}

impl IndexInstance {
    pub fn message(&self, id: &str) -> Option<&Message> {
        self.messages.iter().find(|m| m.id == id)
    }

    pub fn receiver(&self, id: &str) -> Option<&Receiver> {
        self.receivers.iter().find(|r| r.id == id)
    }

    /// All messages sorted by message id.
    pub fn messages_sorted(&self) -> Vec<&Message> {
        let mut v: Vec<&Message> = self.messages.iter().collect();
        v.sort_by(|a, b| a.id.cmp(&b.id));
        v
    }
}

fn check_unique<'a>(kind: &str, ids: impl Iterator<Item = &'a str>, out: &mut Vec<String>) {
    let mut seen = BTreeSet::new();
    for id in ids {
        if !seen.insert(id) {
            out.push(format!("duplicate {kind} id {id}"));
        }
    }
}

/// Checks every well-formedness invariant of a network instance.
pub fn validate_network(instance: &NetworkInstance) -> ValidationReport {
    let mut v = Vec::new();
    if instance.block_size_n == 0 {
        v.push("block_size_n must be positive".to_string());
    }
    if instance.nodes.is_empty() {
        v.push("instance has no nodes".to_string());
    }
    check_unique("node", instance.nodes.iter().map(|n| n.as_str()), &mut v);
    check_unique("edge", instance.edges.iter().map(|e| e.id.as_str()), &mut v);
    check_unique(
        "source",
        instance.sources.iter().map(|s| s.id.as_str()),
        &mut v,
    );
    check_unique(
        "eavesdropper",
        instance.eavesdroppers.iter().map(|e| e.id.as_str()),
        &mut v,
    );

    for e in &instance.edges {
        if !instance.has_node(&e.tail) {
            v.push(format!("edge {}: unknown tail node {}", e.id, e.tail));
        }
        if !instance.has_node(&e.head) {
            v.push(format!("edge {}: unknown head node {}", e.id, e.head));
        }
        if e.tail == e.head {
            v.push(format!("edge {}: self-loop at node {}", e.id, e.tail));
        }
    }
    for s in &instance.sources {
        if !instance.has_node(&s.origin) {
            v.push(format!("source {}: unknown origin node {}", s.id, s.origin));
        }
        for d in &s.destinations {
            if !instance.has_node(d) {
                v.push(format!("source {}: unknown destination node {d}", s.id));
            }
        }
        if s.destinations.contains(&s.origin) {
            v.push(format!(
                "source {}: destined for its own origin node {}",
                s.id, s.origin
            ));
        }
    }
    for eav in &instance.eavesdroppers {
        for t in &eav.tapped_edges {
            if instance.edge(t).is_none() {
                v.push(format!("eavesdropper {}: unknown edge {t}", eav.id));
            }
        }
        for t in &eav.target_sources {
            if instance.source(t).is_none() {
                v.push(format!("eavesdropper {}: unknown source {t}", eav.id));
            }
        }
    }

    // Standing assumption: no-incoming nodes originate, no-outgoing nodes demand.
    let heads: BTreeSet<&str> = instance.edges.iter().map(|e| e.head.as_str()).collect();
    let tails: BTreeSet<&str> = instance.edges.iter().map(|e| e.tail.as_str()).collect();
    for n in &instance.nodes {
        if !heads.contains(n.as_str()) && instance.sources_at(n).is_empty() {
            v.push(format!(
                "node {n}: no incoming edge and originates no source"
            ));
        }
        if !tails.contains(n.as_str()) && !instance.is_destination(n) {
            v.push(format!(
                "node {n}: no outgoing edge and is a destination of no source"
            ));
        }
    }

    if topological_order(instance).is_err() {
        v.push("graph contains a cycle".to_string());
    }

    ValidationReport { violations: v }
}

/// Checks every well-formedness invariant of an index instance.
pub fn validate_index(instance: &IndexInstance) -> ValidationReport {
    let mut v = Vec::new();
    if instance.block_size_n == 0 {
        v.push("block_size_n must be positive".to_string());
    }
    check_unique(
        "message",
        instance.messages.iter().map(|m| m.id.as_str()),
        &mut v,
    );
    check_unique(
        "receiver",
        instance.receivers.iter().map(|r| r.id.as_str()),
        &mut v,
    );
    check_unique(
        "eavesdropper",
        instance.eavesdroppers.iter().map(|e| e.id.as_str()),
        &mut v,
    );

    for r in &instance.receivers {
        for m in r.wants.union(&r.has) {
            if instance.message(m).is_none() {
                v.push(format!("receiver {}: unknown message {m}", r.id));
            }
        }
        if !r.wants.is_disjoint(&r.has) {
            v.push(format!("receiver {}: wants overlaps has", r.id));
        }
    }
    for eav in &instance.eavesdroppers {
        for m in eav.side_info.union(&eav.target_messages) {
            if instance.message(m).is_none() {
                v.push(format!("eavesdropper {}: unknown message {m}", eav.id));
            }
        }
        if !eav.target_messages.is_disjoint(&eav.side_info) {
            v.push(format!(
                "eavesdropper {}: target overlaps side information",
                eav.id
            ));
        }
    }

    ValidationReport { violations: v }
}

/// Orders edges so every edge appears after all edges into its tail node,
/// breaking ties by ascending edge id.
pub fn topological_order(instance: &NetworkInstance) -> Result<Vec<String>, CycleError> {
    // Kahn's algorithm over edges: an edge is ready once every edge into
    // its tail has been emitted. Readiness is tracked per tail node.
    let mut in_remaining: BTreeMap<&str, usize> = BTreeMap::new();
    for n in &instance.nodes {
        in_remaining.insert(n.as_str(), 0);
    }
    for e in &instance.edges {
        if let Some(c) = in_remaining.get_mut(e.head.as_str()) {
            *c += 1;
        }
    }

    let mut ready: BTreeSet<&str> = BTreeSet::new();
    for e in &instance.edges {
        if in_remaining.get(e.tail.as_str()).copied().unwrap_or(0) == 0 {
            ready.insert(e.id.as_str());
        }
    }

    let mut order = Vec::with_capacity(instance.edges.len());
    while let Some(&id) = ready.iter().next() {
        ready.remove(id);
        let edge = instance.edge(id).expect("ready edge exists");
        order.push(id.to_string());
        if let Some(c) = in_remaining.get_mut(edge.head.as_str()) {
            *c -= 1;
            if *c == 0 {
                for e in &instance.edges {
                    if e.tail == edge.head {
                        ready.insert(e.id.as_str());
                    }
                }
            }
        }
    }

    if order.len() == instance.edges.len() {
        Ok(order)
    } else {
        Err(CycleError)
    }
}
