//! Instance-level constructions: index-to-network mapping, augmentation,
//! and network-to-index mapping.
//!
//! Each construction is deterministic, so the record it returns can always
//! be recomputed and compared; translations use that to reject mismatched
//! (instance, record) pairs.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    validate_index, validate_network, Alphabet, Edge, IndexEavesdropper, IndexInstance, Message,
    NetworkEavesdropper, NetworkInstance, Receiver, Source, ValidationReport,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("input instance is invalid:\n{0}")]
    InvalidInput(ValidationReport),
    #[error("constructed instance is invalid (id scheme collision or degenerate input):\n{0}")]
    InvalidOutput(ValidationReport),
    #[error("fresh id {0} collides with an existing id")]
    IdCollision(String),
    #[error("alphabet size product overflows u64")]
    AlphabetOverflow,
}

/// Role of an edge created by the index-to-network mapping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeRole {
    SourceToRelay,
    SourceToReceiver,
    Bottleneck,
    Fanout,
}

/// How index-coding entities map onto the constructed network instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappingRecord {
    pub node_for_message: BTreeMap<String, String>,
    pub receiver_node: BTreeMap<String, String>,
    pub relay_nodes: (String, String),
    pub edge_roles: BTreeMap<String, EdgeRole>,
}

/// The fresh key sources introduced by augmentation, per node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentationRecord {
    pub key_source_ids: BTreeMap<String, String>,
    pub key_alphabets: BTreeMap<String, Alphabet>,
}

/// How network-coding entities map onto the constructed index instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkToIndexMap {
    pub source_messages: BTreeMap<String, String>,
    pub edge_messages: BTreeMap<String, String>,
    pub node_receivers: BTreeMap<String, String>,
    pub edge_receivers: BTreeMap<String, String>,
}

/// Node id of the network node originating a mapped message.
pub fn message_node_id(message: &str) -> String {
    format!("s:{message}")
}

/// Node id of the network node standing for a mapped receiver.
pub fn receiver_node_id(receiver: &str) -> String {
    format!("t:{receiver}")
}

/// Edge id used by the index-to-network mapping.
pub fn mapped_edge_id(tail: &str, head: &str) -> String {
    format!("{tail}->{head}")
}

/// Message id of the edge message standing for a network edge.
pub fn edge_message_id(edge: &str) -> String {
    format!("edge:{edge}")
}

/// Receiver id of the per-destination receiver for a network node.
pub fn node_receiver_id(node: &str) -> String {
    format!("node:{node}")
}

/// Receiver id of the per-edge receiver for a network edge.
pub fn edge_receiver_id(edge: &str) -> String {
    format!("edge:{edge}")
}

const RELAY_1: &str = "1";
const RELAY_2: &str = "2";

/// Maps a secure index-coding instance to the equivalent secure
/// network-coding instance: one originating node per message, one sink per
/// receiver, and a two-relay bottleneck carrying the broadcast.
pub fn index_to_network(
    instance: &IndexInstance,
) -> Result<(NetworkInstance, MappingRecord), TransformError> {
    let report = validate_index(instance);
    if !report.is_ok() {
        return Err(TransformError::InvalidInput(report));
    }

    let mut nodes = Vec::new();
    let mut node_for_message = BTreeMap::new();
    for m in &instance.messages {
        let node = message_node_id(&m.id);
        nodes.push(node.clone());
        node_for_message.insert(m.id.clone(), node);
    }
    let mut receiver_node = BTreeMap::new();
    for r in &instance.receivers {
        let node = receiver_node_id(&r.id);
        nodes.push(node.clone());
        receiver_node.insert(r.id.clone(), node);
    }
    nodes.push(RELAY_1.to_string());
    nodes.push(RELAY_2.to_string());

    let mut edges = Vec::new();
    let mut edge_roles = BTreeMap::new();
    for m in &instance.messages {
        let tail = &node_for_message[&m.id];
        let id = mapped_edge_id(tail, RELAY_1);
        edges.push(Edge {
            id: id.clone(),
            tail: tail.clone(),
            head: RELAY_1.to_string(),
            alphabet: m.alphabet,
        });
        edge_roles.insert(id, EdgeRole::SourceToRelay);
        for r in &instance.receivers {
            if r.has.contains(&m.id) {
                let head = &receiver_node[&r.id];
                let id = mapped_edge_id(tail, head);
                edges.push(Edge {
                    id: id.clone(),
                    tail: tail.clone(),
                    head: head.clone(),
                    alphabet: m.alphabet,
                });
                edge_roles.insert(id, EdgeRole::SourceToReceiver);
            }
        }
    }
    let bottleneck = mapped_edge_id(RELAY_1, RELAY_2);
    edges.push(Edge {
        id: bottleneck.clone(),
        tail: RELAY_1.to_string(),
        head: RELAY_2.to_string(),
        alphabet: instance.broadcast_alphabet,
    });
    edge_roles.insert(bottleneck, EdgeRole::Bottleneck);
    for r in &instance.receivers {
        let head = &receiver_node[&r.id];
        let id = mapped_edge_id(RELAY_2, head);
        edges.push(Edge {
            id: id.clone(),
            tail: RELAY_2.to_string(),
            head: head.clone(),
            alphabet: instance.broadcast_alphabet,
        });
        edge_roles.insert(id, EdgeRole::Fanout);
    }

    let sources = instance
        .messages
        .iter()
        .map(|m| Source {
            id: m.id.clone(),
            origin: node_for_message[&m.id].clone(),
            alphabet: m.alphabet,
            destinations: instance
                .receivers
                .iter()
                .filter(|r| r.wants.contains(&m.id))
                .map(|r| receiver_node[&r.id].clone())
                .collect(),
        })
        .collect();

    let eavesdroppers = instance
        .eavesdroppers
        .iter()
        .map(|eav| {
            let mut tapped: BTreeSet<String> =
                [mapped_edge_id(RELAY_1, RELAY_2)].into_iter().collect();
            for m in &eav.side_info {
                let tail = &node_for_message[m];
                for e in &edges {
                    if &e.tail == tail {
                        tapped.insert(e.id.clone());
                    }
                }
            }
            NetworkEavesdropper {
                id: eav.id.clone(),
                tapped_edges: tapped,
                target_sources: eav.target_messages.clone(),
            }
        })
        .collect();

    let network = NetworkInstance {
        block_size_n: instance.block_size_n,
        nodes,
        edges,
        sources,
        eavesdroppers,
    };
    let report = validate_network(&network);
    if !report.is_ok() {
        return Err(TransformError::InvalidOutput(report));
    }
    Ok((
        network,
        MappingRecord {
            node_for_message,
            receiver_node,
            relay_nodes: (RELAY_1.to_string(), RELAY_2.to_string()),
            edge_roles,
        },
    ))
}

fn fresh_source_id(taken: &BTreeSet<&str>, base: String) -> String {
    if !taken.contains(base.as_str()) {
        return base;
    }
    let mut n = 2u64;
    loop {
        let candidate = format!("{base}:{n}");
        if !taken.contains(candidate.as_str()) {
            return candidate;
        }
        n += 1;
    }
}

/// Materialises each node's random key as an explicit extra source of
/// alphabet size equal to the product of its out-edge sizes, demanded by
/// nobody. Graph and eavesdroppers are unchanged.
pub fn augment(
    instance: &NetworkInstance,
) -> Result<(NetworkInstance, AugmentationRecord), TransformError> {
    let report = validate_network(instance);
    if !report.is_ok() {
        return Err(TransformError::InvalidInput(report));
    }

    let taken: BTreeSet<&str> = instance.sources.iter().map(|s| s.id.as_str()).collect();
    let mut augmented = instance.clone();
    let mut key_source_ids = BTreeMap::new();
    let mut key_alphabets = BTreeMap::new();
    for node in &instance.nodes {
        let size = instance
            .out_edges(node)
            .iter()
            .try_fold(1u64, |acc, e| acc.checked_mul(e.alphabet.size()))
            .ok_or(TransformError::AlphabetOverflow)?;
        let id = fresh_source_id(&taken, crate::tables::node_key_slot_name(node));
        if key_source_ids.values().any(|v| v == &id) {
            return Err(TransformError::IdCollision(id));
        }
        augmented.sources.push(Source {
            id: id.clone(),
            origin: node.clone(),
            alphabet: Alphabet::new(size),
            destinations: BTreeSet::new(),
        });
        key_source_ids.insert(node.clone(), id);
        key_alphabets.insert(node.clone(), Alphabet::new(size));
    }
    debug_assert!(validate_network(&augmented).is_ok());
    Ok((
        augmented,
        AugmentationRecord {
            key_source_ids,
            key_alphabets,
        },
    ))
}

/// Maps a network-coding instance (usually an augmented one) to the
/// equivalent index-coding instance: one message per source and per edge,
/// one receiver per destination node and per edge, broadcast alphabet the
/// product of all edge alphabets.
pub fn network_to_index(
    instance: &NetworkInstance,
) -> Result<(IndexInstance, NetworkToIndexMap), TransformError> {
    let report = validate_network(instance);
    if !report.is_ok() {
        return Err(TransformError::InvalidInput(report));
    }

    let mut messages = Vec::new();
    let mut source_messages = BTreeMap::new();
    for s in &instance.sources {
        messages.push(Message {
            id: s.id.clone(),
            alphabet: s.alphabet,
        });
        source_messages.insert(s.id.clone(), s.id.clone());
    }
    let mut edge_messages = BTreeMap::new();
    for e in &instance.edges {
        let id = edge_message_id(&e.id);
        if instance.source(&id).is_some() {
            return Err(TransformError::IdCollision(id));
        }
        messages.push(Message {
            id: id.clone(),
            alphabet: e.alphabet,
        });
        edge_messages.insert(e.id.clone(), id);
    }

    let has_at = |node: &str| -> BTreeSet<String> {
        let mut has: BTreeSet<String> = instance
            .in_edges(node)
            .iter()
            .map(|e| edge_message_id(&e.id))
            .collect();
        for s in instance.sources_at(node) {
            has.insert(s.id.clone());
        }
        has
    };

    let mut receivers = Vec::new();
    let mut node_receivers = BTreeMap::new();
    for node in instance.destination_nodes() {
        let id = node_receiver_id(node);
        receivers.push(Receiver {
            id: id.clone(),
            wants: instance
                .required_sources(node)
                .iter()
                .map(|s| s.id.clone())
                .collect(),
            has: has_at(node),
        });
        node_receivers.insert(node.to_string(), id);
    }
    let mut edge_receivers = BTreeMap::new();
    for e in &instance.edges {
        let id = edge_receiver_id(&e.id);
        receivers.push(Receiver {
            id: id.clone(),
            wants: [edge_message_id(&e.id)].into_iter().collect(),
            has: has_at(&e.tail),
        });
        edge_receivers.insert(e.id.clone(), id);
    }

    let broadcast_size = instance
        .edges
        .iter()
        .try_fold(1u64, |acc, e| acc.checked_mul(e.alphabet.size()))
        .ok_or(TransformError::AlphabetOverflow)?;

    let eavesdroppers = instance
        .eavesdroppers
        .iter()
        .map(|eav| IndexEavesdropper {
            id: eav.id.clone(),
            side_info: eav.tapped_edges.iter().map(|e| edge_message_id(e)).collect(),
            target_messages: eav.target_sources.clone(),
        })
        .collect();

    let index = IndexInstance {
        block_size_n: instance.block_size_n,
        broadcast_alphabet: Alphabet::new(broadcast_size),
        messages,
        receivers,
        eavesdroppers,
    };
    let report = validate_index(&index);
    if !report.is_ok() {
        return Err(TransformError::InvalidOutput(report));
    }
    Ok((
        index,
        NetworkToIndexMap {
            source_messages,
            edge_messages,
            node_receivers,
            edge_receivers,
        },
    ))
}
