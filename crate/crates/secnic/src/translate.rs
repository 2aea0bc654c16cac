//! Code-level translations between secure network codes and secure index
//! codes, matching the instance mappings in [`crate::transform`].
//!
//! Four directions exist: index code to network code and back across the
//! bottleneck construction, and deterministic network code to index code
//! and back across the broadcast-packing construction. A fifth pair of
//! helpers rewires randomised codes onto augmented instances where every
//! key is an explicit source.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::model::{Alphabet, IndexInstance, NetworkInstance};
use crate::tables::{
    self, edge_function_slots, index_decoder_output, index_decoder_slots, index_encoder_slots,
    node_decoder_output, node_decoder_slots, FiniteFunction, Slot,
};
use crate::transform::{
    self, augment, index_to_network, mapped_edge_id, network_to_index, AugmentationRecord,
    MappingRecord, NetworkToIndexMap, TransformError,
};
use crate::verify::{
    check_index_decodable, check_network_decodable, check_source_recoverable, EnumerationBudget,
    Verdict, VerifyError,
};

/// A network code: a local encoding function per edge, a decoder per
/// destination node, and a declared key alphabet per node (size 1 or a
/// missing entry means the node encodes deterministically).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkCode {
    pub edge_functions: BTreeMap<String, FiniteFunction>,
    pub node_decoders: BTreeMap<String, FiniteFunction>,
    pub key_alphabets: BTreeMap<String, Alphabet>,
}

impl NetworkCode {
    /// Declared key alphabet of `node`, defaulting to the trivial one.
    pub fn key_alphabet(&self, node: &str) -> Alphabet {
        self.key_alphabets
            .get(node)
            .copied()
            .unwrap_or(Alphabet::TRIVIAL)
    }

    pub fn is_deterministic(&self) -> bool {
        self.key_alphabets.values().all(|a| a.size() <= 1)
    }
}

/// An index code: the sender's encoder, one decoder per receiver, and the
/// sender's key alphabet (size 1 means deterministic).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexCode {
    pub encoder: FiniteFunction,
    pub decoders: BTreeMap<String, FiniteFunction>,
    pub key_alphabet: Alphabet,
}

impl IndexCode {
    pub fn is_deterministic(&self) -> bool {
        self.key_alphabet.size() <= 1
    }
}

/// A code's functions do not line up with the instance under the slot
/// order convention.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("code does not match instance: {detail}")]
pub struct CodeMismatchError {
    detail: String,
}

impl CodeMismatchError {
    pub fn new(detail: impl Into<String>) -> CodeMismatchError {
        CodeMismatchError {
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TranslateError {
    #[error(transparent)]
    CodeMismatch(#[from] CodeMismatchError),
    #[error("mapping record does not match the instance it claims to describe")]
    MappingMismatch,
    #[error("source {0} is not recoverable from its origin's outgoing edges")]
    SourceNotRecoverable(String),
    #[error("network code fails zero-error decodability")]
    NetworkNotDecodable,
    #[error("index code fails zero-error decodability")]
    IndexNotDecodable,
    #[error("code is not deterministic: node {0} declares a key of size {1}")]
    NotDeterministic(String, u64),
    #[error("key of size {key} at node {node} cannot be driven by the augmented key source of size {fresh} (size must divide)")]
    KeySizeMismatch { node: String, key: u64, fresh: u64 },
    #[error("sigma {0} is not in the encoder's image")]
    SigmaNotInImage(u64),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
}

fn slots_equal(expected: &[Slot], actual: &[Slot]) -> bool {
    expected.len() == actual.len()
        && expected
            .iter()
            .zip(actual)
            .all(|(e, a)| e.name == a.name && e.alphabet == a.alphabet)
}

fn describe_slots(slots: &[Slot]) -> String {
    let parts: Vec<String> = slots
        .iter()
        .map(|s| format!("{}({})", s.name, s.alphabet.size()))
        .collect();
    format!("[{}]", parts.join(", "))
}

/// Checks that a network code is exactly shaped for an instance: every
/// edge has a function with the convention's slots and output, every
/// destination node (and nothing else) has a decoder, and declared key
/// alphabets name existing nodes.
pub fn check_network_code(
    instance: &NetworkInstance,
    code: &NetworkCode,
) -> Result<(), CodeMismatchError> {
    for node in code.key_alphabets.keys() {
        if !instance.has_node(node) {
            return Err(CodeMismatchError::new(format!(
                "key alphabet declared for unknown node {node}"
            )));
        }
    }
    for id in code.edge_functions.keys() {
        if instance.edge(id).is_none() {
            return Err(CodeMismatchError::new(format!(
                "edge function for unknown edge {id}"
            )));
        }
    }
    for edge in &instance.edges {
        let f = code.edge_functions.get(&edge.id).ok_or_else(|| {
            CodeMismatchError::new(format!("missing edge function for edge {}", edge.id))
        })?;
        let expected = edge_function_slots(instance, &edge.id, Some(code.key_alphabet(&edge.tail)));
        if !slots_equal(&expected, f.input_slots()) {
            return Err(CodeMismatchError::new(format!(
                "edge {}: expected slots {}, found {}",
                edge.id,
                describe_slots(&expected),
                describe_slots(f.input_slots())
            )));
        }
        if f.output_alphabet() != edge.alphabet {
            return Err(CodeMismatchError::new(format!(
                "edge {}: output alphabet {} does not match edge alphabet {}",
                edge.id,
                f.output_alphabet().size(),
                edge.alphabet.size()
            )));
        }
    }
    for node in code.node_decoders.keys() {
        if !instance.is_destination(node) {
            return Err(CodeMismatchError::new(format!(
                "decoder for node {node} which is not a destination"
            )));
        }
    }
    for node in instance.destination_nodes() {
        let g = code.node_decoders.get(node).ok_or_else(|| {
            CodeMismatchError::new(format!("missing decoder for destination node {node}"))
        })?;
        let expected = node_decoder_slots(instance, node);
        if !slots_equal(&expected, g.input_slots()) {
            return Err(CodeMismatchError::new(format!(
                "decoder {node}: expected slots {}, found {}",
                describe_slots(&expected),
                describe_slots(g.input_slots())
            )));
        }
        if g.output_alphabet() != node_decoder_output(instance, node) {
            return Err(CodeMismatchError::new(format!(
                "decoder {node}: wrong output alphabet"
            )));
        }
    }
    Ok(())
}

/// Checks that an index code is exactly shaped for an instance.
pub fn check_index_code(
    instance: &IndexInstance,
    code: &IndexCode,
) -> Result<(), CodeMismatchError> {
    let expected = index_encoder_slots(instance, Some(code.key_alphabet));
    if !slots_equal(&expected, code.encoder.input_slots()) {
        return Err(CodeMismatchError::new(format!(
            "encoder: expected slots {}, found {}",
            describe_slots(&expected),
            describe_slots(code.encoder.input_slots())
        )));
    }
    if code.encoder.output_alphabet() != instance.broadcast_alphabet {
        return Err(CodeMismatchError::new(
            "encoder output alphabet does not match the broadcast alphabet",
        ));
    }
    for rid in code.decoders.keys() {
        if instance.receiver(rid).is_none() {
            return Err(CodeMismatchError::new(format!(
                "decoder for unknown receiver {rid}"
            )));
        }
    }
    for r in &instance.receivers {
        let g = code.decoders.get(&r.id).ok_or_else(|| {
            CodeMismatchError::new(format!("missing decoder for receiver {}", r.id))
        })?;
        let expected = index_decoder_slots(instance, &r.id);
        if !slots_equal(&expected, g.input_slots()) {
            return Err(CodeMismatchError::new(format!(
                "decoder {}: expected slots {}, found {}",
                r.id,
                describe_slots(&expected),
                describe_slots(g.input_slots())
            )));
        }
        if g.output_alphabet() != index_decoder_output(instance, &r.id) {
            return Err(CodeMismatchError::new(format!(
                "decoder {}: wrong output alphabet",
                r.id
            )));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Randomised codes <-> deterministic codes on the augmented instance
// ---------------------------------------------------------------------------

/// Rewires every key slot onto the corresponding fresh key source of the
/// augmented instance, yielding a deterministic code with the same joint
/// law. A declared key of size `k` is driven as `w mod k` by the fresh
/// source of size `K`, which preserves uniformity exactly when `k | K`.
pub fn randomized_to_augmented(
    instance: &NetworkInstance,
    code: &NetworkCode,
    augmented: &NetworkInstance,
    record: &AugmentationRecord,
) -> Result<NetworkCode, TranslateError> {
    check_network_code(instance, code)?;
    let (expected_aug, expected_rec) = augment(instance)?;
    if *augmented != expected_aug || *record != expected_rec {
        return Err(TranslateError::MappingMismatch);
    }
    for node in &instance.nodes {
        let k = code.key_alphabet(node).size();
        let fresh = record.key_alphabets[node].size();
        if !fresh.is_multiple_of(k) {
            return Err(TranslateError::KeySizeMismatch {
                node: node.clone(),
                key: k,
                fresh,
            });
        }
    }

    enum OldArg {
        Copy(usize),
        KeyMod(usize, u64),
    }
    let plan_args = |node: &str, new_slots: &[Slot], old_has_key: bool, key_size: u64| {
        let n_in = instance.in_edges(node).len();
        let aug_sources = augmented.sources_at(node);
        let mut args: Vec<OldArg> = (0..n_in).map(OldArg::Copy).collect();
        for s in instance.sources_at(node) {
            let rank = aug_sources
                .iter()
                .position(|a| a.id == s.id)
                .expect("original source survives augmentation");
            args.push(OldArg::Copy(n_in + rank));
        }
        if old_has_key {
            let fresh_id = &record.key_source_ids[node];
            let rank = aug_sources
                .iter()
                .position(|a| &a.id == fresh_id)
                .expect("fresh key source exists");
            args.push(OldArg::KeyMod(n_in + rank, key_size));
        }
        debug_assert_eq!(new_slots.len(), n_in + aug_sources.len());
        args
    };

    let mut edge_functions = BTreeMap::new();
    for edge in &instance.edges {
        let old = &code.edge_functions[&edge.id];
        let key_size = code.key_alphabet(&edge.tail).size();
        let new_slots = edge_function_slots(augmented, &edge.id, None);
        let args = plan_args(&edge.tail, &new_slots, key_size > 1, key_size);
        let f = FiniteFunction::tabulate(new_slots, edge.alphabet, |t| {
            let old_args: Vec<u64> = args
                .iter()
                .map(|a| match a {
                    OldArg::Copy(p) => t[*p],
                    OldArg::KeyMod(p, k) => t[*p] % k,
                })
                .collect();
            old.evaluate(&old_args).expect("slots match")
        });
        edge_functions.insert(edge.id.clone(), f);
    }

    let mut node_decoders = BTreeMap::new();
    for (node, old) in &code.node_decoders {
        let new_slots = node_decoder_slots(augmented, node);
        let args = plan_args(node, &new_slots, false, 1);
        let g = FiniteFunction::tabulate(new_slots, node_decoder_output(augmented, node), |t| {
            let old_args: Vec<u64> = args
                .iter()
                .map(|a| match a {
                    OldArg::Copy(p) => t[*p],
                    OldArg::KeyMod(..) => unreachable!("decoders take no key"),
                })
                .collect();
            old.evaluate(&old_args).expect("slots match")
        });
        node_decoders.insert(node.clone(), g);
    }

    Ok(NetworkCode {
        edge_functions,
        node_decoders,
        key_alphabets: BTreeMap::new(),
    })
}

/// Inverse of [`randomized_to_augmented`]: folds the fresh key sources of
/// a deterministic augmented code back into declared random keys of the
/// given sizes (the decoder side pins fresh sources to 0).
pub fn augmented_to_randomized(
    instance: &NetworkInstance,
    record: &AugmentationRecord,
    augmented_code: &NetworkCode,
    key_alphabets: &BTreeMap<String, Alphabet>,
) -> Result<NetworkCode, TranslateError> {
    let (augmented, expected_rec) = augment(instance)?;
    if *record != expected_rec {
        return Err(TranslateError::MappingMismatch);
    }
    check_network_code(&augmented, augmented_code)?;
    for (node, k) in key_alphabets {
        if !instance.has_node(node) {
            return Err(CodeMismatchError::new(format!(
                "key alphabet declared for unknown node {node}"
            ))
            .into());
        }
        let fresh = record.key_alphabets[node].size();
        if !fresh.is_multiple_of(k.size()) {
            return Err(TranslateError::KeySizeMismatch {
                node: node.clone(),
                key: k.size(),
                fresh,
            });
        }
    }

    enum AugArg {
        Copy(usize),
        Key(usize),
        ZeroFresh,
    }
    let plan_args = |node: &str, key_pos: Option<usize>| {
        let n_in = instance.in_edges(node).len();
        let orig_sources = instance.sources_at(node);
        let fresh_id = &record.key_source_ids[node];
        let mut args = Vec::new();
        for p in 0..n_in {
            args.push(AugArg::Copy(p));
        }
        for s in augmented.sources_at(node) {
            if &s.id == fresh_id {
                args.push(match key_pos {
                    Some(p) => AugArg::Key(p),
                    None => AugArg::ZeroFresh,
                });
            } else {
                let rank = orig_sources
                    .iter()
                    .position(|o| o.id == s.id)
                    .expect("augmented source is original or fresh");
                args.push(AugArg::Copy(n_in + rank));
            }
        }
        args
    };

    let mut edge_functions = BTreeMap::new();
    for edge in &instance.edges {
        let aug_fn = &augmented_code.edge_functions[&edge.id];
        let key = key_alphabets
            .get(&edge.tail)
            .copied()
            .unwrap_or(Alphabet::TRIVIAL);
        let new_slots = edge_function_slots(instance, &edge.id, Some(key));
        let key_pos = (key.size() > 1).then_some(new_slots.len() - 1);
        let args = plan_args(&edge.tail, key_pos);
        let f = FiniteFunction::tabulate(new_slots, edge.alphabet, |t| {
            let aug_args: Vec<u64> = args
                .iter()
                .map(|a| match a {
                    AugArg::Copy(p) => t[*p],
                    AugArg::Key(p) => t[*p],
                    AugArg::ZeroFresh => 0,
                })
                .collect();
            aug_fn.evaluate(&aug_args).expect("slots match")
        });
        edge_functions.insert(edge.id.clone(), f);
    }

    let mut node_decoders = BTreeMap::new();
    for (node, aug_g) in &augmented_code.node_decoders {
        let new_slots = node_decoder_slots(instance, node);
        let args = plan_args(node, None);
        let g = FiniteFunction::tabulate(new_slots, node_decoder_output(instance, node), |t| {
            let aug_args: Vec<u64> = args
                .iter()
                .map(|a| match a {
                    AugArg::Copy(p) => t[*p],
                    AugArg::Key(p) => t[*p],
                    AugArg::ZeroFresh => 0,
                })
                .collect();
            aug_g.evaluate(&aug_args).expect("slots match")
        });
        node_decoders.insert(node.clone(), g);
    }

    let key_alphabets = key_alphabets
        .iter()
        .filter(|(_, a)| a.size() > 1)
        .map(|(n, a)| (n.clone(), *a))
        .collect();
    Ok(NetworkCode {
        edge_functions,
        node_decoders,
        key_alphabets,
    })
}

// ---------------------------------------------------------------------------
// Theorem 1: index code <-> network code over the bottleneck construction
// ---------------------------------------------------------------------------

/// Builds a network code for `index_to_network(instance)` from an index
/// code: source edges carry their message identically, the bottleneck and
/// fanout edges carry the index encoder's output (randomised at the first
/// relay), and each receiver node runs its receiver's decoder.
pub fn t1_index_code_to_network_code(
    instance: &IndexInstance,
    mapping: &MappingRecord,
    code: &IndexCode,
) -> Result<NetworkCode, TranslateError> {
    check_index_code(instance, code)?;
    let (network, expected) = index_to_network(instance)?;
    if *mapping != expected {
        return Err(TranslateError::MappingMismatch);
    }

    let relay1 = mapping.relay_nodes.0.as_str();
    let key = (code.key_alphabet.size() > 1).then_some(code.key_alphabet);

    let mut edge_functions = BTreeMap::new();
    for edge in &network.edges {
        let f = match mapping.edge_roles[&edge.id] {
            transform::EdgeRole::SourceToRelay | transform::EdgeRole::SourceToReceiver => {
                // Slots: the single message originating at the tail.
                FiniteFunction::tabulate(
                    edge_function_slots(&network, &edge.id, None),
                    edge.alphabet,
                    |t| t[0],
                )
            }
            transform::EdgeRole::Bottleneck => {
                let slots = edge_function_slots(&network, &edge.id, key);
                // In-edges of relay 1 each carry one message identically;
                // feed the encoder its messages in sorted message order.
                let in_edges = network.in_edges(relay1);
                let mut arg_of_message: Vec<usize> = Vec::new();
                for m in instance.messages_sorted() {
                    let pos = in_edges
                        .iter()
                        .position(|e| {
                            network.sources_at(&e.tail).first().map(|s| s.id.as_str())
                                == Some(m.id.as_str())
                        })
                        .expect("each message feeds relay 1");
                    arg_of_message.push(pos);
                }
                let encoder = &code.encoder;
                let has_key = key.is_some();
                FiniteFunction::tabulate(slots, edge.alphabet, move |t| {
                    let mut args: Vec<u64> =
                        arg_of_message.iter().map(|&p| t[p]).collect();
                    if has_key {
                        args.push(t[t.len() - 1]);
                    }
                    encoder.evaluate(&args).expect("slots match")
                })
            }
            transform::EdgeRole::Fanout => {
                // Slots: the single in-edge of relay 2 (the bottleneck).
                FiniteFunction::tabulate(
                    edge_function_slots(&network, &edge.id, None),
                    edge.alphabet,
                    |t| t[0],
                )
            }
        };
        edge_functions.insert(edge.id.clone(), f);
    }

    let mut node_decoders = BTreeMap::new();
    for r in &instance.receivers {
        let node = &mapping.receiver_node[&r.id];
        if !network.is_destination(node) {
            continue;
        }
        let slots = node_decoder_slots(&network, node);
        let in_edges = network.in_edges(node);
        let fanout_id = mapped_edge_id(&mapping.relay_nodes.1, node);
        let fanout_pos = in_edges
            .iter()
            .position(|e| e.id == fanout_id)
            .expect("fanout edge reaches the receiver node");
        // Side edges carry has-messages identically; locate each by the
        // message originating at its tail.
        let mut has_positions = Vec::new();
        for m in &r.has {
            let pos = in_edges
                .iter()
                .position(|e| {
                    network.sources_at(&e.tail).first().map(|s| s.id.as_str())
                        == Some(m.as_str())
                })
                .expect("side edge for has-message exists");
            has_positions.push(pos);
        }
        let decoder = &code.decoders[&r.id];
        let g = FiniteFunction::tabulate(slots, node_decoder_output(&network, node), move |t| {
            let mut args = Vec::with_capacity(1 + has_positions.len());
            args.push(t[fanout_pos]);
            for &p in &has_positions {
                args.push(t[p]);
            }
            decoder.evaluate(&args).expect("slots match")
        });
        node_decoders.insert(node.clone(), g);
    }

    let mut key_alphabets = BTreeMap::new();
    if code.key_alphabet.size() > 1 {
        key_alphabets.insert(mapping.relay_nodes.0.clone(), code.key_alphabet);
    }
    Ok(NetworkCode {
        edge_functions,
        node_decoders,
        key_alphabets,
    })
}

/// Recovers an index code from a network code on the mapped instance: the
/// encoder is the bottleneck's global encoding function with every node
/// key except the first relay's pinned to 0, and each receiver decodes by
/// replaying its node's in-edge functions with keys pinned to 0.
///
/// Requires the network code to be zero-error decodable and every source
/// to be recoverable from its origin's outgoing edges.
pub fn t1_network_code_to_index_code(
    instance: &IndexInstance,
    mapping: &MappingRecord,
    code: &NetworkCode,
    budget: &EnumerationBudget,
) -> Result<IndexCode, TranslateError> {
    let (network, expected) = index_to_network(instance)?;
    if *mapping != expected {
        return Err(TranslateError::MappingMismatch);
    }
    check_network_code(&network, code)?;
    if !check_network_decodable(&network, code, budget)?.is_pass() {
        return Err(TranslateError::NetworkNotDecodable);
    }
    if let Verdict::Fail(f) = check_source_recoverable(&network, code, budget)? {
        return Err(TranslateError::SourceNotRecoverable(f.source));
    }

    let relay1 = mapping.relay_nodes.0.as_str();
    let relay2 = mapping.relay_nodes.1.as_str();
    let bottleneck_id = mapped_edge_id(relay1, relay2);
    let globals = tables::global_encodings(&network, code)?;
    let bottleneck_global = &globals[&bottleneck_id];

    // Global slots are all sources (= messages, same sorted order) then one
    // key slot per node in sorted node order; pin every key to 0 except the
    // first relay's, which becomes the sender key.
    let key1 = code.key_alphabet(relay1);
    let n_messages = instance.messages.len();
    let mut nodes_sorted: Vec<&String> = network.nodes.iter().collect();
    nodes_sorted.sort();
    let relay1_key_pos = n_messages
        + nodes_sorted
            .iter()
            .position(|n| n.as_str() == relay1)
            .expect("relay 1 is a node");
    let total_slots = bottleneck_global.input_slots().len();

    let enc_slots = index_encoder_slots(instance, Some(key1));
    let encoder = FiniteFunction::tabulate(enc_slots, network.edge(&bottleneck_id).unwrap().alphabet, |t| {
        let mut full = vec![0u64; total_slots];
        full[..n_messages].copy_from_slice(&t[..n_messages]);
        if key1.size() > 1 {
            full[relay1_key_pos] = t[n_messages];
        }
        bottleneck_global.evaluate(&full).expect("slots match")
    });

    let mut decoders = BTreeMap::new();
    for r in &instance.receivers {
        let node = &mapping.receiver_node[&r.id];
        let fanout_id = mapped_edge_id(relay2, node);
        let fanout_fn = &code.edge_functions[&fanout_id];
        let fanout_has_key = code.key_alphabet(relay2).size() > 1;
        // Side-edge functions take (message, optional key at the s-node).
        let side: Vec<(&String, &FiniteFunction, bool)> = r
            .has
            .iter()
            .map(|m| {
                let s_node = &mapping.node_for_message[m];
                let id = mapped_edge_id(s_node, node);
                (m, &code.edge_functions[&id], code.key_alphabet(s_node).size() > 1)
            })
            .collect();
        let g = &code.node_decoders[node];
        let in_edges = network.in_edges(node);
        // Map each in-edge of the receiver node to where its symbol comes
        // from: the fanout replay or one of the side replays.
        enum Feed {
            Fanout,
            Side(usize),
        }
        let feeds: Vec<Feed> = in_edges
            .iter()
            .map(|e| {
                if e.id == fanout_id {
                    Feed::Fanout
                } else {
                    let m = network.sources_at(&e.tail)[0].id.as_str();
                    Feed::Side(side.iter().position(|(sm, _, _)| sm.as_str() == m).unwrap())
                }
            })
            .collect();

        let slots = index_decoder_slots(instance, &r.id);
        let out = index_decoder_output(instance, &r.id);
        let decoder = FiniteFunction::tabulate(slots, out, |t| {
            let b = t[0];
            let fan_args: Vec<u64> = if fanout_has_key { vec![b, 0] } else { vec![b] };
            let x_fan = fanout_fn.evaluate(&fan_args).expect("slots match");
            let side_vals: Vec<u64> = side
                .iter()
                .enumerate()
                .map(|(j, (_, f, has_key))| {
                    let args: Vec<u64> = if *has_key {
                        vec![t[1 + j], 0]
                    } else {
                        vec![t[1 + j]]
                    };
                    f.evaluate(&args).expect("slots match")
                })
                .collect();
            let g_args: Vec<u64> = feeds
                .iter()
                .map(|feed| match feed {
                    Feed::Fanout => x_fan,
                    Feed::Side(j) => side_vals[*j],
                })
                .collect();
            g.evaluate(&g_args).expect("slots match")
        });
        decoders.insert(r.id.clone(), decoder);
    }

    Ok(IndexCode {
        encoder,
        decoders,
        key_alphabet: key1,
    })
}

// ---------------------------------------------------------------------------
// Theorem 2: deterministic network code <-> index code over broadcast packing
// ---------------------------------------------------------------------------

/// Sorted edge ids with their alphabet sizes: the broadcast packing order
/// (ascending edge id, little-endian).
fn broadcast_layout(instance: &NetworkInstance) -> (Vec<String>, Vec<u64>) {
    let mut ids: Vec<String> = instance.edges.iter().map(|e| e.id.clone()).collect();
    ids.sort();
    let sizes = ids
        .iter()
        .map(|id| instance.edge(id).unwrap().alphabet.size())
        .collect();
    (ids, sizes)
}

/// Translates a deterministic network code into an index code for
/// `network_to_index(instance)`: the broadcast packs, per edge, the edge
/// message plus the edge's global encoding of the source messages; each
/// receiver strips its known edge messages to recover global values and
/// replays the corresponding decoder or local edge function.
pub fn t2_network_code_to_index_code(
    instance: &NetworkInstance,
    code: &NetworkCode,
    map: &NetworkToIndexMap,
) -> Result<IndexCode, TranslateError> {
    check_network_code(instance, code)?;
    if let Some((node, a)) = code.key_alphabets.iter().find(|(_, a)| a.size() > 1) {
        return Err(TranslateError::NotDeterministic(node.clone(), a.size()));
    }
    let (index, expected) = network_to_index(instance)?;
    if *map != expected {
        return Err(TranslateError::MappingMismatch);
    }

    let globals = tables::global_encodings(instance, code)?;
    let (edge_order, edge_sizes) = broadcast_layout(instance);

    let enc_slots = index_encoder_slots(&index, None);
    let slot_pos: BTreeMap<&str, usize> = enc_slots
        .iter()
        .enumerate()
        .map(|(i, s)| (s.name.as_str(), i))
        .collect();
    // Global functions all share one slot list: the first |sources| slots
    // are the sources sorted by id, the rest are size-1 node keys (the
    // code is deterministic). Gather (encoder position, global stride)
    // per source structurally; name lookup would be ambiguous on
    // augmented instances whose key sources shadow node-key slot names.
    let n_sources = instance.sources.len();
    let source_gather: Vec<(usize, u64)> = match globals.values().next() {
        Some(g) => {
            let mut gather = Vec::new();
            let mut stride = 1u64;
            for (j, slot) in g.input_slots().iter().enumerate() {
                if j < n_sources {
                    gather.push((slot_pos[slot.name.as_str()], stride));
                }
                stride *= slot.alphabet.size();
            }
            gather
        }
        None => Vec::new(),
    };

    let encoder = FiniteFunction::tabulate(enc_slots.clone(), index.broadcast_alphabet, |t| {
        let g_index: u64 = source_gather.iter().map(|&(p, s)| t[p] * s).sum();
        let mut packed = 0u64;
        let mut stride = 1u64;
        for (id, size) in edge_order.iter().zip(&edge_sizes) {
            let fbar = globals[id].value_at_index(g_index);
            let x_e = t[slot_pos[map.edge_messages[id].as_str()]];
            packed += ((x_e + fbar) % size) * stride;
            stride *= size;
        }
        packed
    });

    let mut decoders = BTreeMap::new();
    let unpack_pos: BTreeMap<&str, usize> = edge_order
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();

    for node in instance.destination_nodes() {
        let rid = &map.node_receivers[node];
        let slots = index_decoder_slots(&index, rid);
        let has_pos: BTreeMap<&str, usize> = slots
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, s)| (s.name.as_str(), i))
            .collect();
        let g = &code.node_decoders[node];
        let in_edges = instance.in_edges(node);
        let own_sources = instance.sources_at(node);
        let decoder = FiniteFunction::tabulate(slots.clone(), index_decoder_output(&index, rid), |t| {
            let b = tables::unpack_mixed_radix(t[0], &edge_sizes);
            let mut args = Vec::with_capacity(in_edges.len() + own_sources.len());
            for e in &in_edges {
                let x_e = t[has_pos[map.edge_messages[&e.id].as_str()]];
                let size = e.alphabet.size();
                args.push((b[unpack_pos[e.id.as_str()]] + size - x_e) % size);
            }
            for s in &own_sources {
                args.push(t[has_pos[s.id.as_str()]]);
            }
            g.evaluate(&args).expect("slots match")
        });
        decoders.insert(rid.clone(), decoder);
    }

    for edge in &instance.edges {
        let rid = &map.edge_receivers[&edge.id];
        let slots = index_decoder_slots(&index, rid);
        let has_pos: BTreeMap<&str, usize> = slots
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, s)| (s.name.as_str(), i))
            .collect();
        let f = &code.edge_functions[&edge.id];
        let in_edges = instance.in_edges(&edge.tail);
        let tail_sources = instance.sources_at(&edge.tail);
        let out_size = edge.alphabet.size();
        let self_pos = unpack_pos[edge.id.as_str()];
        let decoder = FiniteFunction::tabulate(slots.clone(), index_decoder_output(&index, rid), |t| {
            let b = tables::unpack_mixed_radix(t[0], &edge_sizes);
            let mut args = Vec::with_capacity(in_edges.len() + tail_sources.len());
            for e in &in_edges {
                let x_e = t[has_pos[map.edge_messages[&e.id].as_str()]];
                let size = e.alphabet.size();
                args.push((b[unpack_pos[e.id.as_str()]] + size - x_e) % size);
            }
            for s in &tail_sources {
                args.push(t[has_pos[s.id.as_str()]]);
            }
            let fbar_e = f.evaluate(&args).expect("slots match");
            (b[self_pos] + out_size - fbar_e) % out_size
        });
        decoders.insert(rid.clone(), decoder);
    }

    Ok(IndexCode {
        encoder,
        decoders,
        key_alphabet: Alphabet::TRIVIAL,
    })
}

/// Canonical sigma: the encoder's output on the all-zero message tuple
/// (and key 0), always a positive-probability realisation.
pub fn canonical_sigma(code: &IndexCode) -> u64 {
    code.encoder.table()[0]
}

/// Reverses [`t2_network_code_to_index_code`] at an arbitrary valid
/// broadcast realisation `sigma`: each edge function and destination
/// decoder is the corresponding index receiver's decoder with its
/// broadcast argument pinned to `sigma`.
pub fn t2_index_code_to_network_code_with_sigma(
    instance: &NetworkInstance,
    map: &NetworkToIndexMap,
    code: &IndexCode,
    sigma: u64,
    budget: &EnumerationBudget,
) -> Result<NetworkCode, TranslateError> {
    let (index, expected) = network_to_index(instance)?;
    if *map != expected {
        return Err(TranslateError::MappingMismatch);
    }
    check_index_code(&index, code)?;
    if !code.encoder.table().contains(&sigma) {
        return Err(TranslateError::SigmaNotInImage(sigma));
    }
    if !check_index_decodable(&index, code, budget)?.is_pass() {
        return Err(TranslateError::IndexNotDecodable);
    }

    // Network argument lists are (in-edges by edge id, sources by source
    // id); the index decoder wants its has-set sorted by message id. Build
    // the permutation per receiver.
    let gather = |rid: &str, net_slots: &[Slot], n_in: usize, in_edges: &[&crate::model::Edge]| {
        let dec_slots = index_decoder_slots(&index, rid);
        let mut order = Vec::with_capacity(dec_slots.len() - 1);
        for slot in &dec_slots[1..] {
            // Each has-entry is either an edge message or a source at the tail.
            let pos = if let Some(edge_pos) = in_edges
                .iter()
                .position(|e| map.edge_messages[&e.id] == slot.name)
            {
                edge_pos
            } else {
                n_in + net_slots[n_in..]
                    .iter()
                    .position(|s| s.name == slot.name)
                    .expect("has-entry is an in-edge message or a tail source")
            };
            order.push(pos);
        }
        order
    };

    let mut edge_functions = BTreeMap::new();
    for edge in &instance.edges {
        let rid = &map.edge_receivers[&edge.id];
        let slots = edge_function_slots(instance, &edge.id, None);
        let in_edges = instance.in_edges(&edge.tail);
        let order = gather(rid, &slots, in_edges.len(), &in_edges);
        let dec = &code.decoders[rid];
        let f = FiniteFunction::tabulate(slots, edge.alphabet, |t| {
            let mut args = Vec::with_capacity(1 + order.len());
            args.push(sigma);
            for &p in &order {
                args.push(t[p]);
            }
            dec.evaluate(&args).expect("slots match")
        });
        edge_functions.insert(edge.id.clone(), f);
    }

    let mut node_decoders = BTreeMap::new();
    for node in instance.destination_nodes() {
        let rid = &map.node_receivers[node];
        let slots = node_decoder_slots(instance, node);
        let in_edges = instance.in_edges(node);
        let order = gather(rid, &slots, in_edges.len(), &in_edges);
        let dec = &code.decoders[rid];
        let g = FiniteFunction::tabulate(slots, node_decoder_output(instance, node), |t| {
            let mut args = Vec::with_capacity(1 + order.len());
            args.push(sigma);
            for &p in &order {
                args.push(t[p]);
            }
            dec.evaluate(&args).expect("slots match")
        });
        node_decoders.insert(node.to_string(), g);
    }

    Ok(NetworkCode {
        edge_functions,
        node_decoders,
        key_alphabets: BTreeMap::new(),
    })
}

/// Reverses [`t2_network_code_to_index_code`] at the canonical sigma.
pub fn t2_index_code_to_network_code(
    instance: &NetworkInstance,
    map: &NetworkToIndexMap,
    code: &IndexCode,
    budget: &EnumerationBudget,
) -> Result<NetworkCode, TranslateError> {
    t2_index_code_to_network_code_with_sigma(instance, map, code, canonical_sigma(code), budget)
}
