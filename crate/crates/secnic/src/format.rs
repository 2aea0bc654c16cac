//! Canonical JSON file formats for instances, codes and mapping records.
//!
//! Every document carries `"kind"` and `"format_version": 1`. Emission is
//! canonical: fixed key order, compact encoding, sorted maps, one trailing
//! newline, so identical values produce identical bytes on every platform.
//! Function tables are flat integer arrays in the little-endian mixed-radix
//! slot order of the convention; slot lists themselves are never stored —
//! they are reconstructed from the instance on parse.

use std::collections::BTreeMap;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    Edge, IndexEavesdropper, IndexInstance, Message, NetworkEavesdropper, NetworkInstance,
    Receiver, Source,
};
use crate::model::Alphabet;
use crate::tables::{
    edge_function_slots, index_decoder_output, index_decoder_slots, index_encoder_slots,
    node_decoder_output, node_decoder_slots, FiniteFunction, TableError,
};
use crate::transform::{AugmentationRecord, MappingRecord, NetworkToIndexMap};
use crate::translate::{check_index_code, check_network_code, CodeMismatchError, IndexCode, NetworkCode};

pub const FORMAT_VERSION: u32 = 1;

pub const KIND_NETWORK_INSTANCE: &str = "network-instance";
pub const KIND_INDEX_INSTANCE: &str = "index-instance";
pub const KIND_NETWORK_CODE: &str = "network-code";
pub const KIND_INDEX_CODE: &str = "index-code";
pub const KIND_INDEX_NETWORK_MAPPING: &str = "index-network-mapping";
pub const KIND_NETWORK_INDEX_MAPPING: &str = "network-index-mapping";
pub const KIND_AUGMENTATION_RECORD: &str = "augmentation-record";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("expected a {expected} document, found kind {found}")]
    WrongKind { expected: String, found: String },
    #[error("unsupported format_version {0}, this build reads version 1")]
    UnsupportedVersion(u32),
    #[error("document references unknown entity {0}")]
    UnknownEntity(String),
    #[error("table for {entity}: {source}")]
    BadTable { entity: String, source: TableError },
    #[error(transparent)]
    CodeMismatch(#[from] CodeMismatchError),
}

fn to_canonical<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string(doc).expect("document serialization cannot fail");
    s.push('\n');
    s
}

fn from_json<T: DeserializeOwned>(text: &str) -> Result<T, FormatError> {
    serde_json::from_str(text).map_err(|e| FormatError::Json(e.to_string()))
}

/// Validates kind and version up front so a mismatched document reports
/// what it is instead of a missing-field soup.
fn expect_header(text: &str, expected: &str) -> Result<(), FormatError> {
    #[derive(Deserialize)]
    struct Header {
        kind: String,
        format_version: u32,
    }
    let header: Header = from_json(text)?;
    if header.kind != expected {
        return Err(FormatError::WrongKind {
            expected: expected.to_string(),
            found: header.kind,
        });
    }
    if header.format_version != FORMAT_VERSION {
        return Err(FormatError::UnsupportedVersion(header.format_version));
    }
    Ok(())
}

/// Reads the `kind` field of any document.
pub fn detect_kind(text: &str) -> Result<String, FormatError> {
    #[derive(Deserialize)]
    struct Header {
        kind: String,
    }
    Ok(from_json::<Header>(text)?.kind)
}

// ---------------------------------------------------------------------------
// Instances
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct NetworkInstanceDoc {
    kind: String,
    format_version: u32,
    block_size_n: u32,
    nodes: Vec<String>,
    edges: Vec<Edge>,
    sources: Vec<Source>,
    eavesdroppers: Vec<NetworkEavesdropper>,
}

pub fn emit_network_instance(instance: &NetworkInstance) -> String {
    to_canonical(&NetworkInstanceDoc {
        kind: KIND_NETWORK_INSTANCE.to_string(),
        format_version: FORMAT_VERSION,
        block_size_n: instance.block_size_n,
        nodes: instance.nodes.clone(),
        edges: instance.edges.clone(),
        sources: instance.sources.clone(),
        eavesdroppers: instance.eavesdroppers.clone(),
    })
}

/// Parses a network instance. Syntax and alphabet positivity only; run
/// [`crate::model::validate_network`] for semantic validation.
pub fn parse_network_instance(text: &str) -> Result<NetworkInstance, FormatError> {
    expect_header(text, KIND_NETWORK_INSTANCE)?;
    let doc: NetworkInstanceDoc = from_json(text)?;
    Ok(NetworkInstance {
        block_size_n: doc.block_size_n,
        nodes: doc.nodes,
        edges: doc.edges,
        sources: doc.sources,
        eavesdroppers: doc.eavesdroppers,
    })
}

#[derive(Serialize, Deserialize)]
struct IndexInstanceDoc {
    kind: String,
    format_version: u32,
    block_size_n: u32,
    broadcast_alphabet: Alphabet,
    messages: Vec<Message>,
    receivers: Vec<Receiver>,
    eavesdroppers: Vec<IndexEavesdropper>,
}

pub fn emit_index_instance(instance: &IndexInstance) -> String {
    to_canonical(&IndexInstanceDoc {
        kind: KIND_INDEX_INSTANCE.to_string(),
        format_version: FORMAT_VERSION,
        block_size_n: instance.block_size_n,
        broadcast_alphabet: instance.broadcast_alphabet,
        messages: instance.messages.clone(),
        receivers: instance.receivers.clone(),
        eavesdroppers: instance.eavesdroppers.clone(),
    })
}

pub fn parse_index_instance(text: &str) -> Result<IndexInstance, FormatError> {
    expect_header(text, KIND_INDEX_INSTANCE)?;
    let doc: IndexInstanceDoc = from_json(text)?;
    Ok(IndexInstance {
        block_size_n: doc.block_size_n,
        broadcast_alphabet: doc.broadcast_alphabet,
        messages: doc.messages,
        receivers: doc.receivers,
        eavesdroppers: doc.eavesdroppers,
    })
}

// ---------------------------------------------------------------------------
// Codes
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct NetworkCodeDoc {
    kind: String,
    format_version: u32,
    key_alphabets: BTreeMap<String, Alphabet>,
    edge_functions: BTreeMap<String, Vec<u64>>,
    node_decoders: BTreeMap<String, Vec<u64>>,
}

pub fn emit_network_code(code: &NetworkCode) -> String {
    to_canonical(&NetworkCodeDoc {
        kind: KIND_NETWORK_CODE.to_string(),
        format_version: FORMAT_VERSION,
        key_alphabets: code
            .key_alphabets
            .iter()
            .filter(|(_, a)| a.size() > 1)
            .map(|(n, a)| (n.clone(), *a))
            .collect(),
        edge_functions: code
            .edge_functions
            .iter()
            .map(|(id, f)| (id.clone(), f.table().to_vec()))
            .collect(),
        node_decoders: code
            .node_decoders
            .iter()
            .map(|(id, f)| (id.clone(), f.table().to_vec()))
            .collect(),
    })
}

/// Parses a network code against its instance, rebuilding every function's
/// slot list from the convention and checking the code matches.
pub fn parse_network_code(
    text: &str,
    instance: &NetworkInstance,
) -> Result<NetworkCode, FormatError> {
    expect_header(text, KIND_NETWORK_CODE)?;
    let doc: NetworkCodeDoc = from_json(text)?;

    for node in doc.key_alphabets.keys() {
        if !instance.has_node(node) {
            return Err(FormatError::UnknownEntity(format!("node {node}")));
        }
    }
    let mut edge_functions = BTreeMap::new();
    for (id, table) in doc.edge_functions {
        let edge = instance
            .edge(&id)
            .ok_or_else(|| FormatError::UnknownEntity(format!("edge {id}")))?;
        let key = doc.key_alphabets.get(&edge.tail).copied();
        let slots = edge_function_slots(instance, &id, key);
        let f = FiniteFunction::new(slots, edge.alphabet, table)
            .map_err(|source| FormatError::BadTable {
                entity: format!("edge {id}"),
                source,
            })?;
        edge_functions.insert(id, f);
    }
    let mut node_decoders = BTreeMap::new();
    for (node, table) in doc.node_decoders {
        if !instance.is_destination(&node) {
            return Err(FormatError::UnknownEntity(format!(
                "destination node {node}"
            )));
        }
        let slots = node_decoder_slots(instance, &node);
        let g = FiniteFunction::new(slots, node_decoder_output(instance, &node), table).map_err(
            |source| FormatError::BadTable {
                entity: format!("decoder {node}"),
                source,
            },
        )?;
        node_decoders.insert(node, g);
    }
    let code = NetworkCode {
        edge_functions,
        node_decoders,
        key_alphabets: doc.key_alphabets,
    };
    check_network_code(instance, &code)?;
    Ok(code)
}

#[derive(Serialize, Deserialize)]
struct IndexCodeDoc {
    kind: String,
    format_version: u32,
    key_alphabet: Alphabet,
    encoder: Vec<u64>,
    decoders: BTreeMap<String, Vec<u64>>,
}

pub fn emit_index_code(code: &IndexCode) -> String {
    to_canonical(&IndexCodeDoc {
        kind: KIND_INDEX_CODE.to_string(),
        format_version: FORMAT_VERSION,
        key_alphabet: code.key_alphabet,
        encoder: code.encoder.table().to_vec(),
        decoders: code
            .decoders
            .iter()
            .map(|(id, f)| (id.clone(), f.table().to_vec()))
            .collect(),
    })
}

pub fn parse_index_code(text: &str, instance: &IndexInstance) -> Result<IndexCode, FormatError> {
    expect_header(text, KIND_INDEX_CODE)?;
    let doc: IndexCodeDoc = from_json(text)?;

    let enc_slots = index_encoder_slots(instance, Some(doc.key_alphabet));
    let encoder = FiniteFunction::new(enc_slots, instance.broadcast_alphabet, doc.encoder)
        .map_err(|source| FormatError::BadTable {
            entity: "encoder".to_string(),
            source,
        })?;
    let mut decoders = BTreeMap::new();
    for (rid, table) in doc.decoders {
        let Some(receiver) = instance.receiver(&rid) else {
            return Err(FormatError::UnknownEntity(format!("receiver {rid}")));
        };
        // Guard the slot reconstruction against dangling references in a
        // not-yet-validated instance.
        for m in receiver.has.union(&receiver.wants) {
            if instance.message(m).is_none() {
                return Err(FormatError::UnknownEntity(format!("message {m}")));
            }
        }
        let slots = index_decoder_slots(instance, &rid);
        let g = FiniteFunction::new(slots, index_decoder_output(instance, &rid), table).map_err(
            |source| FormatError::BadTable {
                entity: format!("decoder {rid}"),
                source,
            },
        )?;
        decoders.insert(rid, g);
    }
    let code = IndexCode {
        encoder,
        decoders,
        key_alphabet: doc.key_alphabet,
    };
    check_index_code(instance, &code)?;
    Ok(code)
}

// ---------------------------------------------------------------------------
// Mapping records
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct RecordDoc<T> {
    kind: String,
    format_version: u32,
    #[serde(flatten)]
    record: T,
}

fn emit_record<T: Serialize>(kind: &str, record: &T) -> String {
    to_canonical(&RecordDoc {
        kind: kind.to_string(),
        format_version: FORMAT_VERSION,
        record,
    })
}

fn parse_record<T: DeserializeOwned>(text: &str, kind: &str) -> Result<T, FormatError> {
    expect_header(text, kind)?;
    let doc: RecordDoc<T> = from_json(text)?;
    Ok(doc.record)
}

pub fn emit_mapping_record(record: &MappingRecord) -> String {
    emit_record(KIND_INDEX_NETWORK_MAPPING, record)
}

pub fn parse_mapping_record(text: &str) -> Result<MappingRecord, FormatError> {
    parse_record(text, KIND_INDEX_NETWORK_MAPPING)
}

pub fn emit_network_index_map(map: &NetworkToIndexMap) -> String {
    emit_record(KIND_NETWORK_INDEX_MAPPING, map)
}

pub fn parse_network_index_map(text: &str) -> Result<NetworkToIndexMap, FormatError> {
    parse_record(text, KIND_NETWORK_INDEX_MAPPING)
}

pub fn emit_augmentation_record(record: &AugmentationRecord) -> String {
    emit_record(KIND_AUGMENTATION_RECORD, record)
}

pub fn parse_augmentation_record(text: &str) -> Result<AugmentationRecord, FormatError> {
    parse_record(text, KIND_AUGMENTATION_RECORD)
}
