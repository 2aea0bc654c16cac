//! Finite functions as mixed-radix lookup tables.
//!
//! Every encoder and decoder in this crate is a [`FiniteFunction`]: an
//! extensional table from a tuple of finite alphabets to one finite
//! alphabet. Tables are flat, indexed mixed-radix with the FIRST slot as
//! the least-significant digit; that order is part of the file-format
//! contract and must not change.
//!
//! The slot-order convention (which arguments a given edge function,
//! node decoder, index encoder or index decoder takes, and in which
//! order) lives here too, as do global encoding functions obtained by
//! substituting local edge functions along the DAG.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::model::{Alphabet, IndexInstance, NetworkInstance};
use crate::translate::{CodeMismatchError, NetworkCode};

/// A named input position of a [`FiniteFunction`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slot {
    pub name: String,
    pub alphabet: Alphabet,
}

impl Slot {
    pub fn new(name: impl Into<String>, alphabet: Alphabet) -> Slot {
        Slot {
            name: name.into(),
            alphabet,
        }
    }
}

/// Name of the random-key slot of node `node` in a network code.
pub fn node_key_slot_name(node: &str) -> String {
    format!("key:{node}")
}

/// Name of the sender-key slot of an index encoder.
pub const SENDER_KEY_SLOT: &str = "key:sender";

/// Name of the broadcast-symbol slot of an index decoder.
pub const BROADCAST_SLOT: &str = "broadcast";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableError {
    #[error("table length {actual} does not match input space {expected}")]
    TableLength { expected: u64, actual: u64 },
    #[error("table entry {value} at position {position} exceeds output alphabet of size {size}")]
    EntryRange { position: usize, value: u64, size: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("expected {expected} arguments, got {actual}")]
    Arity { expected: usize, actual: usize },
    #[error("argument {position} is {value}, outside its alphabet of size {size}")]
    SymbolRange { position: usize, value: u64, size: u64 },
    #[error("no slot named {0}")]
    NoSuchSlot(String),
}

/// A total function between finite alphabets, stored extensionally.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteFunction {
    input_slots: Vec<Slot>,
    output_alphabet: Alphabet,
    table: Vec<u64>,
}

/// Product of slot sizes; the empty product is 1.
pub fn domain_size(slots: &[Slot]) -> u64 {
    slots
        .iter()
        .fold(1u64, |acc, s| acc.saturating_mul(s.alphabet.size()))
}

/// Little-endian mixed-radix index of `values` with radices `sizes`.
pub fn pack_mixed_radix(values: &[u64], sizes: &[u64]) -> u64 {
    debug_assert_eq!(values.len(), sizes.len());
    let mut index = 0u64;
    let mut stride = 1u64;
    for (v, s) in values.iter().zip(sizes) {
        index += v * stride;
        stride *= s;
    }
    index
}

/// Inverse of [`pack_mixed_radix`].
pub fn unpack_mixed_radix(mut index: u64, sizes: &[u64]) -> Vec<u64> {
    let mut out = Vec::with_capacity(sizes.len());
    for s in sizes {
        out.push(index % s);
        index /= s;
    }
    out
}

/// Calls `f` once per tuple of the product space, in table-index order
/// (first coordinate fastest). The slice passed to `f` is the tuple.
pub fn for_each_tuple(sizes: &[u64], mut f: impl FnMut(&[u64])) {
    let total = sizes.iter().fold(1u64, |a, s| a.saturating_mul(*s));
    let mut tuple = vec![0u64; sizes.len()];
    for _ in 0..total {
        f(&tuple);
        for (t, s) in tuple.iter_mut().zip(sizes) {
            *t += 1;
            if *t < *s {
                break;
            }
            *t = 0;
        }
    }
}

/// Calls `f` once per tuple in lexicographic order (first coordinate most
/// significant), passing the tuple and its table index. Used wherever a
/// lexicographically smallest witness must be found.
pub fn for_each_tuple_lex(sizes: &[u64], mut f: impl FnMut(&[u64], u64) -> bool) {
    let total = sizes.iter().fold(1u64, |a, s| a.saturating_mul(*s));
    let mut strides = vec![1u64; sizes.len()];
    for i in 1..sizes.len() {
        strides[i] = strides[i - 1] * sizes[i - 1];
    }
    let mut tuple = vec![0u64; sizes.len()];
    let mut index = 0u64;
    for _ in 0..total {
        if !f(&tuple, index) {
            return;
        }
        // Odometer with the LAST coordinate fastest.
        for pos in (0..sizes.len()).rev() {
            tuple[pos] += 1;
            index += strides[pos];
            if tuple[pos] < sizes[pos] {
                break;
            }
            index -= tuple[pos] * strides[pos];
            tuple[pos] = 0;
        }
    }
}

impl FiniteFunction {
    /// Builds a function from an explicit table, validating length and range.
    pub fn new(
        input_slots: Vec<Slot>,
        output_alphabet: Alphabet,
        table: Vec<u64>,
    ) -> Result<FiniteFunction, TableError> {
        let expected = domain_size(&input_slots);
        if table.len() as u64 != expected {
            return Err(TableError::TableLength {
                expected,
                actual: table.len() as u64,
            });
        }
        for (position, &value) in table.iter().enumerate() {
            if !output_alphabet.contains(value) {
                return Err(TableError::EntryRange {
                    position,
                    value,
                    size: output_alphabet.size(),
                });
            }
        }
        Ok(FiniteFunction {
            input_slots,
            output_alphabet,
            table,
        })
    }

    /// Tabulates `f` over the whole input space. Panics if `f` ever
    /// returns a symbol outside the output alphabet.
    pub fn tabulate(
        input_slots: Vec<Slot>,
        output_alphabet: Alphabet,
        mut f: impl FnMut(&[u64]) -> u64,
    ) -> FiniteFunction {
        let sizes: Vec<u64> = input_slots.iter().map(|s| s.alphabet.size()).collect();
        let mut table = Vec::with_capacity(domain_size(&input_slots) as usize);
        for_each_tuple(&sizes, |tuple| {
            let value = f(tuple);
            assert!(
                output_alphabet.contains(value),
                "tabulated value {value} outside output alphabet of size {}",
                output_alphabet.size()
            );
            table.push(value);
        });
        FiniteFunction {
            input_slots,
            output_alphabet,
            table,
        }
    }

    /// The constant function with no inputs.
    pub fn constant(output_alphabet: Alphabet, value: u64) -> FiniteFunction {
        assert!(output_alphabet.contains(value));
        FiniteFunction {
            input_slots: Vec::new(),
            output_alphabet,
            table: vec![value],
        }
    }

    pub fn input_slots(&self) -> &[Slot] {
        &self.input_slots
    }

    pub fn output_alphabet(&self) -> Alphabet {
        self.output_alphabet
    }

    pub fn table(&self) -> &[u64] {
        &self.table
    }

    pub fn slot_sizes(&self) -> Vec<u64> {
        self.input_slots.iter().map(|s| s.alphabet.size()).collect()
    }

    pub fn domain_size(&self) -> u64 {
        domain_size(&self.input_slots)
    }

    /// Looks up the value at `args`.
    pub fn evaluate(&self, args: &[u64]) -> Result<u64, EvalError> {
        if args.len() != self.input_slots.len() {
            return Err(EvalError::Arity {
                expected: self.input_slots.len(),
                actual: args.len(),
            });
        }
        let mut index = 0u64;
        let mut stride = 1u64;
        for (position, (&value, slot)) in args.iter().zip(&self.input_slots).enumerate() {
            if !slot.alphabet.contains(value) {
                return Err(EvalError::SymbolRange {
                    position,
                    value,
                    size: slot.alphabet.size(),
                });
            }
            index += value * stride;
            stride *= slot.alphabet.size();
        }
        Ok(self.table[index as usize])
    }

    /// Table entry at a precomputed mixed-radix index.
    pub fn value_at_index(&self, index: u64) -> u64 {
        self.table[index as usize]
    }

    /// Partially evaluates the named slot at a fixed symbol, removing it.
    pub fn fix_slot(&self, slot_name: &str, value: u64) -> Result<FiniteFunction, EvalError> {
        let pos = self
            .input_slots
            .iter()
            .position(|s| s.name == slot_name)
            .ok_or_else(|| EvalError::NoSuchSlot(slot_name.to_string()))?;
        if !self.input_slots[pos].alphabet.contains(value) {
            return Err(EvalError::SymbolRange {
                position: pos,
                value,
                size: self.input_slots[pos].alphabet.size(),
            });
        }
        let mut remaining = self.input_slots.clone();
        remaining.remove(pos);
        let fixed = FiniteFunction::tabulate(remaining, self.output_alphabet, |args| {
            let mut full = Vec::with_capacity(args.len() + 1);
            full.extend_from_slice(&args[..pos]);
            full.push(value);
            full.extend_from_slice(&args[pos..]);
            self.evaluate(&full).expect("in-range by construction")
        });
        Ok(fixed)
    }
}

// ---------------------------------------------------------------------------
// Slot-order convention
// ---------------------------------------------------------------------------
//
// Edge function f_e:    in(tail e) edges by edge id, sources at tail(e) by
//                       source id, then one key slot "key:<node>" iff the
//                       code declares a key of size > 1 at tail(e).
// Node decoder g_u:     in(u) edges by edge id, sources at u by source id.
//                       Output: product of required sources by source id,
//                       packed little-endian.
// Index encoder f̂:      all messages by message id, then "key:sender" iff
//                       the key size is > 1. Output: broadcast alphabet.
// Index decoder ĝ_t:    the broadcast symbol, then has-set messages by
//                       message id. Output: product of wants by message id.

/// Expected slot list of the local encoding function of `edge_id`.
pub fn edge_function_slots(
    instance: &NetworkInstance,
    edge_id: &str,
    key: Option<Alphabet>,
) -> Vec<Slot> {
    let edge = instance.edge(edge_id).expect("edge exists");
    let mut slots = Vec::new();
    for e in instance.in_edges(&edge.tail) {
        slots.push(Slot::new(e.id.clone(), e.alphabet));
    }
    for s in instance.sources_at(&edge.tail) {
        slots.push(Slot::new(s.id.clone(), s.alphabet));
    }
    if let Some(k) = key {
        if k.size() > 1 {
            slots.push(Slot::new(node_key_slot_name(&edge.tail), k));
        }
    }
    slots
}

/// Expected slot list of the decoder of destination node `node`.
pub fn node_decoder_slots(instance: &NetworkInstance, node: &str) -> Vec<Slot> {
    let mut slots = Vec::new();
    for e in instance.in_edges(node) {
        slots.push(Slot::new(e.id.clone(), e.alphabet));
    }
    for s in instance.sources_at(node) {
        slots.push(Slot::new(s.id.clone(), s.alphabet));
    }
    slots
}

/// Output alphabet of the decoder of `node`: the mixed-radix product of
/// the sources it must decode, sorted by source id.
pub fn node_decoder_output(instance: &NetworkInstance, node: &str) -> Alphabet {
    let size = instance
        .required_sources(node)
        .iter()
        .fold(1u64, |acc, s| acc.saturating_mul(s.alphabet.size()));
    Alphabet::new(size)
}

/// Expected slot list of an index encoder.
pub fn index_encoder_slots(instance: &IndexInstance, key: Option<Alphabet>) -> Vec<Slot> {
    let mut slots: Vec<Slot> = instance
        .messages_sorted()
        .iter()
        .map(|m| Slot::new(m.id.clone(), m.alphabet))
        .collect();
    if let Some(k) = key {
        if k.size() > 1 {
            slots.push(Slot::new(SENDER_KEY_SLOT, k));
        }
    }
    slots
}

/// Expected slot list of the decoder of `receiver_id`.
pub fn index_decoder_slots(instance: &IndexInstance, receiver_id: &str) -> Vec<Slot> {
    let receiver = instance.receiver(receiver_id).expect("receiver exists");
    let mut slots = vec![Slot::new(BROADCAST_SLOT, instance.broadcast_alphabet)];
    for m in &receiver.has {
        let message = instance.message(m).expect("message exists");
        slots.push(Slot::new(message.id.clone(), message.alphabet));
    }
    slots
}

/// Output alphabet of the decoder of `receiver_id`: the mixed-radix
/// product of its wanted messages, sorted by message id.
pub fn index_decoder_output(instance: &IndexInstance, receiver_id: &str) -> Alphabet {
    let receiver = instance.receiver(receiver_id).expect("receiver exists");
    let size = receiver
        .wants
        .iter()
        .map(|m| instance.message(m).expect("message exists").alphabet.size())
        .fold(1u64, u64::saturating_mul);
    Alphabet::new(size)
}

/// The full input list every global encoding function ranges over: all
/// sources sorted by id, then one key slot per node sorted by node id.
/// Nodes with deterministic encoders get a slot of size 1.
pub fn global_input_slots(
    instance: &NetworkInstance,
    key_alphabets: &BTreeMap<String, Alphabet>,
) -> Vec<Slot> {
    let mut slots = Vec::new();
    let mut sources: Vec<_> = instance.sources.iter().collect();
    sources.sort_by(|a, b| a.id.cmp(&b.id));
    for s in sources {
        slots.push(Slot::new(s.id.clone(), s.alphabet));
    }
    let mut nodes: Vec<&String> = instance.nodes.iter().collect();
    nodes.sort();
    for n in nodes {
        let key = key_alphabets.get(n.as_str()).copied().unwrap_or(Alphabet::TRIVIAL);
        slots.push(Slot::new(node_key_slot_name(n), key));
    }
    slots
}

/// Computes the global encoding function of every edge: the symbol the
/// edge carries as a function of all sources and all node keys, obtained
/// by substituting local functions in topological order.
pub fn global_encodings(
    instance: &NetworkInstance,
    code: &NetworkCode,
) -> Result<BTreeMap<String, FiniteFunction>, CodeMismatchError> {
    crate::translate::check_network_code(instance, code)?;
    let order = crate::model::topological_order(instance)
        .map_err(|_| CodeMismatchError::new("instance graph is cyclic"))?;

    let slots = global_input_slots(instance, &code.key_alphabets);
    let sizes: Vec<u64> = slots.iter().map(|s| s.alphabet.size()).collect();
    let total = sizes.iter().fold(1u64, |a, s| a.saturating_mul(*s));
    // Positions are assigned structurally: the first |sources| slots are
    // the sources sorted by id, then one key slot per node sorted by node
    // id. Name lookup would be ambiguous on augmented instances, where a
    // key source "key:v" shadows node v's key slot of the same name.
    let mut sorted_source_ids: Vec<&str> =
        instance.sources.iter().map(|s| s.id.as_str()).collect();
    sorted_source_ids.sort_unstable();
    let source_position: BTreeMap<&str, usize> = sorted_source_ids
        .iter()
        .enumerate()
        .map(|(i, id)| (*id, i))
        .collect();
    let mut sorted_nodes: Vec<&str> = instance.nodes.iter().map(|n| n.as_str()).collect();
    sorted_nodes.sort_unstable();
    let key_position: BTreeMap<&str, usize> = sorted_nodes
        .iter()
        .enumerate()
        .map(|(i, n)| (*n, instance.sources.len() + i))
        .collect();

    let mut globals: BTreeMap<String, FiniteFunction> = BTreeMap::new();
    for edge_id in &order {
        let edge = instance.edge(edge_id).expect("edge exists");
        let local = &code.edge_functions[edge_id];

        // Each local argument either reads an already-computed global
        // table (in-edge) or projects one global input slot.
        enum Arg<'a> {
            Edge(&'a FiniteFunction),
            Input(usize),
        }
        let mut args = Vec::new();
        for e in instance.in_edges(&edge.tail) {
            args.push(Arg::Edge(&globals[&e.id]));
        }
        for s in instance.sources_at(&edge.tail) {
            args.push(Arg::Input(source_position[s.id.as_str()]));
        }
        if code.key_alphabet(&edge.tail).size() > 1 {
            args.push(Arg::Input(key_position[edge.tail.as_str()]));
        }

        let mut table = Vec::with_capacity(total as usize);
        let mut arg_values = vec![0u64; args.len()];
        let mut index = 0u64;
        for_each_tuple(&sizes, |tuple| {
            for (v, arg) in arg_values.iter_mut().zip(&args) {
                *v = match arg {
                    Arg::Edge(g) => g.value_at_index(index),
                    Arg::Input(pos) => tuple[*pos],
                };
            }
            table.push(local.evaluate(&arg_values).expect("slots match by check"));
            index += 1;
        });
        globals.insert(
            edge_id.clone(),
            FiniteFunction {
                input_slots: slots.clone(),
                output_alphabet: edge.alphabet,
                table,
            },
        );
    }
    Ok(globals)
}
