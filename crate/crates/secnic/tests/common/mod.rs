//! Shared fixtures and helpers for the integration suites.
#![allow(dead_code)]

use std::collections::BTreeMap;

use secnic::model::{
    Edge, IndexEavesdropper, IndexInstance, Message, NetworkEavesdropper, NetworkInstance,
    Receiver, Source,
};
use secnic::tables::{
    edge_function_slots, index_decoder_slots, index_encoder_slots, node_decoder_slots,
    node_key_slot_name, unpack_mixed_radix, FiniteFunction,
};
use secnic::translate::{IndexCode, NetworkCode};
use secnic::Alphabet;

pub fn alpha(n: u64) -> Alphabet {
    Alphabet::new(n)
}

/// Deterministic splitmix64 stream; enough randomness for test fuzzing
/// without an RNG dependency.
pub struct SplitMix64(u64);

impl SplitMix64 {
    pub fn new(seed: u64) -> SplitMix64 {
        SplitMix64(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.next_u64() % n
    }

    pub fn permutation(&mut self, n: u64) -> Vec<u64> {
        let mut p: Vec<u64> = (0..n).collect();
        for i in (1..p.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            p.swap(i, j);
        }
        p
    }
}

pub fn invert(perm: &[u64]) -> Vec<u64> {
    let mut inv = vec![0u64; perm.len()];
    for (i, &v) in perm.iter().enumerate() {
        inv[v as usize] = i as u64;
    }
    inv
}

pub fn corpus_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("corpus")
        .join(name)
}

pub fn read_corpus(name: &str) -> String {
    std::fs::read_to_string(corpus_path(name)).expect("corpus file exists")
}

// ---------------------------------------------------------------------------
// Fixtures
// ---------------------------------------------------------------------------

pub fn edge(id: &str, tail: &str, head: &str, size: u64) -> Edge {
    Edge {
        id: id.into(),
        tail: tail.into(),
        head: head.into(),
        alphabet: alpha(size),
    }
}

pub fn source(id: &str, origin: &str, size: u64, destinations: &[&str]) -> Source {
    Source {
        id: id.into(),
        origin: origin.into(),
        alphabet: alpha(size),
        destinations: destinations.iter().map(|s| s.to_string()).collect(),
    }
}

pub fn net_eav(id: &str, taps: &[&str], targets: &[&str]) -> NetworkEavesdropper {
    NetworkEavesdropper {
        id: id.into(),
        tapped_edges: taps.iter().map(|s| s.to_string()).collect(),
        target_sources: targets.iter().map(|s| s.to_string()).collect(),
    }
}

pub fn idx_eav(id: &str, targets: &[&str], side: &[&str]) -> IndexEavesdropper {
    IndexEavesdropper {
        id: id.into(),
        side_info: side.iter().map(|s| s.to_string()).collect(),
        target_messages: targets.iter().map(|s| s.to_string()).collect(),
    }
}

pub fn receiver(id: &str, wants: &[&str], has: &[&str]) -> Receiver {
    Receiver {
        id: id.into(),
        wants: wants.iter().map(|s| s.to_string()).collect(),
        has: has.iter().map(|s| s.to_string()).collect(),
    }
}

/// Parallel edges s->t with a one-time-pad code; the eavesdropper taps
/// only the key-bearing edge.
pub fn otp_instance() -> NetworkInstance {
    NetworkInstance {
        block_size_n: 1,
        nodes: vec!["s".into(), "t".into()],
        edges: vec![edge("e1", "s", "t", 2), edge("e2", "s", "t", 2)],
        sources: vec![source("X", "s", 2, &["t"])],
        eavesdroppers: vec![net_eav("r1", &["e1"], &["X"])],
    }
}

pub fn otp_code(i: &NetworkInstance) -> NetworkCode {
    NetworkCode {
        edge_functions: [
            (
                "e1".to_string(),
                FiniteFunction::tabulate(edge_function_slots(i, "e1", Some(alpha(2))), alpha(2), |t| t[1]),
            ),
            (
                "e2".to_string(),
                FiniteFunction::tabulate(edge_function_slots(i, "e2", Some(alpha(2))), alpha(2), |t| {
                    (t[0] + t[1]) % 2
                }),
            ),
        ]
        .into(),
        node_decoders: [(
            "t".to_string(),
            FiniteFunction::tabulate(node_decoder_slots(i, "t"), alpha(2), |t| (t[0] + t[1]) % 2),
        )]
        .into(),
        key_alphabets: [("s".to_string(), alpha(2))].into(),
    }
}

pub fn two_message_index(eavesdroppers: Vec<IndexEavesdropper>) -> IndexInstance {
    IndexInstance {
        block_size_n: 1,
        broadcast_alphabet: alpha(2),
        messages: vec![
            Message {
                id: "m1".into(),
                alphabet: alpha(2),
            },
            Message {
                id: "m2".into(),
                alphabet: alpha(2),
            },
        ],
        receivers: vec![receiver("t1", &["m1"], &["m2"])],
        eavesdroppers,
    }
}

/// The xor code for [`two_message_index`]: b = m1 + m2, decoder b + m2.
pub fn xor_index_code(instance: &IndexInstance) -> IndexCode {
    IndexCode {
        encoder: FiniteFunction::tabulate(
            index_encoder_slots(instance, None),
            instance.broadcast_alphabet,
            |t| (t[0] + t[1]) % 2,
        ),
        decoders: [(
            "t1".to_string(),
            FiniteFunction::tabulate(index_decoder_slots(instance, "t1"), alpha(2), |t| {
                (t[0] + t[1]) % 2
            }),
        )]
        .into(),
        key_alphabet: Alphabet::TRIVIAL,
    }
}

// ---------------------------------------------------------------------------
// Independent oracle: naive fixpoint network simulation
// ---------------------------------------------------------------------------

/// Evaluates every edge symbol by repeatedly sweeping the edge list and
/// evaluating any edge whose inputs are all known. Intentionally written
/// without the library's topological order or plan machinery so it can
/// serve as an independent oracle for global encodings and the verifier.
pub fn naive_edge_symbols(
    instance: &NetworkInstance,
    code: &NetworkCode,
    inputs: &BTreeMap<String, u64>,
) -> BTreeMap<String, u64> {
    let mut symbols: BTreeMap<String, u64> = BTreeMap::new();
    loop {
        let mut progressed = false;
        for e in &instance.edges {
            if symbols.contains_key(&e.id) {
                continue;
            }
            let in_edges = instance.in_edges(&e.tail);
            if !in_edges.iter().all(|p| symbols.contains_key(&p.id)) {
                continue;
            }
            let mut args: Vec<u64> = in_edges.iter().map(|p| symbols[&p.id]).collect();
            for s in instance.sources_at(&e.tail) {
                args.push(inputs[&s.id]);
            }
            if code.key_alphabet(&e.tail).size() > 1 {
                args.push(inputs[&node_key_slot_name(&e.tail)]);
            }
            let value = code.edge_functions[&e.id].evaluate(&args).expect("arity");
            symbols.insert(e.id.clone(), value);
            progressed = true;
        }
        if symbols.len() == instance.edges.len() {
            return symbols;
        }
        assert!(progressed, "cyclic instance in naive simulation");
    }
}

// ---------------------------------------------------------------------------
// Symbol relabelings
// ---------------------------------------------------------------------------

/// Conjugates a network code by random per-variable symbol bijections:
/// edge symbols, source symbols, and key symbols. Decoder outputs are
/// re-encoded so the relabelled code decodes the raw sources; all verifier
/// verdicts must be invariant under this transformation.
pub fn relabel_network_code(
    instance: &NetworkInstance,
    code: &NetworkCode,
    seed: u64,
) -> NetworkCode {
    let mut rng = SplitMix64::new(seed);
    let mut edge_perm: BTreeMap<String, Vec<u64>> = BTreeMap::new();
    for e in &instance.edges {
        edge_perm.insert(e.id.clone(), rng.permutation(e.alphabet.size()));
    }
    let mut src_perm: BTreeMap<String, Vec<u64>> = BTreeMap::new();
    for s in &instance.sources {
        src_perm.insert(s.id.clone(), rng.permutation(s.alphabet.size()));
    }
    let mut key_perm: BTreeMap<String, Vec<u64>> = BTreeMap::new();
    for (node, k) in &code.key_alphabets {
        if k.size() > 1 {
            key_perm.insert(node.clone(), rng.permutation(k.size()));
        }
    }

    let mut edge_functions = BTreeMap::new();
    for e in &instance.edges {
        let f = &code.edge_functions[&e.id];
        let in_edges = instance.in_edges(&e.tail);
        let sources = instance.sources_at(&e.tail);
        let n_in = in_edges.len();
        let n_src = sources.len();
        let has_key = code.key_alphabet(&e.tail).size() > 1;
        let pi = &edge_perm[&e.id];
        let inv_in: Vec<Vec<u64>> = in_edges.iter().map(|p| invert(&edge_perm[&p.id])).collect();
        let inv_src: Vec<Vec<u64>> = sources.iter().map(|s| invert(&src_perm[&s.id])).collect();
        let inv_key = has_key.then(|| invert(&key_perm[&e.tail]));
        let new = FiniteFunction::tabulate(f.input_slots().to_vec(), f.output_alphabet(), |t| {
            let mut args = Vec::with_capacity(t.len());
            for j in 0..n_in {
                args.push(inv_in[j][t[j] as usize]);
            }
            for j in 0..n_src {
                args.push(inv_src[j][t[n_in + j] as usize]);
            }
            if let Some(inv) = &inv_key {
                args.push(inv[t[n_in + n_src] as usize]);
            }
            pi[f.evaluate(&args).expect("arity") as usize]
        });
        edge_functions.insert(e.id.clone(), new);
    }

    let mut node_decoders = BTreeMap::new();
    for (node, g) in &code.node_decoders {
        let in_edges = instance.in_edges(node);
        let sources = instance.sources_at(node);
        let n_in = in_edges.len();
        let required = instance.required_sources(node);
        let required_sizes: Vec<u64> = required.iter().map(|s| s.alphabet.size()).collect();
        let out_perm: Vec<Vec<u64>> = required.iter().map(|s| src_perm[&s.id].clone()).collect();
        let inv_in: Vec<Vec<u64>> = in_edges.iter().map(|p| invert(&edge_perm[&p.id])).collect();
        let inv_src: Vec<Vec<u64>> = sources.iter().map(|s| invert(&src_perm[&s.id])).collect();
        let new = FiniteFunction::tabulate(g.input_slots().to_vec(), g.output_alphabet(), |t| {
            let mut args = Vec::with_capacity(t.len());
            for j in 0..n_in {
                args.push(inv_in[j][t[j] as usize]);
            }
            for (j, inv) in inv_src.iter().enumerate() {
                args.push(inv[t[n_in + j] as usize]);
            }
            let value = g.evaluate(&args).expect("arity");
            let parts = unpack_mixed_radix(value, &required_sizes);
            let mut packed = 0u64;
            let mut stride = 1u64;
            for ((p, perm), size) in parts.iter().zip(&out_perm).zip(&required_sizes) {
                packed += perm[*p as usize] * stride;
                stride *= size;
            }
            packed
        });
        node_decoders.insert(node.clone(), new);
    }

    NetworkCode {
        edge_functions,
        node_decoders,
        key_alphabets: code.key_alphabets.clone(),
    }
}

/// Conjugates an index code by random bijections on the broadcast symbol,
/// each message, and the sender key, re-encoding decoder outputs so the
/// relabelled code still emits raw message values.
pub fn relabel_index_code(instance: &IndexInstance, code: &IndexCode, seed: u64) -> IndexCode {
    let mut rng = SplitMix64::new(seed);
    let beta = rng.permutation(instance.broadcast_alphabet.size());
    let inv_beta = invert(&beta);
    let mut msg_perm: BTreeMap<String, Vec<u64>> = BTreeMap::new();
    for m in &instance.messages {
        msg_perm.insert(m.id.clone(), rng.permutation(m.alphabet.size()));
    }
    let key_perm = (code.key_alphabet.size() > 1).then(|| rng.permutation(code.key_alphabet.size()));

    let msgs = instance.messages_sorted();
    let inv_msgs: Vec<Vec<u64>> = msgs.iter().map(|m| invert(&msg_perm[&m.id])).collect();
    let inv_key = key_perm.as_ref().map(|p| invert(p));
    let encoder = FiniteFunction::tabulate(
        code.encoder.input_slots().to_vec(),
        code.encoder.output_alphabet(),
        |t| {
            let mut args = Vec::with_capacity(t.len());
            for (j, inv) in inv_msgs.iter().enumerate() {
                args.push(inv[t[j] as usize]);
            }
            if let Some(inv) = &inv_key {
                args.push(inv[t[msgs.len()] as usize]);
            }
            beta[code.encoder.evaluate(&args).expect("arity") as usize]
        },
    );

    let mut decoders = BTreeMap::new();
    for r in &instance.receivers {
        let g = &code.decoders[&r.id];
        let has: Vec<&String> = r.has.iter().collect();
        let inv_has: Vec<Vec<u64>> = has.iter().map(|m| invert(&msg_perm[m.as_str()])).collect();
        let wants: Vec<&String> = r.wants.iter().collect();
        let wants_sizes: Vec<u64> = wants
            .iter()
            .map(|m| instance.message(m).unwrap().alphabet.size())
            .collect();
        let out_perm: Vec<Vec<u64>> = wants.iter().map(|m| msg_perm[m.as_str()].clone()).collect();
        let new = FiniteFunction::tabulate(g.input_slots().to_vec(), g.output_alphabet(), |t| {
            let mut args = Vec::with_capacity(t.len());
            args.push(inv_beta[t[0] as usize]);
            for (j, inv) in inv_has.iter().enumerate() {
                args.push(inv[t[1 + j] as usize]);
            }
            let value = g.evaluate(&args).expect("arity");
            let parts = unpack_mixed_radix(value, &wants_sizes);
            let mut packed = 0u64;
            let mut stride = 1u64;
            for ((p, perm), size) in parts.iter().zip(&out_perm).zip(&wants_sizes) {
                packed += perm[*p as usize] * stride;
                stride *= size;
            }
            packed
        });
        decoders.insert(r.id.clone(), new);
    }

    IndexCode {
        encoder,
        decoders,
        key_alphabet: code.key_alphabet,
    }
}

/// Specialises a code by pinning one node's key to a constant and dropping
/// the key from the declaration.
pub fn fix_network_key(code: &NetworkCode, instance: &NetworkInstance, node: &str, value: u64) -> NetworkCode {
    let mut edge_functions = BTreeMap::new();
    for e in &instance.edges {
        let f = &code.edge_functions[&e.id];
        let fixed = if e.tail == node && code.key_alphabet(node).size() > 1 {
            f.fix_slot(&node_key_slot_name(node), value).expect("key slot exists")
        } else {
            f.clone()
        };
        edge_functions.insert(e.id.clone(), fixed);
    }
    let mut key_alphabets = code.key_alphabets.clone();
    key_alphabets.remove(node);
    NetworkCode {
        edge_functions,
        node_decoders: code.node_decoders.clone(),
        key_alphabets,
    }
}
