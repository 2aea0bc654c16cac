//! Regenerates the bundled corpus under `corpus/` in canonical form.
//!
//! Run from the crate root: `cargo run -p secnic --example gen_corpus`

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use secnic::format;
use secnic::model::{
    Edge, IndexEavesdropper, IndexInstance, Message, NetworkEavesdropper, NetworkInstance,
    Receiver, Source,
};
use secnic::tables::{edge_function_slots, node_decoder_slots, FiniteFunction};
use secnic::translate::NetworkCode;
use secnic::Alphabet;

fn alpha(n: u64) -> Alphabet {
    Alphabet::new(n)
}

fn msg(id: &str) -> Message {
    Message {
        id: id.into(),
        alphabet: alpha(2),
    }
}

fn receiver(id: &str, wants: &[&str], has: &[&str]) -> Receiver {
    Receiver {
        id: id.into(),
        wants: wants.iter().map(|s| s.to_string()).collect(),
        has: has.iter().map(|s| s.to_string()).collect(),
    }
}

fn eav(id: &str, targets: &[&str], side: &[&str]) -> IndexEavesdropper {
    IndexEavesdropper {
        id: id.into(),
        side_info: side.iter().map(|s| s.to_string()).collect(),
        target_messages: targets.iter().map(|s| s.to_string()).collect(),
    }
}

fn index_instance(
    k: usize,
    receivers: Vec<Receiver>,
    eavesdroppers: Vec<IndexEavesdropper>,
) -> IndexInstance {
    IndexInstance {
        block_size_n: 1,
        broadcast_alphabet: alpha(2),
        messages: (1..=k).map(|i| msg(&format!("m{i}"))).collect(),
        receivers,
        eavesdroppers,
    }
}

fn edge(id: &str, tail: &str, head: &str) -> Edge {
    Edge {
        id: id.into(),
        tail: tail.into(),
        head: head.into(),
        alphabet: alpha(2),
    }
}

fn source(id: &str, origin: &str, destinations: &[&str]) -> Source {
    Source {
        id: id.into(),
        origin: origin.into(),
        alphabet: alpha(2),
        destinations: destinations.iter().map(|s| s.to_string()).collect(),
    }
}

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus");
    fs::create_dir_all(&dir).expect("create corpus dir");
    let write = |name: &str, text: String| {
        fs::write(dir.join(name), text).expect("write corpus file");
        println!("wrote corpus/{name}");
    };

    // ---- Index instances for the feasibility-equivalence corpus ----

    write(
        "twomsg.idx.json",
        format::emit_index_instance(&index_instance(
            2,
            vec![receiver("t1", &["m1"], &["m2"])],
            vec![eav("r1", &["m1"], &[])],
        )),
    );
    // Eavesdropper holds the receiver's side information: infeasible.
    write(
        "twomsg_leak.idx.json",
        format::emit_index_instance(&index_instance(
            2,
            vec![receiver("t1", &["m1"], &["m2"])],
            vec![eav("r1", &["m1"], &["m2"])],
        )),
    );
    // Two bits demanded through a one-bit broadcast: infeasible.
    write(
        "twomsg_capacity.idx.json",
        format::emit_index_instance(&index_instance(
            2,
            vec![receiver("t1", &["m1", "m2"], &[])],
            vec![],
        )),
    );
    write(
        "xorpair.idx.json",
        format::emit_index_instance(&index_instance(
            2,
            vec![receiver("t1", &["m1"], &["m2"]), receiver("t2", &["m2"], &["m1"])],
            vec![eav("r1", &["m2"], &[])],
        )),
    );
    write(
        "twomsg_noeav.idx.json",
        format::emit_index_instance(&index_instance(
            2,
            vec![receiver("t1", &["m1"], &["m2"])],
            vec![],
        )),
    );
    write(
        "xorpair_two_eavs.idx.json",
        format::emit_index_instance(&index_instance(
            2,
            vec![receiver("t1", &["m1"], &["m2"]), receiver("t2", &["m2"], &["m1"])],
            vec![eav("r1", &["m1"], &[]), eav("r2", &["m2"], &[])],
        )),
    );
    write(
        "three_chain.idx.json",
        format::emit_index_instance(&index_instance(
            3,
            vec![receiver("t1", &["m1"], &["m2", "m3"])],
            vec![eav("r1", &["m1"], &[])],
        )),
    );
    write(
        "three_side.idx.json",
        format::emit_index_instance(&index_instance(
            3,
            vec![receiver("t1", &["m1"], &["m3"])],
            vec![eav("r1", &["m1"], &["m2"])],
        )),
    );
    write(
        "three_joint.idx.json",
        format::emit_index_instance(&index_instance(
            3,
            vec![receiver("t1", &["m1"], &["m2", "m3"])],
            vec![eav("r1", &["m1", "m2"], &[])],
        )),
    );
    // A second eavesdropper that matches the receiver's knowledge: infeasible.
    write(
        "twomsg_blocked.idx.json",
        format::emit_index_instance(&index_instance(
            2,
            vec![receiver("t1", &["m1"], &["m2"])],
            vec![eav("r1", &["m1"], &[]), eav("r2", &["m1"], &["m2"])],
        )),
    );
    write(
        "single.idx.json",
        format::emit_index_instance(&index_instance(
            1,
            vec![receiver("t1", &["m1"], &[])],
            vec![],
        )),
    );
    write(
        "pair_protected_side.idx.json",
        format::emit_index_instance(&index_instance(
            2,
            vec![receiver("t1", &["m1"], &["m2"]), receiver("t2", &["m1"], &[])],
            vec![eav("r1", &["m2"], &[])],
        )),
    );

    // ---- Network instances with reference codes ----

    // Parallel-edge one-time pad: eavesdropper taps only the key edge.
    let otp = NetworkInstance {
        block_size_n: 1,
        nodes: vec!["s".into(), "t".into()],
        edges: vec![edge("e1", "s", "t"), edge("e2", "s", "t")],
        sources: vec![source("X", "s", &["t"])],
        eavesdroppers: vec![NetworkEavesdropper {
            id: "r1".into(),
            tapped_edges: ["e1".to_string()].into(),
            target_sources: ["X".to_string()].into(),
        }],
    };
    let otp_code = NetworkCode {
        edge_functions: [
            (
                "e1".to_string(),
                FiniteFunction::tabulate(
                    edge_function_slots(&otp, "e1", Some(alpha(2))),
                    alpha(2),
                    |t| t[1],
                ),
            ),
            (
                "e2".to_string(),
                FiniteFunction::tabulate(
                    edge_function_slots(&otp, "e2", Some(alpha(2))),
                    alpha(2),
                    |t| (t[0] + t[1]) % 2,
                ),
            ),
        ]
        .into(),
        node_decoders: [(
            "t".to_string(),
            FiniteFunction::tabulate(node_decoder_slots(&otp, "t"), alpha(2), |t| {
                (t[0] + t[1]) % 2
            }),
        )]
        .into(),
        key_alphabets: [("s".to_string(), alpha(2))].into(),
    };
    write("otp.net.json", format::emit_network_instance(&otp));
    write("otp.code.json", format::emit_network_code(&otp_code));

    // One shared edge observed by both the decoder and the eavesdropper:
    // the bundled code is decodable but necessarily insecure.
    let shared = NetworkInstance {
        block_size_n: 1,
        nodes: vec!["s".into(), "t".into()],
        edges: vec![edge("e", "s", "t")],
        sources: vec![source("X", "s", &["t"])],
        eavesdroppers: vec![NetworkEavesdropper {
            id: "r1".into(),
            tapped_edges: ["e".to_string()].into(),
            target_sources: ["X".to_string()].into(),
        }],
    };
    let shared_code = NetworkCode {
        edge_functions: [(
            "e".to_string(),
            FiniteFunction::tabulate(edge_function_slots(&shared, "e", None), alpha(2), |t| t[0]),
        )]
        .into(),
        node_decoders: [(
            "t".to_string(),
            FiniteFunction::tabulate(node_decoder_slots(&shared, "t"), alpha(2), |t| t[0]),
        )]
        .into(),
        key_alphabets: BTreeMap::new(),
    };
    write("shared_edge.net.json", format::emit_network_instance(&shared));
    write("shared_edge.code.json", format::emit_network_code(&shared_code));

    // Two-hop relay chain, identity forwarding.
    let chain = NetworkInstance {
        block_size_n: 1,
        nodes: vec!["a".into(), "b".into(), "c".into()],
        edges: vec![edge("e1", "a", "b"), edge("e2", "b", "c")],
        sources: vec![source("X", "a", &["c"])],
        eavesdroppers: vec![],
    };
    let chain_code = NetworkCode {
        edge_functions: [
            (
                "e1".to_string(),
                FiniteFunction::tabulate(edge_function_slots(&chain, "e1", None), alpha(2), |t| {
                    t[0]
                }),
            ),
            (
                "e2".to_string(),
                FiniteFunction::tabulate(edge_function_slots(&chain, "e2", None), alpha(2), |t| {
                    t[0]
                }),
            ),
        ]
        .into(),
        node_decoders: [(
            "c".to_string(),
            FiniteFunction::tabulate(node_decoder_slots(&chain, "c"), alpha(2), |t| t[0]),
        )]
        .into(),
        key_alphabets: BTreeMap::new(),
    };
    write("chain.net.json", format::emit_network_instance(&chain));
    write("chain.code.json", format::emit_network_code(&chain_code));

    // Diamond routing X along the upper path; the lower path pads with
    // the key so the single-edge wiretap on the lower path learns nothing.
    let diamond = NetworkInstance {
        block_size_n: 1,
        nodes: vec!["a".into(), "b".into(), "c".into(), "d".into()],
        edges: vec![
            edge("e1", "a", "b"),
            edge("e2", "a", "c"),
            edge("e3", "b", "d"),
            edge("e4", "c", "d"),
        ],
        sources: vec![source("X", "a", &["d"])],
        eavesdroppers: vec![NetworkEavesdropper {
            id: "r1".into(),
            tapped_edges: ["e2".to_string(), "e4".to_string()].into(),
            target_sources: ["X".to_string()].into(),
        }],
    };
    let key_a = alpha(2);
    let diamond_code = NetworkCode {
        edge_functions: [
            (
                "e1".to_string(),
                FiniteFunction::tabulate(
                    edge_function_slots(&diamond, "e1", Some(key_a)),
                    alpha(2),
                    |t| t[0],
                ),
            ),
            (
                "e2".to_string(),
                FiniteFunction::tabulate(
                    edge_function_slots(&diamond, "e2", Some(key_a)),
                    alpha(2),
                    |t| t[1],
                ),
            ),
            (
                "e3".to_string(),
                FiniteFunction::tabulate(edge_function_slots(&diamond, "e3", None), alpha(2), |t| {
                    t[0]
                }),
            ),
            (
                "e4".to_string(),
                FiniteFunction::tabulate(edge_function_slots(&diamond, "e4", None), alpha(2), |t| {
                    t[0]
                }),
            ),
        ]
        .into(),
        node_decoders: [(
            "d".to_string(),
            FiniteFunction::tabulate(node_decoder_slots(&diamond, "d"), alpha(2), |t| t[0]),
        )]
        .into(),
        key_alphabets: [("a".to_string(), key_a)].into(),
    };
    write("diamond.net.json", format::emit_network_instance(&diamond));
    write("diamond.code.json", format::emit_network_code(&diamond_code));

    // Sanity: every emitted instance validates and every code verifies as
    // documented in the corpus notes.
    let all: BTreeSet<String> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    println!("{} corpus files", all.len());
}
