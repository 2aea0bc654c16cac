//! Exact certification of zero-error decodability and information-theoretic
//! security.
//!
//! All pass/fail decisions are made by exhaustive enumeration with integer
//! counting; floating-point entropy exists only for reporting. Sources,
//! messages and keys are uniform and mutually independent, so a joint
//! distribution is one count per input tuple pushed through finite
//! functions.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::model::{Alphabet, IndexInstance, NetworkInstance};
use crate::tables::{
    self, for_each_tuple, for_each_tuple_lex, global_encodings, node_key_slot_name,
    pack_mixed_radix, FiniteFunction, Slot, SENDER_KEY_SLOT,
};
use crate::translate::{check_index_code, check_network_code, CodeMismatchError, IndexCode, NetworkCode};

/// Hard cap on the number of joint tuples any check may enumerate.
/// Verdicts are certificates; exceeding the budget is an error, never a
/// silent fallback to sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationBudget {
    pub max_joint_tuples: u64,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        EnumerationBudget {
            max_joint_tuples: 1 << 24,
        }
    }
}

impl EnumerationBudget {
    pub fn new(max_joint_tuples: u64) -> Self {
        EnumerationBudget { max_joint_tuples }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("input space of {required} tuples exceeds the enumeration budget of {budget}")]
    SizeBudget { required: u64, budget: u64 },
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("duplicate variable name {0}")]
    DuplicateVariable(String),
    #[error("derived function slot {slot} does not match any declared input")]
    SlotMismatch { slot: String },
    #[error(transparent)]
    CodeMismatch(#[from] CodeMismatchError),
}

/// Result of a single check: pass, or fail with a deterministic witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict<F> {
    Pass,
    Fail(F),
}

impl<F> Verdict<F> {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }

    pub fn failure(&self) -> Option<&F> {
        match self {
            Verdict::Pass => None,
            Verdict::Fail(f) => Some(f),
        }
    }
}

/// A decoder produced the wrong output on `witness` (the lexicographically
/// smallest such input assignment).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeFailure {
    pub entity: String,
    pub witness: Vec<(String, u64)>,
}

/// An eavesdropper's observations are not independent of its targets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecurityFailure {
    pub eavesdropper: String,
}

/// A source cannot be reconstructed from its origin's outgoing edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecoverFailure {
    pub source: String,
}

/// The independent uniform input variables of a network code: all sources
/// sorted by id, then the random key of every node that declares one of
/// size > 1, sorted by node id.
pub fn network_input_slots(
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
        if let Some(k) = key_alphabets.get(n.as_str()) {
            if k.size() > 1 {
                slots.push(Slot::new(node_key_slot_name(n), *k));
            }
        }
    }
    slots
}

/// The independent uniform input variables of an index code: all messages
/// sorted by id, then the sender key if it has size > 1.
pub fn index_input_slots(instance: &IndexInstance, key: Alphabet) -> Vec<Slot> {
    let mut slots: Vec<Slot> = instance
        .messages_sorted()
        .iter()
        .map(|m| Slot::new(m.id.clone(), m.alphabet))
        .collect();
    if key.size() > 1 {
        slots.push(Slot::new(SENDER_KEY_SLOT, key));
    }
    slots
}

/// Joint-table variable name of the symbol carried on an edge.
pub fn edge_variable_name(edge_id: &str) -> String {
    format!("edge:{edge_id}")
}

/// Joint-table variable name of the broadcast symbol.
pub const BROADCAST_VARIABLE: &str = "broadcast";

// ---------------------------------------------------------------------------
// Joint distributions
// ---------------------------------------------------------------------------

#[derive(Debug)]
struct DerivedVar {
    name: String,
    func: FiniteFunction,
    /// `(input position, stride within the function's domain)` per slot
    /// bound to an input; absent size-1 slots contribute nothing.
    gather: Vec<(usize, u64)>,
}

/// The exact joint distribution of named variables induced by uniform
/// independent inputs pushed through finite functions. Counts are integers;
/// `total` equals the product of the input alphabet sizes.
#[derive(Debug)]
pub struct JointTable {
    inputs: Vec<(String, Alphabet)>,
    input_sizes: Vec<u64>,
    derived: Vec<DerivedVar>,
    total: u64,
}

enum VarRef {
    Input(usize),
    Derived(usize),
}

/// Builds the joint table of `inputs` (uniform, independent, one count per
/// tuple) extended by the `derived` functions of those inputs.
pub fn build_joint(
    inputs: Vec<(String, Alphabet)>,
    derived: Vec<(String, FiniteFunction)>,
    budget: &EnumerationBudget,
) -> Result<JointTable, VerifyError> {
    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    for (pos, (name, _)) in inputs.iter().enumerate() {
        if seen.insert(name.as_str(), pos).is_some() {
            return Err(VerifyError::DuplicateVariable(name.clone()));
        }
    }
    let total = inputs
        .iter()
        .fold(1u64, |a, (_, al)| a.saturating_mul(al.size()));
    if total > budget.max_joint_tuples {
        return Err(VerifyError::SizeBudget {
            required: total,
            budget: budget.max_joint_tuples,
        });
    }

    let mut vars = Vec::with_capacity(derived.len());
    for (name, func) in derived {
        if seen.contains_key(name.as_str()) || vars.iter().any(|v: &DerivedVar| v.name == name) {
            return Err(VerifyError::DuplicateVariable(name));
        }
        let mut gather = Vec::new();
        let mut stride = 1u64;
        for slot in func.input_slots() {
            // Size-1 slots carry no information and always read symbol 0;
            // skipping them before the name lookup also sidesteps the
            // augmented-instance case where a source named "key:v" sits
            // next to node v's trivial key slot of the same name.
            if slot.alphabet.size() == 1 {
                stride *= slot.alphabet.size();
                continue;
            }
            match seen.get(slot.name.as_str()) {
                Some(&pos) if inputs[pos].1 == slot.alphabet => gather.push((pos, stride)),
                _ => {
                    return Err(VerifyError::SlotMismatch {
                        slot: slot.name.clone(),
                    });
                }
            }
            stride *= slot.alphabet.size();
        }
        vars.push(DerivedVar { name, func, gather });
    }

    let input_sizes = inputs.iter().map(|(_, a)| a.size()).collect();
    Ok(JointTable {
        inputs,
        input_sizes,
        derived: vars,
        total,
    })
}

impl JointTable {
    pub fn total(&self) -> u64 {
        self.total
    }

    /// All variables with their alphabets, inputs first.
    pub fn variables(&self) -> Vec<(String, Alphabet)> {
        let mut v = self.inputs.clone();
        for d in &self.derived {
            v.push((d.name.clone(), d.func.output_alphabet()));
        }
        v
    }

    fn resolve(&self, name: &str) -> Result<VarRef, VerifyError> {
        if let Some(pos) = self.inputs.iter().position(|(n, _)| n == name) {
            return Ok(VarRef::Input(pos));
        }
        if let Some(pos) = self.derived.iter().position(|d| d.name == name) {
            return Ok(VarRef::Derived(pos));
        }
        Err(VerifyError::UnknownVariable(name.to_string()))
    }

    fn alphabet_of(&self, var: &VarRef) -> Alphabet {
        match var {
            VarRef::Input(p) => self.inputs[*p].1,
            VarRef::Derived(p) => self.derived[*p].func.output_alphabet(),
        }
    }

    fn value_of(&self, var: &VarRef, tuple: &[u64]) -> u64 {
        match var {
            VarRef::Input(p) => tuple[*p],
            VarRef::Derived(p) => {
                let d = &self.derived[*p];
                let index: u64 = d.gather.iter().map(|&(pos, stride)| tuple[pos] * stride).sum();
                d.func.value_at_index(index)
            }
        }
    }

    /// Resolves a set of names into canonical (sorted, deduplicated) refs.
    fn group(&self, names: &[String]) -> Result<Vec<VarRef>, VerifyError> {
        let mut sorted: Vec<&String> = names.iter().collect();
        sorted.sort();
        sorted.dedup();
        sorted.iter().map(|n| self.resolve(n)).collect()
    }

    /// Exact marginal counts over the named variables (sorted, deduplicated).
    pub fn marginal_counts(
        &self,
        names: &[String],
    ) -> Result<BTreeMap<Vec<u64>, u64>, VerifyError> {
        let group = self.group(names)?;
        let mut counts: BTreeMap<Vec<u64>, u64> = BTreeMap::new();
        for_each_tuple(&self.input_sizes, |tuple| {
            let key: Vec<u64> = group.iter().map(|v| self.value_of(v, tuple)).collect();
            *counts.entry(key).or_insert(0) += 1;
        });
        Ok(counts)
    }
}

/// Exact independence test: true iff `count(a,b) * total == count(a) * count(b)`
/// for every value pair, decided in integer arithmetic.
pub fn check_independent(
    joint: &JointTable,
    group_a: &[String],
    group_b: &[String],
) -> Result<bool, VerifyError> {
    let a = joint.group(group_a)?;
    let b = joint.group(group_b)?;

    let a_space = a
        .iter()
        .fold(1u128, |acc, v| acc * u128::from(joint.alphabet_of(v).size()));
    let mut counts_a: HashMap<u128, u64> = HashMap::new();
    let mut counts_b: HashMap<u128, u64> = HashMap::new();
    let mut counts_ab: HashMap<u128, u64> = HashMap::new();

    for_each_tuple(&joint.input_sizes, |tuple| {
        let mut key_a = 0u128;
        let mut stride = 1u128;
        for v in &a {
            key_a += u128::from(joint.value_of(v, tuple)) * stride;
            stride *= u128::from(joint.alphabet_of(v).size());
        }
        let mut key_b = 0u128;
        stride = 1;
        for v in &b {
            key_b += u128::from(joint.value_of(v, tuple)) * stride;
            stride *= u128::from(joint.alphabet_of(v).size());
        }
        *counts_a.entry(key_a).or_insert(0) += 1;
        *counts_b.entry(key_b).or_insert(0) += 1;
        *counts_ab.entry(key_a + key_b * a_space).or_insert(0) += 1;
    });

    // Every observed pair must satisfy the product rule, and the joint
    // support must be the full product of the marginal supports (a missing
    // pair with both marginals positive is a zero cell, hence dependence).
    if counts_ab.len() as u128 != counts_a.len() as u128 * counts_b.len() as u128 {
        return Ok(false);
    }
    let total = u128::from(joint.total);
    for (&key, &c_ab) in &counts_ab {
        let c_a = counts_a[&(key % a_space)];
        let c_b = counts_b[&(key / a_space)];
        if u128::from(c_ab) * total != u128::from(c_a) * u128::from(c_b) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Conditional entropy `H(A | B)` in bits from exact rational counts.
/// Reporting only: no pass/fail decision may use this value.
pub fn conditional_entropy_bits(
    joint: &JointTable,
    group_a: &[String],
    group_b: &[String],
) -> Result<f64, VerifyError> {
    let a = joint.group(group_a)?;
    let b = joint.group(group_b)?;

    let mut counts_b: HashMap<u128, u64> = HashMap::new();
    let mut counts_ab: HashMap<(u128, u128), u64> = HashMap::new();
    for_each_tuple(&joint.input_sizes, |tuple| {
        let mut key_a = 0u128;
        let mut stride = 1u128;
        for v in &a {
            key_a += u128::from(joint.value_of(v, tuple)) * stride;
            stride *= u128::from(joint.alphabet_of(v).size());
        }
        let mut key_b = 0u128;
        stride = 1;
        for v in &b {
            key_b += u128::from(joint.value_of(v, tuple)) * stride;
            stride *= u128::from(joint.alphabet_of(v).size());
        }
        *counts_b.entry(key_b).or_insert(0) += 1;
        *counts_ab.entry((key_a, key_b)).or_insert(0) += 1;
    });

    // H(A|B) = H(AB) - H(B) = (sum_b c_b lg c_b - sum_ab c_ab lg c_ab) / N
    let lg = |c: u64| (c as f64) * (c as f64).log2();
    let sum_b: f64 = counts_b.values().map(|&c| lg(c)).sum();
    let sum_ab: f64 = counts_ab.values().map(|&c| lg(c)).sum();
    Ok((sum_b - sum_ab) / joint.total as f64)
}

// ---------------------------------------------------------------------------
// Simulation plans
// ---------------------------------------------------------------------------
//
// A plan compiles an instance (plus key sizes) into flat per-edge and
// per-decoder argument-gathering programs over raw tables, so the verifier
// and the exhaustive search share one exact evaluation path.

pub(crate) enum PlanArg {
    /// Position in the input tuple.
    Input(usize),
    /// Topological position of an already-evaluated edge.
    Edge(usize),
}

pub(crate) struct EdgeStep {
    pub args: Vec<PlanArg>,
    pub strides: Vec<u64>,
    pub table: usize,
}

pub(crate) struct DecoderStep {
    pub entity: String,
    pub args: Vec<PlanArg>,
    pub strides: Vec<u64>,
    pub table: usize,
    pub required: Vec<usize>,
    pub required_sizes: Vec<u64>,
}

/// Canonical table layout: edge tables sorted by edge id, then decoder
/// tables sorted by node id. The search enumerates candidates in exactly
/// this concatenation order.
pub(crate) struct NetworkPlan {
    pub input_slots: Vec<Slot>,
    pub input_sizes: Vec<u64>,
    pub total: u64,
    pub edge_steps: Vec<EdgeStep>,
    pub decoder_steps: Vec<DecoderStep>,
    pub edges_sorted: Vec<String>,
    pub decoder_nodes: Vec<String>,
    /// `(table length, output radix)` per table in canonical layout.
    pub table_shapes: Vec<(u64, u64)>,
    pub topo_order: Vec<String>,
}

impl NetworkPlan {
    pub fn new(
        instance: &NetworkInstance,
        key_alphabets: &BTreeMap<String, Alphabet>,
    ) -> Result<NetworkPlan, VerifyError> {
        let input_slots = network_input_slots(instance, key_alphabets);
        let mut position: BTreeMap<&str, usize> = BTreeMap::new();
        for (pos, s) in input_slots.iter().enumerate() {
            if position.insert(s.name.as_str(), pos).is_some() {
                return Err(VerifyError::DuplicateVariable(s.name.clone()));
            }
        }
        let input_sizes: Vec<u64> = input_slots.iter().map(|s| s.alphabet.size()).collect();
        let total = input_sizes.iter().fold(1u64, |a, s| a.saturating_mul(*s));

        let topo_order = crate::model::topological_order(instance)
            .map_err(|_| CodeMismatchError::new("instance graph is cyclic"))?;
        let topo_pos: BTreeMap<&str, usize> = topo_order
            .iter()
            .enumerate()
            .map(|(i, e)| (e.as_str(), i))
            .collect();

        let mut edges_sorted: Vec<String> = instance.edges.iter().map(|e| e.id.clone()).collect();
        edges_sorted.sort();
        let table_of_edge: BTreeMap<&str, usize> = edges_sorted
            .iter()
            .enumerate()
            .map(|(i, e)| (e.as_str(), i))
            .collect();

        let mut decoder_nodes: Vec<String> = instance
            .destination_nodes()
            .iter()
            .map(|n| n.to_string())
            .collect();
        decoder_nodes.sort();

        let mut table_shapes = Vec::new();
        for id in &edges_sorted {
            let edge = instance.edge(id).expect("edge exists");
            let key = key_alphabets.get(edge.tail.as_str()).copied();
            let slots = tables::edge_function_slots(instance, id, key);
            table_shapes.push((tables::domain_size(&slots), edge.alphabet.size()));
        }
        for node in &decoder_nodes {
            let slots = tables::node_decoder_slots(instance, node);
            table_shapes.push((
                tables::domain_size(&slots),
                tables::node_decoder_output(instance, node).size(),
            ));
        }

        let mut edge_steps = Vec::new();
        for id in &topo_order {
            let edge = instance.edge(id).expect("edge exists");
            let mut args = Vec::new();
            let mut strides = Vec::new();
            let mut stride = 1u64;
            for e in instance.in_edges(&edge.tail) {
                args.push(PlanArg::Edge(topo_pos[e.id.as_str()]));
                strides.push(stride);
                stride *= e.alphabet.size();
            }
            for s in instance.sources_at(&edge.tail) {
                args.push(PlanArg::Input(position[s.id.as_str()]));
                strides.push(stride);
                stride *= s.alphabet.size();
            }
            if let Some(k) = key_alphabets.get(edge.tail.as_str()) {
                if k.size() > 1 {
                    let name = node_key_slot_name(&edge.tail);
                    args.push(PlanArg::Input(position[name.as_str()]));
                    strides.push(stride);
                }
            }
            edge_steps.push(EdgeStep {
                args,
                strides,
                table: table_of_edge[id.as_str()],
            });
        }

        let mut decoder_steps = Vec::new();
        for (k, node) in decoder_nodes.iter().enumerate() {
            let mut args = Vec::new();
            let mut strides = Vec::new();
            let mut stride = 1u64;
            for e in instance.in_edges(node) {
                args.push(PlanArg::Edge(topo_pos[e.id.as_str()]));
                strides.push(stride);
                stride *= e.alphabet.size();
            }
            for s in instance.sources_at(node) {
                args.push(PlanArg::Input(position[s.id.as_str()]));
                strides.push(stride);
                stride *= s.alphabet.size();
            }
            let required_src = instance.required_sources(node);
            decoder_steps.push(DecoderStep {
                entity: node.clone(),
                args,
                strides,
                table: edges_sorted.len() + k,
                required: required_src
                    .iter()
                    .map(|s| position[s.id.as_str()])
                    .collect(),
                required_sizes: required_src.iter().map(|s| s.alphabet.size()).collect(),
            });
        }

        Ok(NetworkPlan {
            input_slots,
            input_sizes,
            total,
            edge_steps,
            decoder_steps,
            edges_sorted,
            decoder_nodes,
            table_shapes,
            topo_order,
        })
    }

    /// Borrows a code's tables in the plan's canonical layout.
    pub fn tables_from_code<'a>(&self, code: &'a NetworkCode) -> Vec<&'a [u64]> {
        let mut tables: Vec<&[u64]> = Vec::with_capacity(self.table_shapes.len());
        for id in &self.edges_sorted {
            tables.push(code.edge_functions[id].table());
        }
        for node in &self.decoder_nodes {
            tables.push(code.node_decoders[node].table());
        }
        tables
    }

    /// Evaluates every edge symbol for one input tuple, in topological
    /// order, into `edge_vals` (indexed by topological position).
    pub fn eval_edges(&self, tables: &[&[u64]], tuple: &[u64], edge_vals: &mut [u64]) {
        for (i, step) in self.edge_steps.iter().enumerate() {
            let mut index = 0u64;
            for (arg, stride) in step.args.iter().zip(&step.strides) {
                let v = match arg {
                    PlanArg::Input(p) => tuple[*p],
                    PlanArg::Edge(p) => edge_vals[*p],
                };
                index += v * stride;
            }
            edge_vals[i] = tables[step.table][index as usize];
        }
    }

    /// Index of the first decoder (in sorted node order) whose output is
    /// wrong for this tuple, if any.
    pub fn failing_decoder(&self, tables: &[&[u64]], tuple: &[u64], edge_vals: &[u64]) -> Option<usize> {
        for (k, step) in self.decoder_steps.iter().enumerate() {
            let mut index = 0u64;
            for (arg, stride) in step.args.iter().zip(&step.strides) {
                let v = match arg {
                    PlanArg::Input(p) => tuple[*p],
                    PlanArg::Edge(p) => edge_vals[*p],
                };
                index += v * stride;
            }
            let mut expected = 0u64;
            let mut stride = 1u64;
            for (pos, size) in step.required.iter().zip(&step.required_sizes) {
                expected += tuple[*pos] * stride;
                stride *= size;
            }
            if tables[step.table][index as usize] != expected {
                return Some(k);
            }
        }
        None
    }
}

pub(crate) enum IndexArg {
    Broadcast,
    Input(usize),
}

pub(crate) struct IndexDecoderStep {
    pub entity: String,
    pub args: Vec<IndexArg>,
    pub strides: Vec<u64>,
    pub table: usize,
    pub wants: Vec<usize>,
    pub wants_sizes: Vec<u64>,
}

/// Canonical table layout: the encoder, then decoder tables sorted by
/// receiver id. The encoder's domain coincides with the input space.
pub(crate) struct IndexPlan {
    pub input_slots: Vec<Slot>,
    pub input_sizes: Vec<u64>,
    pub total: u64,
    pub decoder_steps: Vec<IndexDecoderStep>,
    pub receivers_sorted: Vec<String>,
    pub table_shapes: Vec<(u64, u64)>,
}

impl IndexPlan {
    pub fn new(instance: &IndexInstance, key: Alphabet) -> Result<IndexPlan, VerifyError> {
        let input_slots = index_input_slots(instance, key);
        let mut position: BTreeMap<&str, usize> = BTreeMap::new();
        for (pos, s) in input_slots.iter().enumerate() {
            if position.insert(s.name.as_str(), pos).is_some() {
                return Err(VerifyError::DuplicateVariable(s.name.clone()));
            }
        }
        let input_sizes: Vec<u64> = input_slots.iter().map(|s| s.alphabet.size()).collect();
        let total = input_sizes.iter().fold(1u64, |a, s| a.saturating_mul(*s));

        let mut receivers_sorted: Vec<String> =
            instance.receivers.iter().map(|r| r.id.clone()).collect();
        receivers_sorted.sort();

        let mut table_shapes = vec![(total, instance.broadcast_alphabet.size())];
        let mut decoder_steps = Vec::new();
        for (k, rid) in receivers_sorted.iter().enumerate() {
            let receiver = instance.receiver(rid).expect("receiver exists");
            let slots = tables::index_decoder_slots(instance, rid);
            table_shapes.push((
                tables::domain_size(&slots),
                tables::index_decoder_output(instance, rid).size(),
            ));
            let mut args = vec![IndexArg::Broadcast];
            let mut strides = vec![1u64];
            let mut stride = instance.broadcast_alphabet.size();
            for m in &receiver.has {
                args.push(IndexArg::Input(position[m.as_str()]));
                strides.push(stride);
                stride *= instance.message(m).expect("message exists").alphabet.size();
            }
            let wants: Vec<usize> = receiver.wants.iter().map(|m| position[m.as_str()]).collect();
            let wants_sizes: Vec<u64> = receiver
                .wants
                .iter()
                .map(|m| instance.message(m).expect("message exists").alphabet.size())
                .collect();
            decoder_steps.push(IndexDecoderStep {
                entity: rid.clone(),
                args,
                strides,
                table: 1 + k,
                wants,
                wants_sizes,
            });
        }

        Ok(IndexPlan {
            input_slots,
            input_sizes,
            total,
            decoder_steps,
            receivers_sorted,
            table_shapes,
        })
    }

    pub fn tables_from_code<'a>(&self, code: &'a IndexCode) -> Vec<&'a [u64]> {
        let mut tables: Vec<&[u64]> = vec![code.encoder.table()];
        for rid in &self.receivers_sorted {
            tables.push(code.decoders[rid].table());
        }
        tables
    }

    /// Index of the first receiver whose decoder output is wrong for this
    /// tuple, given the broadcast symbol `b`.
    pub fn failing_decoder(&self, tables: &[&[u64]], tuple: &[u64], b: u64) -> Option<usize> {
        for (k, step) in self.decoder_steps.iter().enumerate() {
            let mut index = 0u64;
            for (arg, stride) in step.args.iter().zip(&step.strides) {
                let v = match arg {
                    IndexArg::Broadcast => b,
                    IndexArg::Input(p) => tuple[*p],
                };
                index += v * stride;
            }
            let mut expected = 0u64;
            let mut stride = 1u64;
            for (pos, size) in step.wants.iter().zip(&step.wants_sizes) {
                expected += tuple[*pos] * stride;
                stride *= size;
            }
            if tables[step.table][index as usize] != expected {
                return Some(k);
            }
        }
        None
    }
}

fn check_budget(total: u64, budget: &EnumerationBudget) -> Result<(), VerifyError> {
    if total > budget.max_joint_tuples {
        Err(VerifyError::SizeBudget {
            required: total,
            budget: budget.max_joint_tuples,
        })
    } else {
        Ok(())
    }
}

fn witness(slots: &[Slot], tuple: &[u64]) -> Vec<(String, u64)> {
    slots
        .iter()
        .zip(tuple)
        .map(|(s, &v)| (s.name.clone(), v))
        .collect()
}

// ---------------------------------------------------------------------------
// Network checks
// ---------------------------------------------------------------------------

/// True iff every destination node outputs exactly its required messages
/// for EVERY realisation of all sources and keys. On failure reports the
/// lexicographically smallest witnessing input tuple.
pub fn check_network_decodable(
    instance: &NetworkInstance,
    code: &NetworkCode,
    budget: &EnumerationBudget,
) -> Result<Verdict<DecodeFailure>, VerifyError> {
    check_network_code(instance, code)?;
    let plan = NetworkPlan::new(instance, &code.key_alphabets)?;
    check_budget(plan.total, budget)?;
    let tables = plan.tables_from_code(code);

    let mut edge_vals = vec![0u64; plan.edge_steps.len()];
    let mut fail: Option<DecodeFailure> = None;
    for_each_tuple_lex(&plan.input_sizes, |tuple, _| {
        plan.eval_edges(&tables, tuple, &mut edge_vals);
        if let Some(k) = plan.failing_decoder(&tables, tuple, &edge_vals) {
            fail = Some(DecodeFailure {
                entity: plan.decoder_steps[k].entity.clone(),
                witness: witness(&plan.input_slots, tuple),
            });
            false
        } else {
            true
        }
    });
    Ok(match fail {
        Some(f) => Verdict::Fail(f),
        None => Verdict::Pass,
    })
}

/// True iff every eavesdropper's targeted sources are exactly independent
/// of the symbols on its tapped edges, with edge symbols given by the
/// global encoding functions.
pub fn check_network_secure(
    instance: &NetworkInstance,
    code: &NetworkCode,
    budget: &EnumerationBudget,
) -> Result<Verdict<SecurityFailure>, VerifyError> {
    check_network_code(instance, code)?;
    let plan = NetworkPlan::new(instance, &code.key_alphabets)?;
    check_budget(plan.total, budget)?;

    let mut tapped: Vec<&str> = instance
        .eavesdroppers
        .iter()
        .flat_map(|e| e.tapped_edges.iter().map(|t| t.as_str()))
        .collect();
    tapped.sort();
    tapped.dedup();

    let mut globals = global_encodings(instance, code)?;
    let inputs: Vec<(String, Alphabet)> = plan
        .input_slots
        .iter()
        .map(|s| (s.name.clone(), s.alphabet))
        .collect();
    let derived: Vec<(String, FiniteFunction)> = tapped
        .iter()
        .map(|id| {
            (
                edge_variable_name(id),
                globals.remove(*id).expect("tapped edge has a global"),
            )
        })
        .collect();
    let joint = build_joint(inputs, derived, budget)?;

    for eav in &instance.eavesdroppers {
        let targets: Vec<String> = eav.target_sources.iter().cloned().collect();
        let observed: Vec<String> = eav.tapped_edges.iter().map(|t| edge_variable_name(t)).collect();
        if !check_independent(&joint, &targets, &observed)? {
            return Ok(Verdict::Fail(SecurityFailure {
                eavesdropper: eav.id.clone(),
            }));
        }
    }
    Ok(Verdict::Pass)
}

/// True iff every source is a function of the symbols on its origin's
/// outgoing edges: each realisation of the out-edge tuple is consistent
/// with exactly one value of the source.
pub fn check_source_recoverable(
    instance: &NetworkInstance,
    code: &NetworkCode,
    budget: &EnumerationBudget,
) -> Result<Verdict<RecoverFailure>, VerifyError> {
    check_network_code(instance, code)?;
    let plan = NetworkPlan::new(instance, &code.key_alphabets)?;
    check_budget(plan.total, budget)?;
    let tables = plan.tables_from_code(code);

    let topo_pos: BTreeMap<&str, usize> = plan
        .topo_order
        .iter()
        .enumerate()
        .map(|(i, e)| (e.as_str(), i))
        .collect();

    for source in &instance.sources {
        let out: Vec<usize> = instance
            .out_edges(&source.origin)
            .iter()
            .map(|e| topo_pos[e.id.as_str()])
            .collect();
        let out_sizes: Vec<u64> = instance
            .out_edges(&source.origin)
            .iter()
            .map(|e| e.alphabet.size())
            .collect();
        let src_pos = plan
            .input_slots
            .iter()
            .position(|s| s.name == source.id)
            .expect("source is an input");

        let mut seen: HashMap<u64, u64> = HashMap::new();
        let mut edge_vals = vec![0u64; plan.edge_steps.len()];
        let mut recoverable = true;
        for_each_tuple_lex(&plan.input_sizes, |tuple, _| {
            plan.eval_edges(&tables, tuple, &mut edge_vals);
            let key = pack_mixed_radix(
                &out.iter().map(|&p| edge_vals[p]).collect::<Vec<_>>(),
                &out_sizes,
            );
            match seen.get(&key) {
                Some(&x) if x != tuple[src_pos] => {
                    recoverable = false;
                    false
                }
                Some(_) => true,
                None => {
                    seen.insert(key, tuple[src_pos]);
                    true
                }
            }
        });
        if !recoverable {
            return Ok(Verdict::Fail(RecoverFailure {
                source: source.id.clone(),
            }));
        }
    }
    Ok(Verdict::Pass)
}

// ---------------------------------------------------------------------------
// Index checks
// ---------------------------------------------------------------------------

/// True iff every receiver outputs exactly its wanted messages for every
/// realisation of all messages and the sender key.
pub fn check_index_decodable(
    instance: &IndexInstance,
    code: &IndexCode,
    budget: &EnumerationBudget,
) -> Result<Verdict<DecodeFailure>, VerifyError> {
    check_index_code(instance, code)?;
    let plan = IndexPlan::new(instance, code.key_alphabet)?;
    check_budget(plan.total, budget)?;
    let tables = plan.tables_from_code(code);

    let mut fail: Option<DecodeFailure> = None;
    for_each_tuple_lex(&plan.input_sizes, |tuple, index| {
        let b = tables[0][index as usize];
        if let Some(k) = plan.failing_decoder(&tables, tuple, b) {
            fail = Some(DecodeFailure {
                entity: plan.decoder_steps[k].entity.clone(),
                witness: witness(&plan.input_slots, tuple),
            });
            false
        } else {
            true
        }
    });
    Ok(match fail {
        Some(f) => Verdict::Fail(f),
        None => Verdict::Pass,
    })
}

/// True iff every eavesdropper's targets are exactly independent of the
/// broadcast symbol together with its side information.
pub fn check_index_secure(
    instance: &IndexInstance,
    code: &IndexCode,
    budget: &EnumerationBudget,
) -> Result<Verdict<SecurityFailure>, VerifyError> {
    check_index_code(instance, code)?;
    let plan = IndexPlan::new(instance, code.key_alphabet)?;
    check_budget(plan.total, budget)?;

    let inputs: Vec<(String, Alphabet)> = plan
        .input_slots
        .iter()
        .map(|s| (s.name.clone(), s.alphabet))
        .collect();
    let joint = build_joint(
        inputs,
        vec![(BROADCAST_VARIABLE.to_string(), code.encoder.clone())],
        budget,
    )?;

    for eav in &instance.eavesdroppers {
        let targets: Vec<String> = eav.target_messages.iter().cloned().collect();
        let mut observed: Vec<String> = vec![BROADCAST_VARIABLE.to_string()];
        observed.extend(eav.side_info.iter().cloned());
        if !check_independent(&joint, &targets, &observed)? {
            return Ok(Verdict::Fail(SecurityFailure {
                eavesdropper: eav.id.clone(),
            }));
        }
    }
    Ok(Verdict::Pass)
}
