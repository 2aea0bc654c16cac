//! Bounded exhaustive search over all codes at fixed alphabets, certifying
//! feasibility or infeasibility of desk-scale instances.
//!
//! Candidates are enumerated lexicographically over the concatenated table
//! entries (edge/encoder tables in canonical order, decoders last), and the
//! first passing code is the canonical witness. By default decoder tables
//! are not enumerated but derived: decodability forces every reachable
//! decoder entry, unreachable entries are filled with 0, which yields
//! exactly the lexicographically first passing decoder. Every returned
//! code is re-checked by the verifier before being reported.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::model::{
    validate_index, validate_network, Alphabet, IndexInstance, NetworkInstance, ValidationReport,
};
use crate::tables::{
    edge_function_slots, for_each_tuple, index_decoder_output, index_decoder_slots,
    index_encoder_slots, node_decoder_output, node_decoder_slots, FiniteFunction,
};
use crate::transform::{index_to_network, TransformError};
use crate::translate::{IndexCode, NetworkCode};
use crate::verify::{
    check_index_decodable, check_index_secure, check_network_decodable, check_network_secure,
    EnumerationBudget, IndexArg, IndexPlan, NetworkPlan, PlanArg, VerifyError,
};

/// Limits on a single search: how many candidate codes may be tried and
/// how many joint tuples one candidate evaluation may enumerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBudget {
    pub max_candidate_codes: u64,
    pub max_joint_tuples: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_candidate_codes: 1 << 22,
            max_joint_tuples: 1 << 20,
        }
    }
}

/// Search strategy toggles. Symmetry pruning pins the first enumerated
/// table entry to 0; the verdict Infeasible remains sound under it, but
/// the canonical witness guarantee requires it off (the default).
/// `exhaustive_decoders` enumerates decoder tables literally instead of
/// deriving them; both modes return identical results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SearchOptions {
    pub symmetry_pruning: bool,
    pub exhaustive_decoders: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome<C> {
    Feasible(C),
    Infeasible,
    BudgetExceeded,
}

impl<C> SearchOutcome<C> {
    pub fn is_feasible(&self) -> bool {
        matches!(self, SearchOutcome::Feasible(_))
    }

    pub fn code(&self) -> Option<&C> {
        match self {
            SearchOutcome::Feasible(c) => Some(c),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("instance is invalid:\n{0}")]
    Invalid(ValidationReport),
    #[error("search exceeded its budget")]
    BudgetExceeded,
    #[error("search found a code the verifier rejects: {0}")]
    Internal(String),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error(transparent)]
    Transform(#[from] TransformError),
}

/// Feasibility agreement of an index instance and its mapped network
/// instance; `agree == false` would falsify the equivalence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EquivalenceReport {
    pub index_feasible: bool,
    pub network_feasible: bool,
    pub agree: bool,
}

/// Flat odometer over concatenated table entries; the last entry varies
/// fastest, so successive states are in increasing lexicographic order.
struct TableEnumerator {
    entries: Vec<u64>,
    radixes: Vec<u64>,
    offsets: Vec<usize>,
}

impl TableEnumerator {
    fn new(shapes: &[(u64, u64)], pin_first_entry: bool) -> Option<TableEnumerator> {
        let mut radixes = Vec::new();
        let mut offsets = vec![0usize];
        for &(len, radix) in shapes {
            let len = usize::try_from(len).ok()?;
            radixes.extend(std::iter::repeat_n(radix, len));
            offsets.push(offsets.last().unwrap() + len);
        }
        if pin_first_entry && !radixes.is_empty() {
            radixes[0] = 1;
        }
        Some(TableEnumerator {
            entries: vec![0; radixes.len()],
            radixes,
            offsets,
        })
    }

    fn tables(&self) -> Vec<&[u64]> {
        self.offsets
            .windows(2)
            .map(|w| &self.entries[w[0]..w[1]])
            .collect()
    }

    fn table(&self, index: usize) -> &[u64] {
        &self.entries[self.offsets[index]..self.offsets[index + 1]]
    }

    fn advance(&mut self) -> bool {
        for pos in (0..self.entries.len()).rev() {
            self.entries[pos] += 1;
            if self.entries[pos] < self.radixes[pos] {
                return true;
            }
            self.entries[pos] = 0;
        }
        false
    }
}

/// Exact independence test over accumulated counts: product rule on every
/// observed pair plus full product support.
fn independent_counts(
    counts_a: &HashMap<u128, u64>,
    counts_b: &HashMap<u128, u64>,
    counts_ab: &HashMap<(u128, u128), u64>,
    total: u64,
) -> bool {
    if counts_ab.len() != counts_a.len() * counts_b.len() {
        return false;
    }
    counts_ab.iter().all(|(&(ka, kb), &c_ab)| {
        u128::from(c_ab) * u128::from(total)
            == u128::from(counts_a[&ka]) * u128::from(counts_b[&kb])
    })
}

struct EavSpec {
    /// Input positions of the targeted sources/messages.
    targets: Vec<usize>,
    target_sizes: Vec<u64>,
    /// Topological edge positions (network) of tapped edges.
    tapped: Vec<usize>,
    tapped_sizes: Vec<u64>,
    /// Input positions of side-information messages (index side).
    side: Vec<usize>,
    side_sizes: Vec<u64>,
    /// Whether the broadcast symbol is observed (index side).
    sees_broadcast: bool,
    broadcast_size: u64,
}

impl EavSpec {
    fn key_a(&self, tuple: &[u64]) -> u128 {
        let mut key = 0u128;
        let mut stride = 1u128;
        for (&p, &s) in self.targets.iter().zip(&self.target_sizes) {
            key += u128::from(tuple[p]) * stride;
            stride *= u128::from(s);
        }
        key
    }

    fn key_b(&self, tuple: &[u64], edge_vals: &[u64], b: u64) -> u128 {
        let mut key = 0u128;
        let mut stride = 1u128;
        if self.sees_broadcast {
            key += u128::from(b);
            stride *= u128::from(self.broadcast_size);
        }
        for (&p, &s) in self.tapped.iter().zip(&self.tapped_sizes) {
            key += u128::from(edge_vals[p]) * stride;
            stride *= u128::from(s);
        }
        for (&p, &s) in self.side.iter().zip(&self.side_sizes) {
            key += u128::from(tuple[p]) * stride;
            stride *= u128::from(s);
        }
        key
    }
}

fn secure_against(
    specs: &[EavSpec],
    total: u64,
    mut value_row: impl FnMut(u64, &mut dyn FnMut(&[u64], &[u64], u64)),
) -> bool {
    // One counting pass per eavesdropper; most candidates never get here
    // because decodability fails first.
    for spec in specs {
        let mut counts_a: HashMap<u128, u64> = HashMap::new();
        let mut counts_b: HashMap<u128, u64> = HashMap::new();
        let mut counts_ab: HashMap<(u128, u128), u64> = HashMap::new();
        for row in 0..total {
            value_row(row, &mut |tuple, edge_vals, b| {
                let ka = spec.key_a(tuple);
                let kb = spec.key_b(tuple, edge_vals, b);
                *counts_a.entry(ka).or_insert(0) += 1;
                *counts_b.entry(kb).or_insert(0) += 1;
                *counts_ab.entry((ka, kb)).or_insert(0) += 1;
            });
        }
        if !independent_counts(&counts_a, &counts_b, &counts_ab, total) {
            return false;
        }
    }
    true
}

/// Enumerates all network codes for the given key alphabets and returns
/// the first (in lexicographic table order, decoders last) that is both
/// zero-error decodable and secure.
pub fn search_network_codes(
    instance: &NetworkInstance,
    key_alphabets: &BTreeMap<String, Alphabet>,
    budget: &SearchBudget,
    options: &SearchOptions,
) -> Result<SearchOutcome<NetworkCode>, SearchError> {
    let report = validate_network(instance);
    if !report.is_ok() {
        return Err(SearchError::Invalid(report));
    }
    let plan = NetworkPlan::new(instance, key_alphabets)?;
    if plan.total > budget.max_joint_tuples {
        return Ok(SearchOutcome::BudgetExceeded);
    }

    let n_edges = plan.edges_sorted.len();
    let enumerated = if options.exhaustive_decoders {
        plan.table_shapes.clone()
    } else {
        plan.table_shapes[..n_edges].to_vec()
    };
    let mut enumerator = match TableEnumerator::new(&enumerated, options.symmetry_pruning) {
        Some(e) => e,
        None => return Ok(SearchOutcome::BudgetExceeded),
    };

    // Input positions for eavesdropper counting.
    let input_pos: BTreeMap<&str, usize> = plan
        .input_slots
        .iter()
        .enumerate()
        .map(|(i, s)| (s.name.as_str(), i))
        .collect();
    let topo_pos: BTreeMap<&str, usize> = plan
        .topo_order
        .iter()
        .enumerate()
        .map(|(i, e)| (e.as_str(), i))
        .collect();
    let eav_specs: Vec<EavSpec> = instance
        .eavesdroppers
        .iter()
        .map(|eav| EavSpec {
            targets: eav.target_sources.iter().map(|s| input_pos[s.as_str()]).collect(),
            target_sizes: eav
                .target_sources
                .iter()
                .map(|s| instance.source(s).unwrap().alphabet.size())
                .collect(),
            tapped: eav.tapped_edges.iter().map(|e| topo_pos[e.as_str()]).collect(),
            tapped_sizes: eav
                .tapped_edges
                .iter()
                .map(|e| instance.edge(e).unwrap().alphabet.size())
                .collect(),
            side: Vec::new(),
            side_sizes: Vec::new(),
            sees_broadcast: false,
            broadcast_size: 1,
        })
        .collect();

    let decoder_shapes = &plan.table_shapes[n_edges..];
    let mut forced: Vec<Vec<Option<u64>>> = decoder_shapes
        .iter()
        .map(|&(len, _)| vec![None; len as usize])
        .collect();

    let mut candidates = 0u64;
    loop {
        candidates += 1;
        if candidates > budget.max_candidate_codes {
            return Ok(SearchOutcome::BudgetExceeded);
        }

        let found = {
            let edge_tables = enumerator.tables();
            // Build the full table view: enumerated decoders or dummies
            // (derive mode never reads decoder tables during forcing).
            let mut tables: Vec<&[u64]> = Vec::with_capacity(plan.table_shapes.len());
            tables.extend(edge_tables.iter().take(n_edges).copied());
            if options.exhaustive_decoders {
                for k in 0..decoder_shapes.len() {
                    tables.push(enumerator.table(n_edges + k));
                }
            }

            for f in &mut forced {
                f.fill(None);
            }
            let mut decodable = true;
            let mut edge_vals = vec![0u64; plan.edge_steps.len()];
            let mut rows: Vec<(Vec<u64>, Vec<u64>)> = Vec::new();
            for_each_tuple(&plan.input_sizes, |tuple| {
                if !decodable {
                    return;
                }
                plan.eval_edges(&tables[..n_edges], tuple, &mut edge_vals);
                for (k, step) in plan.decoder_steps.iter().enumerate() {
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
                    if options.exhaustive_decoders {
                        if tables[step.table][index as usize] != expected {
                            decodable = false;
                            return;
                        }
                    } else {
                        match forced[k][index as usize] {
                            Some(v) if v != expected => {
                                decodable = false;
                                return;
                            }
                            Some(_) => {}
                            None => forced[k][index as usize] = Some(expected),
                        }
                    }
                }
                if !eav_specs.is_empty() {
                    rows.push((tuple.to_vec(), edge_vals.clone()));
                }
            });

            decodable
                && secure_against(&eav_specs, plan.total, |row, emit| {
                    let (tuple, edge_vals) = &rows[row as usize];
                    emit(tuple, edge_vals, 0);
                })
        };

        if found {
            let mut edge_functions = BTreeMap::new();
            for (k, id) in plan.edges_sorted.iter().enumerate() {
                let edge = instance.edge(id).unwrap();
                let key = key_alphabets.get(edge.tail.as_str()).copied();
                let slots = edge_function_slots(instance, id, key);
                let f = FiniteFunction::new(slots, edge.alphabet, enumerator.table(k).to_vec())
                    .expect("enumerated table is in range");
                edge_functions.insert(id.clone(), f);
            }
            let mut node_decoders = BTreeMap::new();
            for (k, node) in plan.decoder_nodes.iter().enumerate() {
                let table: Vec<u64> = if options.exhaustive_decoders {
                    enumerator.table(n_edges + k).to_vec()
                } else {
                    forced[k].iter().map(|v| v.unwrap_or(0)).collect()
                };
                let g = FiniteFunction::new(
                    node_decoder_slots(instance, node),
                    node_decoder_output(instance, node),
                    table,
                )
                .expect("forced table is in range");
                node_decoders.insert(node.clone(), g);
            }
            let code = NetworkCode {
                edge_functions,
                node_decoders,
                key_alphabets: key_alphabets
                    .iter()
                    .filter(|(_, a)| a.size() > 1)
                    .map(|(n, a)| (n.clone(), *a))
                    .collect(),
            };
            // Never return an unverified candidate.
            let vbudget = EnumerationBudget::new(budget.max_joint_tuples);
            if !check_network_decodable(instance, &code, &vbudget)?.is_pass() {
                return Err(SearchError::Internal("decodability disagreement".into()));
            }
            if !check_network_secure(instance, &code, &vbudget)?.is_pass() {
                return Err(SearchError::Internal("security disagreement".into()));
            }
            return Ok(SearchOutcome::Feasible(code));
        }

        if !enumerator.advance() {
            return Ok(SearchOutcome::Infeasible);
        }
    }
}

/// Enumerates all index codes with the given sender key alphabet and
/// returns the first that is both decodable and secure.
pub fn search_index_codes(
    instance: &IndexInstance,
    key_alphabet: Alphabet,
    budget: &SearchBudget,
    options: &SearchOptions,
) -> Result<SearchOutcome<IndexCode>, SearchError> {
    let report = validate_index(instance);
    if !report.is_ok() {
        return Err(SearchError::Invalid(report));
    }
    let plan = IndexPlan::new(instance, key_alphabet)?;
    if plan.total > budget.max_joint_tuples {
        return Ok(SearchOutcome::BudgetExceeded);
    }

    let enumerated = if options.exhaustive_decoders {
        plan.table_shapes.clone()
    } else {
        plan.table_shapes[..1].to_vec()
    };
    let mut enumerator = match TableEnumerator::new(&enumerated, options.symmetry_pruning) {
        Some(e) => e,
        None => return Ok(SearchOutcome::BudgetExceeded),
    };

    let input_pos: BTreeMap<&str, usize> = plan
        .input_slots
        .iter()
        .enumerate()
        .map(|(i, s)| (s.name.as_str(), i))
        .collect();
    let eav_specs: Vec<EavSpec> = instance
        .eavesdroppers
        .iter()
        .map(|eav| EavSpec {
            targets: eav
                .target_messages
                .iter()
                .map(|m| input_pos[m.as_str()])
                .collect(),
            target_sizes: eav
                .target_messages
                .iter()
                .map(|m| instance.message(m).unwrap().alphabet.size())
                .collect(),
            tapped: Vec::new(),
            tapped_sizes: Vec::new(),
            side: eav.side_info.iter().map(|m| input_pos[m.as_str()]).collect(),
            side_sizes: eav
                .side_info
                .iter()
                .map(|m| instance.message(m).unwrap().alphabet.size())
                .collect(),
            sees_broadcast: true,
            broadcast_size: instance.broadcast_alphabet.size(),
        })
        .collect();

    let decoder_shapes = &plan.table_shapes[1..];
    let mut forced: Vec<Vec<Option<u64>>> = decoder_shapes
        .iter()
        .map(|&(len, _)| vec![None; len as usize])
        .collect();

    let mut candidates = 0u64;
    loop {
        candidates += 1;
        if candidates > budget.max_candidate_codes {
            return Ok(SearchOutcome::BudgetExceeded);
        }

        let found = {
            let encoder_table = enumerator.table(0);
            for f in &mut forced {
                f.fill(None);
            }
            let mut decodable = true;
            let mut index_counter = 0u64;
            for_each_tuple(&plan.input_sizes, |tuple| {
                let input_index = index_counter;
                index_counter += 1;
                if !decodable {
                    return;
                }
                let b = encoder_table[input_index as usize];
                for (k, step) in plan.decoder_steps.iter().enumerate() {
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
                    if options.exhaustive_decoders {
                        if enumerator.table(1 + k)[index as usize] != expected {
                            decodable = false;
                            return;
                        }
                    } else {
                        match forced[k][index as usize] {
                            Some(v) if v != expected => {
                                decodable = false;
                                return;
                            }
                            Some(_) => {}
                            None => forced[k][index as usize] = Some(expected),
                        }
                    }
                }
            });

            decodable
                && secure_against(&eav_specs, plan.total, |row, emit| {
                    let tuple = crate::tables::unpack_mixed_radix(row, &plan.input_sizes);
                    emit(&tuple, &[], encoder_table[row as usize]);
                })
        };

        if found {
            let encoder = FiniteFunction::new(
                index_encoder_slots(instance, Some(key_alphabet)),
                instance.broadcast_alphabet,
                enumerator.table(0).to_vec(),
            )
            .expect("enumerated table is in range");
            let mut decoders = BTreeMap::new();
            for (k, rid) in plan.receivers_sorted.iter().enumerate() {
                let table: Vec<u64> = if options.exhaustive_decoders {
                    enumerator.table(1 + k).to_vec()
                } else {
                    forced[k].iter().map(|v| v.unwrap_or(0)).collect()
                };
                let g = FiniteFunction::new(
                    index_decoder_slots(instance, rid),
                    index_decoder_output(instance, rid),
                    table,
                )
                .expect("forced table is in range");
                decoders.insert(rid.clone(), g);
            }
            let code = IndexCode {
                encoder,
                decoders,
                key_alphabet,
            };
            let vbudget = EnumerationBudget::new(budget.max_joint_tuples);
            if !check_index_decodable(instance, &code, &vbudget)?.is_pass() {
                return Err(SearchError::Internal("decodability disagreement".into()));
            }
            if !check_index_secure(instance, &code, &vbudget)?.is_pass() {
                return Err(SearchError::Internal("security disagreement".into()));
            }
            return Ok(SearchOutcome::Feasible(code));
        }

        if !enumerator.advance() {
            return Ok(SearchOutcome::Infeasible);
        }
    }
}

/// Searches the index instance and its mapped network instance for secure
/// codes and reports whether the two feasibility verdicts agree. The
/// sender key is mirrored as the first relay's key on the network side so
/// the searched code classes correspond under the code translations.
pub fn feasibility_equivalence(
    instance: &IndexInstance,
    sender_key: Alphabet,
    budget: &SearchBudget,
    options: &SearchOptions,
) -> Result<EquivalenceReport, SearchError> {
    let report = validate_index(instance);
    if !report.is_ok() {
        return Err(SearchError::Invalid(report));
    }
    let index_outcome = search_index_codes(instance, sender_key, budget, options)?;
    let (network, mapping) = index_to_network(instance)?;
    let mut keys = BTreeMap::new();
    if sender_key.size() > 1 {
        keys.insert(mapping.relay_nodes.0.clone(), sender_key);
    }
    let network_outcome = search_network_codes(&network, &keys, budget, options)?;

    let index_feasible = match index_outcome {
        SearchOutcome::Feasible(_) => true,
        SearchOutcome::Infeasible => false,
        SearchOutcome::BudgetExceeded => return Err(SearchError::BudgetExceeded),
    };
    let network_feasible = match network_outcome {
        SearchOutcome::Feasible(_) => true,
        SearchOutcome::Infeasible => false,
        SearchOutcome::BudgetExceeded => return Err(SearchError::BudgetExceeded),
    };
    Ok(EquivalenceReport {
        index_feasible,
        network_feasible,
        agree: index_feasible == network_feasible,
    })
}
