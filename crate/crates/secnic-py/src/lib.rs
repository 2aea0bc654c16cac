//! Python bindings for the secnic toolkit.
//!
//! Instances, codes and mapping records are wrapped as classes whose
//! canonical representation is the same JSON the CLI reads and writes;
//! the verification, transformation, translation and search entry points
//! are module-level functions. Verdicts come back as plain tuples.

use std::collections::BTreeMap;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use secnic::model::{validate_index, validate_network};
use secnic::search::{SearchBudget, SearchOptions, SearchOutcome};
use secnic::verify::{EnumerationBudget, Verdict};
use secnic::{format, search, tables, transform, translate, verify, Alphabet};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn alphabet(size: u64) -> PyResult<Alphabet> {
    if size == 0 {
        return Err(PyValueError::new_err("alphabet size must be positive"));
    }
    Ok(Alphabet::new(size))
}

fn budget(max_joint_tuples: Option<u64>) -> EnumerationBudget {
    max_joint_tuples
        .map(EnumerationBudget::new)
        .unwrap_or_default()
}

fn search_budget(max_candidates: Option<u64>, max_joint_tuples: Option<u64>) -> SearchBudget {
    let defaults = SearchBudget::default();
    SearchBudget {
        max_candidate_codes: max_candidates.unwrap_or(defaults.max_candidate_codes),
        max_joint_tuples: max_joint_tuples.unwrap_or(defaults.max_joint_tuples),
    }
}

/// A secure network-coding instance (DAG, sources, eavesdroppers).
#[pyclass(name = "NetworkInstance")]
struct PyNetworkInstance {
    inner: secnic::NetworkInstance,
}

#[pymethods]
impl PyNetworkInstance {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyNetworkInstance {
            inner: format::parse_network_instance(text).map_err(value_error)?,
        })
    }

    fn to_json(&self) -> String {
        format::emit_network_instance(&self.inner)
    }

    /// Violation messages; an empty list means the instance is valid.
    fn validate(&self) -> Vec<String> {
        validate_network(&self.inner).violations
    }

    fn topological_order(&self) -> PyResult<Vec<String>> {
        secnic::model::topological_order(&self.inner).map_err(value_error)
    }

    fn node_ids(&self) -> Vec<String> {
        self.inner.nodes.clone()
    }

    fn edge_ids(&self) -> Vec<String> {
        self.inner.edges.iter().map(|e| e.id.clone()).collect()
    }

    fn source_ids(&self) -> Vec<String> {
        self.inner.sources.iter().map(|s| s.id.clone()).collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "NetworkInstance(nodes={}, edges={}, sources={}, eavesdroppers={})",
            self.inner.nodes.len(),
            self.inner.edges.len(),
            self.inner.sources.len(),
            self.inner.eavesdroppers.len()
        )
    }
}

/// A secure index-coding instance (messages, receivers, eavesdroppers).
#[pyclass(name = "IndexInstance")]
struct PyIndexInstance {
    inner: secnic::IndexInstance,
}

#[pymethods]
impl PyIndexInstance {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyIndexInstance {
            inner: format::parse_index_instance(text).map_err(value_error)?,
        })
    }

    fn to_json(&self) -> String {
        format::emit_index_instance(&self.inner)
    }

    fn validate(&self) -> Vec<String> {
        validate_index(&self.inner).violations
    }

    fn message_ids(&self) -> Vec<String> {
        self.inner.messages.iter().map(|m| m.id.clone()).collect()
    }

    fn receiver_ids(&self) -> Vec<String> {
        self.inner.receivers.iter().map(|r| r.id.clone()).collect()
    }

    fn broadcast_size(&self) -> u64 {
        self.inner.broadcast_alphabet.size()
    }

    fn __repr__(&self) -> String {
        format!(
            "IndexInstance(messages={}, receivers={}, eavesdroppers={}, broadcast={})",
            self.inner.messages.len(),
            self.inner.receivers.len(),
            self.inner.eavesdroppers.len(),
            self.inner.broadcast_alphabet.size()
        )
    }
}

/// A network code bound to its instance's slot convention.
#[pyclass(name = "NetworkCode")]
struct PyNetworkCode {
    inner: translate::NetworkCode,
}

#[pymethods]
impl PyNetworkCode {
    #[staticmethod]
    fn from_json(text: &str, instance: &PyNetworkInstance) -> PyResult<Self> {
        Ok(PyNetworkCode {
            inner: format::parse_network_code(text, &instance.inner).map_err(value_error)?,
        })
    }

    fn to_json(&self) -> String {
        format::emit_network_code(&self.inner)
    }

    fn is_deterministic(&self) -> bool {
        self.inner.is_deterministic()
    }

    /// The flat lookup table of one edge function.
    fn edge_table(&self, edge_id: &str) -> PyResult<Vec<u64>> {
        self.inner
            .edge_functions
            .get(edge_id)
            .map(|f| f.table().to_vec())
            .ok_or_else(|| PyValueError::new_err(format!("no edge function for {edge_id}")))
    }

    fn __repr__(&self) -> String {
        format!(
            "NetworkCode(edges={}, decoders={}, randomised_nodes={})",
            self.inner.edge_functions.len(),
            self.inner.node_decoders.len(),
            self.inner
                .key_alphabets
                .values()
                .filter(|a| a.size() > 1)
                .count()
        )
    }
}

/// An index code bound to its instance's slot convention.
#[pyclass(name = "IndexCode")]
struct PyIndexCode {
    inner: translate::IndexCode,
}

#[pymethods]
impl PyIndexCode {
    #[staticmethod]
    fn from_json(text: &str, instance: &PyIndexInstance) -> PyResult<Self> {
        Ok(PyIndexCode {
            inner: format::parse_index_code(text, &instance.inner).map_err(value_error)?,
        })
    }

    fn to_json(&self) -> String {
        format::emit_index_code(&self.inner)
    }

    fn encoder_table(&self) -> Vec<u64> {
        self.inner.encoder.table().to_vec()
    }

    fn key_size(&self) -> u64 {
        self.inner.key_alphabet.size()
    }

    fn __repr__(&self) -> String {
        format!(
            "IndexCode(decoders={}, key={})",
            self.inner.decoders.len(),
            self.inner.key_alphabet.size()
        )
    }
}

/// An opaque mapping record, serialisable to the same JSON the CLI emits.
macro_rules! record_class {
    ($pyname:literal, $name:ident, $ty:ty, $emit:path, $parse:path) => {
        #[pyclass(name = $pyname)]
        struct $name {
            inner: $ty,
        }

        #[pymethods]
        impl $name {
            #[staticmethod]
            fn from_json(text: &str) -> PyResult<Self> {
                Ok($name {
                    inner: $parse(text).map_err(value_error)?,
                })
            }

            fn to_json(&self) -> String {
                $emit(&self.inner)
            }
        }
    };
}

record_class!(
    "MappingRecord",
    PyMappingRecord,
    transform::MappingRecord,
    format::emit_mapping_record,
    format::parse_mapping_record
);
record_class!(
    "AugmentationRecord",
    PyAugmentationRecord,
    transform::AugmentationRecord,
    format::emit_augmentation_record,
    format::parse_augmentation_record
);
record_class!(
    "NetworkIndexMap",
    PyNetworkIndexMap,
    transform::NetworkToIndexMap,
    format::emit_network_index_map,
    format::parse_network_index_map
);

// ---------------------------------------------------------------------------
// Instance mappings
// ---------------------------------------------------------------------------

/// Maps an index instance to its equivalent network instance.
#[pyfunction]
fn index_to_network(instance: &PyIndexInstance) -> PyResult<(PyNetworkInstance, PyMappingRecord)> {
    let (net, rec) = transform::index_to_network(&instance.inner).map_err(value_error)?;
    Ok((
        PyNetworkInstance { inner: net },
        PyMappingRecord { inner: rec },
    ))
}

/// Adds one explicit key source per node (out-edge size product).
#[pyfunction]
fn augment(instance: &PyNetworkInstance) -> PyResult<(PyNetworkInstance, PyAugmentationRecord)> {
    let (aug, rec) = transform::augment(&instance.inner).map_err(value_error)?;
    Ok((
        PyNetworkInstance { inner: aug },
        PyAugmentationRecord { inner: rec },
    ))
}

/// Maps a network instance to its equivalent index instance.
#[pyfunction]
fn network_to_index(instance: &PyNetworkInstance) -> PyResult<(PyIndexInstance, PyNetworkIndexMap)> {
    let (idx, map) = transform::network_to_index(&instance.inner).map_err(value_error)?;
    Ok((
        PyIndexInstance { inner: idx },
        PyNetworkIndexMap { inner: map },
    ))
}

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

fn describe_decode(v: Verdict<verify::DecodeFailure>) -> (bool, Option<String>) {
    match v {
        Verdict::Pass => (true, None),
        Verdict::Fail(f) => {
            let parts: Vec<String> = f
                .witness
                .iter()
                .map(|(n, v)| format!("{n}={v}"))
                .collect();
            (false, Some(format!("{} fails at {}", f.entity, parts.join(", "))))
        }
    }
}

/// Returns `(ok, failure_description)`.
#[pyfunction]
#[pyo3(signature = (instance, code, max_joint_tuples=None))]
fn check_network_decodable(
    instance: &PyNetworkInstance,
    code: &PyNetworkCode,
    max_joint_tuples: Option<u64>,
) -> PyResult<(bool, Option<String>)> {
    verify::check_network_decodable(&instance.inner, &code.inner, &budget(max_joint_tuples))
        .map(describe_decode)
        .map_err(value_error)
}

#[pyfunction]
#[pyo3(signature = (instance, code, max_joint_tuples=None))]
fn check_network_secure(
    instance: &PyNetworkInstance,
    code: &PyNetworkCode,
    max_joint_tuples: Option<u64>,
) -> PyResult<(bool, Option<String>)> {
    verify::check_network_secure(&instance.inner, &code.inner, &budget(max_joint_tuples))
        .map(|v| match v {
            Verdict::Pass => (true, None),
            Verdict::Fail(f) => (false, Some(format!("eavesdropper {}", f.eavesdropper))),
        })
        .map_err(value_error)
}

#[pyfunction]
#[pyo3(signature = (instance, code, max_joint_tuples=None))]
fn check_source_recoverable(
    instance: &PyNetworkInstance,
    code: &PyNetworkCode,
    max_joint_tuples: Option<u64>,
) -> PyResult<(bool, Option<String>)> {
    verify::check_source_recoverable(&instance.inner, &code.inner, &budget(max_joint_tuples))
        .map(|v| match v {
            Verdict::Pass => (true, None),
            Verdict::Fail(f) => (false, Some(format!("source {}", f.source))),
        })
        .map_err(value_error)
}

#[pyfunction]
#[pyo3(signature = (instance, code, max_joint_tuples=None))]
fn check_index_decodable(
    instance: &PyIndexInstance,
    code: &PyIndexCode,
    max_joint_tuples: Option<u64>,
) -> PyResult<(bool, Option<String>)> {
    verify::check_index_decodable(&instance.inner, &code.inner, &budget(max_joint_tuples))
        .map(describe_decode)
        .map_err(value_error)
}

#[pyfunction]
#[pyo3(signature = (instance, code, max_joint_tuples=None))]
fn check_index_secure(
    instance: &PyIndexInstance,
    code: &PyIndexCode,
    max_joint_tuples: Option<u64>,
) -> PyResult<(bool, Option<String>)> {
    verify::check_index_secure(&instance.inner, &code.inner, &budget(max_joint_tuples))
        .map(|v| match v {
            Verdict::Pass => (true, None),
            Verdict::Fail(f) => (false, Some(format!("eavesdropper {}", f.eavesdropper))),
        })
        .map_err(value_error)
}

/// Conditional entropy `H(of | given)` in bits under a network code.
/// Variables: source ids, `key:<node>`, `edge:<edge id>`.
#[pyfunction]
#[pyo3(signature = (instance, code, of, given, max_joint_tuples=None))]
fn network_conditional_entropy(
    instance: &PyNetworkInstance,
    code: &PyNetworkCode,
    of: Vec<String>,
    given: Vec<String>,
    max_joint_tuples: Option<u64>,
) -> PyResult<f64> {
    let budget = budget(max_joint_tuples);
    let inputs: Vec<(String, Alphabet)> =
        verify::network_input_slots(&instance.inner, &code.inner.key_alphabets)
            .into_iter()
            .map(|s| (s.name, s.alphabet))
            .collect();
    let globals = tables::global_encodings(&instance.inner, &code.inner).map_err(value_error)?;
    let derived = globals
        .into_iter()
        .map(|(id, f)| (verify::edge_variable_name(&id), f))
        .collect();
    let joint = verify::build_joint(inputs, derived, &budget).map_err(value_error)?;
    verify::conditional_entropy_bits(&joint, &of, &given).map_err(value_error)
}

// ---------------------------------------------------------------------------
// Code translations
// ---------------------------------------------------------------------------

#[pyfunction]
fn t1_index_code_to_network_code(
    instance: &PyIndexInstance,
    mapping: &PyMappingRecord,
    code: &PyIndexCode,
) -> PyResult<PyNetworkCode> {
    translate::t1_index_code_to_network_code(&instance.inner, &mapping.inner, &code.inner)
        .map(|inner| PyNetworkCode { inner })
        .map_err(value_error)
}

#[pyfunction]
#[pyo3(signature = (instance, mapping, code, max_joint_tuples=None))]
fn t1_network_code_to_index_code(
    instance: &PyIndexInstance,
    mapping: &PyMappingRecord,
    code: &PyNetworkCode,
    max_joint_tuples: Option<u64>,
) -> PyResult<PyIndexCode> {
    translate::t1_network_code_to_index_code(
        &instance.inner,
        &mapping.inner,
        &code.inner,
        &budget(max_joint_tuples),
    )
    .map(|inner| PyIndexCode { inner })
    .map_err(value_error)
}

#[pyfunction]
fn t2_network_code_to_index_code(
    instance: &PyNetworkInstance,
    code: &PyNetworkCode,
    map: &PyNetworkIndexMap,
) -> PyResult<PyIndexCode> {
    translate::t2_network_code_to_index_code(&instance.inner, &code.inner, &map.inner)
        .map(|inner| PyIndexCode { inner })
        .map_err(value_error)
}

#[pyfunction]
#[pyo3(signature = (instance, map, code, sigma=None, max_joint_tuples=None))]
fn t2_index_code_to_network_code(
    instance: &PyNetworkInstance,
    map: &PyNetworkIndexMap,
    code: &PyIndexCode,
    sigma: Option<u64>,
    max_joint_tuples: Option<u64>,
) -> PyResult<PyNetworkCode> {
    let budget = budget(max_joint_tuples);
    let inner = match sigma {
        Some(sigma) => translate::t2_index_code_to_network_code_with_sigma(
            &instance.inner,
            &map.inner,
            &code.inner,
            sigma,
            &budget,
        ),
        None => translate::t2_index_code_to_network_code(
            &instance.inner,
            &map.inner,
            &code.inner,
            &budget,
        ),
    }
    .map_err(value_error)?;
    Ok(PyNetworkCode { inner })
}

/// Rewires a randomised code onto the augmented instance.
#[pyfunction]
fn randomized_to_augmented(
    instance: &PyNetworkInstance,
    code: &PyNetworkCode,
    augmented: &PyNetworkInstance,
    record: &PyAugmentationRecord,
) -> PyResult<PyNetworkCode> {
    translate::randomized_to_augmented(
        &instance.inner,
        &code.inner,
        &augmented.inner,
        &record.inner,
    )
    .map(|inner| PyNetworkCode { inner })
    .map_err(value_error)
}

// ---------------------------------------------------------------------------
// Search
// ---------------------------------------------------------------------------

fn outcome_tuple<C, P>(outcome: SearchOutcome<C>, wrap: impl FnOnce(C) -> P) -> (String, Option<P>) {
    match outcome {
        SearchOutcome::Feasible(c) => ("feasible".to_string(), Some(wrap(c))),
        SearchOutcome::Infeasible => ("infeasible".to_string(), None),
        SearchOutcome::BudgetExceeded => ("budget-exceeded".to_string(), None),
    }
}

/// Returns `("feasible", code) | ("infeasible", None) | ("budget-exceeded", None)`.
#[pyfunction]
#[pyo3(signature = (instance, key_sizes, max_candidates=None, max_joint_tuples=None))]
fn search_network_codes(
    instance: &PyNetworkInstance,
    key_sizes: BTreeMap<String, u64>,
    max_candidates: Option<u64>,
    max_joint_tuples: Option<u64>,
) -> PyResult<(String, Option<PyNetworkCode>)> {
    let mut keys = BTreeMap::new();
    for (node, size) in key_sizes {
        keys.insert(node, alphabet(size)?);
    }
    search::search_network_codes(
        &instance.inner,
        &keys,
        &search_budget(max_candidates, max_joint_tuples),
        &SearchOptions::default(),
    )
    .map(|o| outcome_tuple(o, |inner| PyNetworkCode { inner }))
    .map_err(value_error)
}

#[pyfunction]
#[pyo3(signature = (instance, sender_key_size=1, max_candidates=None, max_joint_tuples=None))]
fn search_index_codes(
    instance: &PyIndexInstance,
    sender_key_size: u64,
    max_candidates: Option<u64>,
    max_joint_tuples: Option<u64>,
) -> PyResult<(String, Option<PyIndexCode>)> {
    search::search_index_codes(
        &instance.inner,
        alphabet(sender_key_size)?,
        &search_budget(max_candidates, max_joint_tuples),
        &SearchOptions::default(),
    )
    .map(|o| outcome_tuple(o, |inner| PyIndexCode { inner }))
    .map_err(value_error)
}

/// Returns `(index_feasible, network_feasible, agree)`.
#[pyfunction]
#[pyo3(signature = (instance, sender_key_size=1, max_candidates=None, max_joint_tuples=None))]
fn feasibility_equivalence(
    instance: &PyIndexInstance,
    sender_key_size: u64,
    max_candidates: Option<u64>,
    max_joint_tuples: Option<u64>,
) -> PyResult<(bool, bool, bool)> {
    let report = search::feasibility_equivalence(
        &instance.inner,
        alphabet(sender_key_size)?,
        &search_budget(max_candidates, max_joint_tuples),
        &SearchOptions::default(),
    )
    .map_err(value_error)?;
    Ok((report.index_feasible, report.network_feasible, report.agree))
}

#[pymodule]
fn secnic_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyNetworkInstance>()?;
    m.add_class::<PyIndexInstance>()?;
    m.add_class::<PyNetworkCode>()?;
    m.add_class::<PyIndexCode>()?;
    m.add_class::<PyMappingRecord>()?;
    m.add_class::<PyAugmentationRecord>()?;
    m.add_class::<PyNetworkIndexMap>()?;
    m.add_function(wrap_pyfunction!(index_to_network, m)?)?;
    m.add_function(wrap_pyfunction!(augment, m)?)?;
    m.add_function(wrap_pyfunction!(network_to_index, m)?)?;
    m.add_function(wrap_pyfunction!(check_network_decodable, m)?)?;
    m.add_function(wrap_pyfunction!(check_network_secure, m)?)?;
    m.add_function(wrap_pyfunction!(check_source_recoverable, m)?)?;
    m.add_function(wrap_pyfunction!(check_index_decodable, m)?)?;
    m.add_function(wrap_pyfunction!(check_index_secure, m)?)?;
    m.add_function(wrap_pyfunction!(network_conditional_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(t1_index_code_to_network_code, m)?)?;
    m.add_function(wrap_pyfunction!(t1_network_code_to_index_code, m)?)?;
    m.add_function(wrap_pyfunction!(t2_network_code_to_index_code, m)?)?;
    m.add_function(wrap_pyfunction!(t2_index_code_to_network_code, m)?)?;
    m.add_function(wrap_pyfunction!(randomized_to_augmented, m)?)?;
    m.add_function(wrap_pyfunction!(search_network_codes, m)?)?;
    m.add_function(wrap_pyfunction!(search_index_codes, m)?)?;
    m.add_function(wrap_pyfunction!(feasibility_equivalence, m)?)?;
    Ok(())
}
