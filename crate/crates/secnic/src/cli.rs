//! Command-line front-end.
//!
//! Exit codes: 0 success, 1 failed checks or feasibility disagreement,
//! 2 malformed files or arguments, 3 enumeration/search budget exceeded.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::format::{self, FormatError};
use crate::model::{validate_index, validate_network, Alphabet, IndexInstance, NetworkInstance};
use crate::search::{
    feasibility_equivalence, search_index_codes, search_network_codes, SearchBudget, SearchError,
    SearchOptions, SearchOutcome,
};
use crate::tables::global_encodings;
use crate::transform::{augment, index_to_network, network_to_index};
use crate::translate::{
    t1_index_code_to_network_code, t1_network_code_to_index_code, t2_index_code_to_network_code,
    t2_network_code_to_index_code, TranslateError,
};
use crate::verify::{
    build_joint, check_index_decodable, check_index_secure, check_network_decodable,
    check_network_secure, check_source_recoverable, conditional_entropy_bits, edge_variable_name,
    network_input_slots, index_input_slots, DecodeFailure, EnumerationBudget, Verdict,
    VerifyError, BROADCAST_VARIABLE,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_MALFORMED: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Parser)]
#[command(
    name = "secnic",
    about = "Secure network-coding / index-coding instance mappings, code translations, verification and feasibility search",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate an instance file and report violations and rates.
    Validate {
        /// Instance file (network or index).
        file: PathBuf,
        /// Also write a DOT graph description for external renderers.
        #[arg(long, value_name = "FILE")]
        dot: Option<PathBuf>,
    },
    /// Map an index instance to the equivalent network instance.
    I2n {
        /// Index-instance file.
        file: PathBuf,
        /// Output network-instance file.
        #[arg(short, long)]
        output: PathBuf,
        /// Output mapping-record file (default: <output>.mapping.json).
        #[arg(long, value_name = "FILE")]
        mapping_out: Option<PathBuf>,
    },
    /// Add one explicit key source per node (alphabet: product of out-edge sizes).
    Augment {
        /// Network-instance file.
        file: PathBuf,
        /// Output network-instance file.
        #[arg(short, long)]
        output: PathBuf,
        /// Output augmentation-record file (default: <output>.record.json).
        #[arg(long, value_name = "FILE")]
        record_out: Option<PathBuf>,
    },
    /// Map a network instance to the equivalent index instance
    /// (augmenting first unless --no-augment is given).
    N2i {
        /// Network-instance file.
        file: PathBuf,
        /// Output index-instance file.
        #[arg(short, long)]
        output: PathBuf,
        /// Skip the default augmentation step.
        #[arg(long)]
        no_augment: bool,
        /// Output mapping file (default: <output>.mapping.json).
        #[arg(long, value_name = "FILE")]
        mapping_out: Option<PathBuf>,
        /// Output file for the augmented instance (default: <output>.augmented.json).
        #[arg(long, value_name = "FILE")]
        augmented_out: Option<PathBuf>,
    },
    /// Translate a code across one of the two instance mappings.
    Translate(TranslateArgs),
    /// Check decodability, security and source recoverability of a code.
    Verify {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        code: PathBuf,
        /// Which checks to run.
        #[arg(long, value_enum, default_value_t = CheckKind::All)]
        check: CheckKind,
        /// Maximum number of joint tuples to enumerate.
        #[arg(long, default_value_t = 1 << 24)]
        budget: u64,
    },
    /// Exhaustively search for a secure code at the instance's alphabets.
    Search {
        #[arg(long)]
        instance: PathBuf,
        /// Key alphabet per node as node=SIZE (network instances only);
        /// defaults to each node's out-edge size product.
        #[arg(long = "key-size", value_name = "NODE=SIZE")]
        key_sizes: Vec<String>,
        /// Sender key size (index instances only).
        #[arg(long, default_value_t = 1)]
        sender_key_size: u64,
        /// Maximum number of candidate codes.
        #[arg(long, default_value_t = 1 << 22)]
        budget: u64,
        /// Maximum joint tuples per candidate evaluation.
        #[arg(long, default_value_t = 1 << 20)]
        joint_budget: u64,
        /// Enable symmetry pruning (sound for Infeasible verdicts only).
        #[arg(long)]
        prune: bool,
        /// Write the witness code here when feasible.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Certify that an index instance and its mapped network instance
    /// agree on feasibility.
    Equiv {
        #[arg(long)]
        instance: PathBuf,
        /// Maximum number of candidate codes per search.
        #[arg(long, default_value_t = 1 << 22)]
        budget: u64,
        /// Maximum joint tuples per candidate evaluation.
        #[arg(long, default_value_t = 1 << 20)]
        joint_budget: u64,
        /// Sender key size; mirrored onto the first relay node.
        #[arg(long, default_value_t = 1)]
        sender_key_size: u64,
    },
    /// Report the conditional entropy H(of | given) under a code.
    Entropy {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        code: PathBuf,
        /// Comma-separated variables whose entropy is reported.
        #[arg(long)]
        of: String,
        /// Comma-separated conditioning variables (may be empty).
        #[arg(long, default_value = "")]
        given: String,
        /// Maximum number of joint tuples to enumerate.
        #[arg(long, default_value_t = 1 << 24)]
        budget: u64,
    },
}

#[derive(Args)]
struct TranslateArgs {
    /// Which theorem's construction to use.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    theorem: u8,
    /// Code translation direction.
    #[arg(long, value_enum)]
    direction: Direction,
    /// Theorem 1: the index instance. Theorem 2: the network instance.
    #[arg(long)]
    instance: PathBuf,
    /// The mapping record emitted by i2n (theorem 1) or n2i (theorem 2).
    #[arg(long)]
    mapping: PathBuf,
    /// The code to translate.
    #[arg(long)]
    code: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    /// Maximum joint tuples for the translation's verification preconditions.
    #[arg(long, default_value_t = 1 << 24)]
    budget: u64,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Direction {
    /// Index code to network code.
    I2n,
    /// Network code to index code.
    N2i,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum CheckKind {
    Decode,
    Secure,
    Recover,
    All,
}

struct CliError {
    exit: i32,
    message: String,
}

impl CliError {
    fn malformed(message: impl Into<String>) -> CliError {
        CliError {
            exit: EXIT_MALFORMED,
            message: message.into(),
        }
    }

    fn budget(message: impl Into<String>) -> CliError {
        CliError {
            exit: EXIT_BUDGET,
            message: message.into(),
        }
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        CliError::malformed(e.to_string())
    }
}

impl From<VerifyError> for CliError {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::SizeBudget { .. } => CliError::budget(e.to_string()),
            other => CliError::malformed(other.to_string()),
        }
    }
}

impl From<TranslateError> for CliError {
    fn from(e: TranslateError) -> Self {
        match e {
            TranslateError::Verify(VerifyError::SizeBudget { .. }) => {
                CliError::budget(e.to_string())
            }
            other => CliError::malformed(other.to_string()),
        }
    }
}

impl From<SearchError> for CliError {
    fn from(e: SearchError) -> Self {
        match e {
            SearchError::BudgetExceeded => CliError::budget(e.to_string()),
            SearchError::Verify(VerifyError::SizeBudget { .. }) => CliError::budget(e.to_string()),
            other => CliError::malformed(other.to_string()),
        }
    }
}

impl From<crate::transform::TransformError> for CliError {
    fn from(e: crate::transform::TransformError) -> Self {
        CliError::malformed(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::malformed(format!("cannot read {}: {e}", path.display())))
}

fn ensure_valid_network(instance: &NetworkInstance) -> Result<(), CliError> {
    let report = validate_network(instance);
    if report.is_ok() {
        Ok(())
    } else {
        Err(CliError::malformed(format!("invalid instance:\n{report}")))
    }
}

fn ensure_valid_index(instance: &IndexInstance) -> Result<(), CliError> {
    let report = validate_index(instance);
    if report.is_ok() {
        Ok(())
    } else {
        Err(CliError::malformed(format!("invalid instance:\n{report}")))
    }
}

fn read_valid_instance(path: &Path) -> Result<AnyInstance, CliError> {
    let instance = read_any_instance(path)?;
    match &instance {
        AnyInstance::Network(i) => ensure_valid_network(i)?,
        AnyInstance::Index(i) => ensure_valid_index(i)?,
    }
    Ok(instance)
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text)
        .map_err(|e| CliError::malformed(format!("cannot write {}: {e}", path.display())))
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(suffix);
    PathBuf::from(s)
}

enum AnyInstance {
    Network(NetworkInstance),
    Index(IndexInstance),
}

fn read_any_instance(path: &Path) -> Result<AnyInstance, CliError> {
    let text = read(path)?;
    match format::detect_kind(&text)?.as_str() {
        format::KIND_NETWORK_INSTANCE => {
            Ok(AnyInstance::Network(format::parse_network_instance(&text)?))
        }
        format::KIND_INDEX_INSTANCE => Ok(AnyInstance::Index(format::parse_index_instance(&text)?)),
        other => Err(CliError::malformed(format!(
            "expected an instance document, found kind {other}"
        ))),
    }
}

fn format_witness(failure: &DecodeFailure) -> String {
    let parts: Vec<String> = failure
        .witness
        .iter()
        .map(|(name, value)| format!("{name}={value}"))
        .collect();
    format!("at {}, witness {}", failure.entity, parts.join(", "))
}

fn dot_for_network(instance: &NetworkInstance) -> String {
    let mut out = String::from("digraph network {\n  rankdir=LR;\n");
    for n in &instance.nodes {
        let sources: Vec<&str> = instance
            .sources_at(n)
            .iter()
            .map(|s| s.id.as_str())
            .collect();
        if sources.is_empty() {
            let _ = writeln!(out, "  \"{n}\";");
        } else {
            let _ = writeln!(out, "  \"{n}\" [label=\"{n}\\nsources: {}\"];", sources.join(","));
        }
    }
    for e in &instance.edges {
        let _ = writeln!(
            out,
            "  \"{}\" -> \"{}\" [label=\"{} ({})\"];",
            e.tail,
            e.head,
            e.id,
            e.alphabet.size()
        );
    }
    out.push_str("}\n");
    out
}

fn dot_for_index(instance: &IndexInstance) -> String {
    let mut out = String::from("digraph index {\n  rankdir=LR;\n  \"sender\" [shape=box];\n");
    for r in &instance.receivers {
        let _ = writeln!(out, "  \"sender\" -> \"{}\";", r.id);
        for m in &r.has {
            let _ = writeln!(out, "  \"{m}\" -> \"{}\" [style=dashed];", r.id);
        }
        for m in &r.wants {
            let _ = writeln!(out, "  \"{}\" -> \"{m}\" [style=dotted];", r.id);
        }
    }
    out.push_str("}\n");
    out
}

fn cmd_validate(file: &Path, dot: Option<&Path>) -> Result<i32, CliError> {
    let instance = read_any_instance(file)?;
    let (report, dot_text) = match &instance {
        AnyInstance::Network(i) => (validate_network(i), dot_for_network(i)),
        AnyInstance::Index(i) => (validate_index(i), dot_for_index(i)),
    };
    if let Some(path) = dot {
        write(path, &dot_text)?;
    }
    if report.is_ok() {
        println!("ok");
        match &instance {
            AnyInstance::Network(i) => {
                for s in &i.sources {
                    println!(
                        "rate {}: {:.6} bits/symbol",
                        s.id,
                        s.alphabet.rate_bits(i.block_size_n)
                    );
                }
                for e in &i.edges {
                    println!(
                        "capacity {}: {:.6} bits/symbol",
                        e.id,
                        e.alphabet.rate_bits(i.block_size_n)
                    );
                }
            }
            AnyInstance::Index(i) => {
                for m in &i.messages {
                    println!(
                        "rate {}: {:.6} bits/symbol",
                        m.id,
                        m.alphabet.rate_bits(i.block_size_n)
                    );
                }
                println!(
                    "broadcast rate: {:.6} bits/symbol",
                    i.broadcast_alphabet.rate_bits(i.block_size_n)
                );
            }
        }
        Ok(EXIT_OK)
    } else {
        println!("{report}");
        Ok(EXIT_CHECK_FAILED)
    }
}

fn cmd_i2n(file: &Path, output: &Path, mapping_out: Option<&Path>) -> Result<i32, CliError> {
    let instance = format::parse_index_instance(&read(file)?)?;
    let (network, mapping) = index_to_network(&instance)?;
    write(output, &format::emit_network_instance(&network))?;
    let mapping_path = mapping_out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| with_suffix(output, ".mapping.json"));
    write(&mapping_path, &format::emit_mapping_record(&mapping))?;
    println!(
        "wrote {} and {}",
        output.display(),
        mapping_path.display()
    );
    Ok(EXIT_OK)
}

fn cmd_augment(file: &Path, output: &Path, record_out: Option<&Path>) -> Result<i32, CliError> {
    let instance = format::parse_network_instance(&read(file)?)?;
    let (augmented, record) = augment(&instance)?;
    write(output, &format::emit_network_instance(&augmented))?;
    let record_path = record_out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| with_suffix(output, ".record.json"));
    write(&record_path, &format::emit_augmentation_record(&record))?;
    println!("wrote {} and {}", output.display(), record_path.display());
    Ok(EXIT_OK)
}

fn cmd_n2i(
    file: &Path,
    output: &Path,
    no_augment: bool,
    mapping_out: Option<&Path>,
    augmented_out: Option<&Path>,
) -> Result<i32, CliError> {
    let instance = format::parse_network_instance(&read(file)?)?;
    let source = if no_augment {
        instance
    } else {
        let (augmented, record) = augment(&instance)?;
        let aug_path = augmented_out
            .map(Path::to_path_buf)
            .unwrap_or_else(|| with_suffix(output, ".augmented.json"));
        write(&aug_path, &format::emit_network_instance(&augmented))?;
        write(
            &with_suffix(&aug_path, ".record.json"),
            &format::emit_augmentation_record(&record),
        )?;
        println!("wrote {}", aug_path.display());
        augmented
    };
    let (index, map) = network_to_index(&source)?;
    write(output, &format::emit_index_instance(&index))?;
    let mapping_path = mapping_out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| with_suffix(output, ".mapping.json"));
    write(&mapping_path, &format::emit_network_index_map(&map))?;
    println!("wrote {} and {}", output.display(), mapping_path.display());
    Ok(EXIT_OK)
}

/// The theorem-2 forward translation materialises tables over the whole
/// message space; refuse up front rather than exhausting memory.
fn guard_table_space(instance: &NetworkInstance, budget: u64) -> Result<(), CliError> {
    let mut space: u64 = 1;
    for size in instance
        .sources
        .iter()
        .map(|s| s.alphabet.size())
        .chain(instance.edges.iter().map(|e| e.alphabet.size()))
    {
        space = space
            .checked_mul(size)
            .filter(|s| *s <= budget)
            .ok_or_else(|| {
                CliError::budget(format!(
                    "translation tables would exceed the budget of {budget} entries"
                ))
            })?;
    }
    Ok(())
}

fn cmd_translate(args: &TranslateArgs) -> Result<i32, CliError> {
    let budget = EnumerationBudget::new(args.budget);
    match (args.theorem, args.direction) {
        (1, Direction::I2n) => {
            let instance = format::parse_index_instance(&read(&args.instance)?)?;
            ensure_valid_index(&instance)?;
            let mapping = format::parse_mapping_record(&read(&args.mapping)?)?;
            let code = format::parse_index_code(&read(&args.code)?, &instance)?;
            let network_code = t1_index_code_to_network_code(&instance, &mapping, &code)?;
            write(&args.output, &format::emit_network_code(&network_code))?;
        }
        (1, Direction::N2i) => {
            let instance = format::parse_index_instance(&read(&args.instance)?)?;
            ensure_valid_index(&instance)?;
            let mapping = format::parse_mapping_record(&read(&args.mapping)?)?;
            let (network, _) = index_to_network(&instance)?;
            let code = format::parse_network_code(&read(&args.code)?, &network)?;
            let index_code = t1_network_code_to_index_code(&instance, &mapping, &code, &budget)?;
            write(&args.output, &format::emit_index_code(&index_code))?;
        }
        (2, Direction::N2i) => {
            let instance = format::parse_network_instance(&read(&args.instance)?)?;
            ensure_valid_network(&instance)?;
            guard_table_space(&instance, args.budget)?;
            let map = format::parse_network_index_map(&read(&args.mapping)?)?;
            let code = format::parse_network_code(&read(&args.code)?, &instance)?;
            let index_code = t2_network_code_to_index_code(&instance, &code, &map)?;
            write(&args.output, &format::emit_index_code(&index_code))?;
        }
        (2, Direction::I2n) => {
            let instance = format::parse_network_instance(&read(&args.instance)?)?;
            ensure_valid_network(&instance)?;
            let map = format::parse_network_index_map(&read(&args.mapping)?)?;
            let (index, _) = network_to_index(&instance)?;
            let code = format::parse_index_code(&read(&args.code)?, &index)?;
            let network_code = t2_index_code_to_network_code(&instance, &map, &code, &budget)?;
            write(&args.output, &format::emit_network_code(&network_code))?;
        }
        _ => unreachable!("clap bounds the theorem number"),
    }
    println!("wrote {}", args.output.display());
    Ok(EXIT_OK)
}

fn cmd_verify(
    instance_path: &Path,
    code_path: &Path,
    check: CheckKind,
    budget_tuples: u64,
) -> Result<i32, CliError> {
    let budget = EnumerationBudget::new(budget_tuples);
    let mut all_pass = true;
    match read_valid_instance(instance_path)? {
        AnyInstance::Network(instance) => {
            let code = format::parse_network_code(&read(code_path)?, &instance)?;
            if matches!(check, CheckKind::Decode | CheckKind::All) {
                match check_network_decodable(&instance, &code, &budget)? {
                    Verdict::Pass => println!("decodable: yes"),
                    Verdict::Fail(f) => {
                        all_pass = false;
                        println!("decodable: no ({})", format_witness(&f));
                    }
                }
            }
            if matches!(check, CheckKind::Secure | CheckKind::All) {
                match check_network_secure(&instance, &code, &budget)? {
                    Verdict::Pass => println!("secure: yes"),
                    Verdict::Fail(f) => {
                        all_pass = false;
                        println!("secure: no (eavesdropper {})", f.eavesdropper);
                    }
                }
            }
            if matches!(check, CheckKind::Recover | CheckKind::All) {
                match check_source_recoverable(&instance, &code, &budget)? {
                    Verdict::Pass => println!("recoverable: yes"),
                    Verdict::Fail(f) => {
                        all_pass = false;
                        println!("recoverable: no (source {})", f.source);
                    }
                }
            }
        }
        AnyInstance::Index(instance) => {
            if matches!(check, CheckKind::Recover) {
                return Err(CliError::malformed(
                    "source recoverability applies to network codes only",
                ));
            }
            let code = format::parse_index_code(&read(code_path)?, &instance)?;
            if matches!(check, CheckKind::Decode | CheckKind::All) {
                match check_index_decodable(&instance, &code, &budget)? {
                    Verdict::Pass => println!("decodable: yes"),
                    Verdict::Fail(f) => {
                        all_pass = false;
                        println!("decodable: no ({})", format_witness(&f));
                    }
                }
            }
            if matches!(check, CheckKind::Secure | CheckKind::All) {
                match check_index_secure(&instance, &code, &budget)? {
                    Verdict::Pass => println!("secure: yes"),
                    Verdict::Fail(f) => {
                        all_pass = false;
                        println!("secure: no (eavesdropper {})", f.eavesdropper);
                    }
                }
            }
        }
    }
    Ok(if all_pass { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn parse_key_sizes(specs: &[String]) -> Result<BTreeMap<String, Alphabet>, CliError> {
    let mut map = BTreeMap::new();
    for spec in specs {
        let (node, size) = spec
            .split_once('=')
            .ok_or_else(|| CliError::malformed(format!("bad --key-size {spec}, want NODE=SIZE")))?;
        let size: u64 = size
            .parse()
            .map_err(|_| CliError::malformed(format!("bad key size in {spec}")))?;
        if size == 0 {
            return Err(CliError::malformed("key size must be positive"));
        }
        map.insert(node.to_string(), Alphabet::new(size));
    }
    Ok(map)
}

/// Default key alphabets for a network search: each node's out-edge size
/// product, the sizes the augmented construction assigns.
fn default_key_sizes(instance: &NetworkInstance) -> Result<BTreeMap<String, Alphabet>, CliError> {
    let mut map = BTreeMap::new();
    for node in &instance.nodes {
        let size = instance
            .out_edges(node)
            .iter()
            .try_fold(1u64, |acc, e| acc.checked_mul(e.alphabet.size()))
            .ok_or_else(|| CliError::malformed("key size product overflows"))?;
        map.insert(node.clone(), Alphabet::new(size));
    }
    Ok(map)
}

#[allow(clippy::too_many_arguments)]
fn cmd_search(
    instance_path: &Path,
    key_sizes: &[String],
    sender_key_size: u64,
    budget: u64,
    joint_budget: u64,
    prune: bool,
    output: Option<&Path>,
) -> Result<i32, CliError> {
    let search_budget = SearchBudget {
        max_candidate_codes: budget,
        max_joint_tuples: joint_budget,
    };
    let options = SearchOptions {
        symmetry_pruning: prune,
        ..Default::default()
    };
    match read_valid_instance(instance_path)? {
        AnyInstance::Network(instance) => {
            let keys = if key_sizes.is_empty() {
                default_key_sizes(&instance)?
            } else {
                parse_key_sizes(key_sizes)?
            };
            match search_network_codes(&instance, &keys, &search_budget, &options)? {
                SearchOutcome::Feasible(code) => {
                    println!("Feasible");
                    let doc = format::emit_network_code(&code);
                    match output {
                        Some(path) => write(path, &doc)?,
                        None => print!("{doc}"),
                    }
                    Ok(EXIT_OK)
                }
                SearchOutcome::Infeasible => {
                    println!("Infeasible");
                    Ok(EXIT_OK)
                }
                SearchOutcome::BudgetExceeded => {
                    println!("BudgetExceeded");
                    Ok(EXIT_BUDGET)
                }
            }
        }
        AnyInstance::Index(instance) => {
            if sender_key_size == 0 {
                return Err(CliError::malformed("sender key size must be positive"));
            }
            match search_index_codes(
                &instance,
                Alphabet::new(sender_key_size),
                &search_budget,
                &options,
            )? {
                SearchOutcome::Feasible(code) => {
                    println!("Feasible");
                    let doc = format::emit_index_code(&code);
                    match output {
                        Some(path) => write(path, &doc)?,
                        None => print!("{doc}"),
                    }
                    Ok(EXIT_OK)
                }
                SearchOutcome::Infeasible => {
                    println!("Infeasible");
                    Ok(EXIT_OK)
                }
                SearchOutcome::BudgetExceeded => {
                    println!("BudgetExceeded");
                    Ok(EXIT_BUDGET)
                }
            }
        }
    }
}

fn cmd_equiv(
    instance_path: &Path,
    budget: u64,
    joint_budget: u64,
    sender_key_size: u64,
) -> Result<i32, CliError> {
    let instance = format::parse_index_instance(&read(instance_path)?)?;
    if sender_key_size == 0 {
        return Err(CliError::malformed("sender key size must be positive"));
    }
    let report = feasibility_equivalence(
        &instance,
        Alphabet::new(sender_key_size),
        &SearchBudget {
            max_candidate_codes: budget,
            max_joint_tuples: joint_budget,
        },
        &SearchOptions::default(),
    )?;
    let yn = |b: bool| if b { "yes" } else { "no" };
    println!(
        "index feasible: {}, network feasible: {}, agree: {}",
        yn(report.index_feasible),
        yn(report.network_feasible),
        yn(report.agree)
    );
    Ok(if report.agree { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn split_group(spec: &str) -> Vec<String> {
    spec.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

fn cmd_entropy(
    instance_path: &Path,
    code_path: &Path,
    of: &str,
    given: &str,
    budget_tuples: u64,
) -> Result<i32, CliError> {
    let budget = EnumerationBudget::new(budget_tuples);
    let of_group = split_group(of);
    let given_group = split_group(given);
    if of_group.is_empty() {
        return Err(CliError::malformed("--of must name at least one variable"));
    }

    let value = match read_valid_instance(instance_path)? {
        AnyInstance::Network(instance) => {
            let code = format::parse_network_code(&read(code_path)?, &instance)?;
            let inputs: Vec<(String, Alphabet)> = network_input_slots(&instance, &code.key_alphabets)
                .into_iter()
                .map(|s| (s.name, s.alphabet))
                .collect();
            let space = inputs
                .iter()
                .fold(1u64, |a, (_, al)| a.saturating_mul(al.size()));
            if space > budget_tuples {
                return Err(CliError::budget(format!(
                    "input space of {space} tuples exceeds the enumeration budget of {budget_tuples}"
                )));
            }
            let globals = global_encodings(&instance, &code).map_err(VerifyError::from)?;
            let derived = globals
                .into_iter()
                .map(|(id, f)| (edge_variable_name(&id), f))
                .collect();
            let joint = build_joint(inputs, derived, &budget)?;
            conditional_entropy_bits(&joint, &of_group, &given_group)?
        }
        AnyInstance::Index(instance) => {
            let code = format::parse_index_code(&read(code_path)?, &instance)?;
            let inputs: Vec<(String, Alphabet)> = index_input_slots(&instance, code.key_alphabet)
                .into_iter()
                .map(|s| (s.name, s.alphabet))
                .collect();
            let joint = build_joint(
                inputs,
                vec![(BROADCAST_VARIABLE.to_string(), code.encoder.clone())],
                &budget,
            )?;
            conditional_entropy_bits(&joint, &of_group, &given_group)?
        }
    };
    println!(
        "H({} | {}) = {:.9} bits",
        of_group.join(","),
        if given_group.is_empty() {
            "-".to_string()
        } else {
            given_group.join(",")
        },
        value
    );
    Ok(EXIT_OK)
}

/// Runs the CLI on explicit arguments and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // Clap prints help/version to stdout with success.
            let code = if e.use_stderr() { EXIT_MALFORMED } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Validate { file, dot } => cmd_validate(file, dot.as_deref()),
        Command::I2n {
            file,
            output,
            mapping_out,
        } => cmd_i2n(file, output, mapping_out.as_deref()),
        Command::Augment {
            file,
            output,
            record_out,
        } => cmd_augment(file, output, record_out.as_deref()),
        Command::N2i {
            file,
            output,
            no_augment,
            mapping_out,
            augmented_out,
        } => cmd_n2i(
            file,
            output,
            *no_augment,
            mapping_out.as_deref(),
            augmented_out.as_deref(),
        ),
        Command::Translate(args) => cmd_translate(args),
        Command::Verify {
            instance,
            code,
            check,
            budget,
        } => cmd_verify(instance, code, *check, *budget),
        Command::Search {
            instance,
            key_sizes,
            sender_key_size,
            budget,
            joint_budget,
            prune,
            output,
        } => cmd_search(
            instance,
            key_sizes,
            *sender_key_size,
            *budget,
            *joint_budget,
            *prune,
            output.as_deref(),
        ),
        Command::Equiv {
            instance,
            budget,
            joint_budget,
            sender_key_size,
        } => cmd_equiv(instance, *budget, *joint_budget, *sender_key_size),
        Command::Entropy {
            instance,
            code,
            of,
            given,
            budget,
        } => cmd_entropy(instance, code, of, given, *budget),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.exit
        }
    }
}
