//! File and flag parsing: tableaux, graphs, tuples, partitions.

use std::path::Path;

use plckit::field::FieldOrder;
use plckit::stabilizer::{GraphAdjacency, StabilizerTableau};
use plckit::symplectic::PartyPartition;
use plckit::CommutationTuple;

use crate::InputError;

fn read(path: &Path) -> Result<String, InputError> {
    std::fs::read_to_string(path)
        .map_err(|e| InputError(format!("cannot read {}: {e}", path.display())))
}

/// Resolves the field order used for inputs that carry their own (`d` in
/// a JSON file): an explicit `--d` must agree with the file.
pub fn check_file_order(flag: Option<u64>, file_d: u64, what: &str) -> Result<(), InputError> {
    match flag {
        Some(f) if f != file_d => Err(InputError(format!(
            "--d {f} conflicts with {what} declaring d = {file_d}"
        ))),
        _ => Ok(()),
    }
}

/// Field order for inputs that do not carry one (graphs, searches).
pub fn order_or_default(flag: Option<u64>) -> Result<FieldOrder, InputError> {
    FieldOrder::new(flag.unwrap_or(2)).map_err(|e| InputError(e.to_string()))
}

/// Loads a tableau JSON file, verifying its invariants and `--d` agreement.
pub fn load_state(path: &Path, flag_d: Option<u64>) -> Result<StabilizerTableau, InputError> {
    let text = read(path)?;
    let state = StabilizerTableau::from_json_str(&text)
        .map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    check_file_order(flag_d, u64::from(state.order().order()), "the tableau")?;
    let report = state.validate();
    if !report.is_valid() {
        return Err(InputError(format!(
            "{}: not a stabilizer state: {}",
            path.display(),
            report.violations.join("; ")
        )));
    }
    Ok(state)
}

/// Loads a graph edge-list file: an `n=<count>` header line, then one
/// `i j` or `i j m` line per edge (1-indexed sites, `#` comments allowed).
pub fn load_graph(path: &Path, order: FieldOrder) -> Result<GraphAdjacency, InputError> {
    let text = read(path)?;
    let mut n: Option<usize> = None;
    let mut edge_lines = String::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if n.is_none() {
            let count = line
                .strip_prefix("n=")
                .and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| {
                    InputError(format!(
                        "{}: first line must be an 'n=<count>' header, got '{line}'",
                        path.display()
                    ))
                })?;
            n = Some(count);
        } else {
            edge_lines.push_str(line);
            edge_lines.push('\n');
        }
    }
    let n = n.ok_or_else(|| InputError(format!("{}: empty graph file", path.display())))?;
    GraphAdjacency::from_edge_lines(n, order, &edge_lines)
        .map_err(|e| InputError(format!("{}: {e}", path.display())))
}

/// Loads a state given either a tableau file or a graph file.
pub fn load_state_or_graph(
    state: Option<&Path>,
    graph: Option<&Path>,
    flag_d: Option<u64>,
    what: &str,
) -> Result<StabilizerTableau, InputError> {
    match (state, graph) {
        (Some(path), None) => load_state(path, flag_d),
        (None, Some(path)) => {
            let order = order_or_default(flag_d)?;
            Ok(load_graph(path, order)?.graph_state())
        }
        _ => Err(InputError(format!(
            "{what}: provide exactly one of a tableau file or a graph file"
        ))),
    }
}

/// Loads a commutation-tuple JSON file, verifying `--d` agreement.
pub fn load_tuple(path: &Path, flag_d: Option<u64>) -> Result<CommutationTuple, InputError> {
    let text = read(path)?;
    let tuple = CommutationTuple::from_json_str(&text)
        .map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    check_file_order(flag_d, u64::from(tuple.order().order()), "the tuple")?;
    Ok(tuple)
}

/// Parses the `--partition` flag against a known site count.
pub fn parse_partition(spec: &str, n: usize) -> Result<PartyPartition, InputError> {
    let partition =
        PartyPartition::parse(spec).map_err(|e| InputError(format!("--partition '{spec}': {e}")))?;
    if partition.num_sites() != n {
        return Err(InputError(format!(
            "--partition '{spec}' covers {} sites but the input has {n}",
            partition.num_sites()
        )));
    }
    Ok(partition)
}

/// Parses the `--sizes` flag into party sizes.
pub fn parse_sizes(spec: &str) -> Result<Vec<usize>, InputError> {
    spec.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<usize>()
                .map_err(|_| InputError(format!("--sizes '{spec}': '{tok}' is not a count")))
        })
        .collect()
}
