//! Desk-scale entanglement-generating-set (EGS) searches.
//!
//! An EGS for a party layout is a minimal set of indecomposable states
//! generating every state on that layout under party-local Cliffords and
//! tensor products. This module enumerates graph states per party
//! configuration, filters out decomposable ones, deduplicates the survivors
//! into congruence classes, and reports one representative per class. It
//! also covers the spiral family (an infinite four-party EGS), an ingestion
//! path for precomputed local-Clifford orbit databases, qutrit multigraph
//! searches, and the two-site Clifford coset verification.
//!
//! Soundness over completeness: any search outcome the budgets could not
//! settle is quarantined and reported, and a report is only `complete` when
//! its enumeration finished and its quarantine is empty.

use crate::commutation::{CommutationError, CommutationTuple};
use crate::equivalence::{
    congruence_equivalent, congruence_equivalent_matrices, endomorphism_basis_of, fitting_split,
    fitting_split_matrices, subset_rank_profile, EquivalenceError, EquivalenceVerdict,
    SearchLimits, SplitVerdict,
};
use crate::field::{FieldOrder, PrimeFieldMatrix};
use crate::stabilizer::{GraphAdjacency, StabilizerError};
use crate::symplectic::{PartitionError, PartyPartition};
use rayon::prelude::*;
use std::collections::{HashMap, HashSet};
use thiserror::Error;

/// Errors from EGS searches and verification batteries.
#[derive(Debug, Error)]
pub enum EgsError {
    /// A party configuration with no parties or an empty party.
    #[error("invalid party configuration: {0}")]
    InvalidConfiguration(String),
    /// Spiral graphs need at least four sites.
    #[error("a spiral graph needs at least 4 sites, got {n}")]
    SpiralTooShort {
        /// Requested site count.
        n: usize,
    },
    /// The graph enumeration would exceed the budget.
    #[error("enumerating {space} graphs exceeds the budget of {budget}")]
    EnumerationTooLarge {
        /// Graphs the enumeration would visit.
        space: u128,
        /// The budget in force.
        budget: u128,
    },
    /// A malformed orbit-database file.
    #[error("orbit database, line {line}: {reason}")]
    DatabaseParse {
        /// 1-indexed line of the offending text.
        line: usize,
        /// What went wrong.
        reason: String,
    },
    /// The coset verification found a collision or a shortfall.
    #[error("coset verification failed: {0}")]
    CosetCheck(String),
    /// Underlying equivalence error.
    #[error(transparent)]
    Equivalence(#[from] EquivalenceError),
    /// Underlying tuple error.
    #[error(transparent)]
    Commutation(#[from] CommutationError),
    /// Underlying graph error.
    #[error(transparent)]
    Stabilizer(#[from] StabilizerError),
    /// Underlying partition error.
    #[error(transparent)]
    Partition(#[from] PartitionError),
}

/// An ordered list of party sizes, e.g. `(2, 2, 2, 1)`. Sites are laid out
/// consecutively: party 0 holds the first `sizes[0]` sites, and so on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartyConfiguration {
    sizes: Vec<usize>,
}

impl PartyConfiguration {
    /// Validates that every party has at least one site.
    pub fn new(sizes: Vec<usize>) -> Result<Self, EgsError> {
        if sizes.is_empty() {
            return Err(EgsError::InvalidConfiguration("no parties".into()));
        }
        if sizes.contains(&0) {
            return Err(EgsError::InvalidConfiguration(
                "every party needs at least one site".into(),
            ));
        }
        Ok(PartyConfiguration { sizes })
    }

    /// The party sizes in order.
    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Total number of sites.
    pub fn num_sites(&self) -> usize {
        self.sizes.iter().sum()
    }

    /// Number of parties.
    pub fn party_count(&self) -> usize {
        self.sizes.len()
    }

    /// The consecutive-blocks partition realizing this configuration.
    pub fn partition(&self) -> PartyPartition {
        PartyPartition::consecutive(&self.sizes).expect("sizes validated nonzero")
    }
}

/// One discovered class: a representative graph and its commutation tuple.
#[derive(Clone, Debug)]
pub struct EgsClass {
    /// Representative graph (first hit in enumeration order).
    pub graph: GraphAdjacency,
    /// Its commutation tuple on the configuration's partition.
    pub tuple: CommutationTuple,
}

/// Result of an EGS search over one party configuration.
#[derive(Clone, Debug)]
pub struct EgsReport {
    /// The configuration searched.
    pub configuration: PartyConfiguration,
    /// The field of the search.
    pub order: FieldOrder,
    /// Graphs the full enumeration comprises.
    pub graphs_total: u128,
    /// Graphs actually visited (less than the total only when the budget
    /// truncated the run).
    pub graphs_processed: u128,
    /// One representative per discovered congruence class, pairwise
    /// inequivalent and each indecomposable, in enumeration order.
    pub representatives: Vec<EgsClass>,
    /// Graphs whose splitting or deduplication the budgets could not
    /// settle — never silently dropped.
    pub quarantined: Vec<GraphAdjacency>,
    /// Number of representatives.
    pub class_count: usize,
    /// Classes remaining after identifying representatives that differ
    /// only by a size-preserving relabeling of parties.
    pub class_count_up_to_party_relabeling: usize,
    /// True when the enumeration finished and nothing is quarantined.
    pub complete: bool,
}

/// Result of the two-site Clifford coset verification.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CosetCheckReport {
    /// Order of the two-site symplectic group over `Z_2`.
    pub group_order: usize,
    /// Order of its site-local subgroup.
    pub subgroup_order: usize,
    /// Number of right cosets (`group_order / subgroup_order`).
    pub coset_count: usize,
    /// Table sequences composed and placed into distinct cosets.
    pub sequences_verified: usize,
    /// Indices of table sequences landing in the local subgroup's own coset.
    pub local_sequences: Vec<usize>,
}

/// Per-length verdict on the spiral family.
#[derive(Clone, Debug)]
pub struct SpiralVerdict {
    /// Path length.
    pub n: usize,
    /// Splitting verdict for the full four-party spiral tuple.
    pub whole: SplitVerdict,
    /// Splitting verdict for the two-matrix family obtained by merging
    /// parties 1∪2 and 2∪3.
    pub merged_pair: SplitVerdict,
}

// ---------------------------------------------------------------------------
// Graph enumeration.

/// All site pairs `(i, j)` with `i < j`, in lexicographic order. Pair `t`
/// of this list carries digit `t` of an enumeration index.
pub fn site_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect()
}

/// `d^(n(n−1)/2)`, the number of labeled multigraphs on `n` sites; `None`
/// on overflow.
pub fn enumeration_size(n: usize, order: FieldOrder) -> Option<u128> {
    let pairs = n * n.saturating_sub(1) / 2;
    u128::from(order.order()).checked_pow(u32::try_from(pairs).ok()?)
}

fn decode_multiplicities(mut index: u128, d: u128, out: &mut [u8]) {
    for slot in out.iter_mut() {
        *slot = (index % d) as u8;
        index /= d;
    }
}

fn graph_from_digits(
    n: usize,
    order: FieldOrder,
    pairs: &[(usize, usize)],
    digits: &[u8],
) -> GraphAdjacency {
    let edges: Vec<(usize, usize, u8)> = pairs
        .iter()
        .zip(digits)
        .filter(|(_, &m)| m != 0)
        .map(|(&(i, j), &m)| (i, j, m))
        .collect();
    GraphAdjacency::from_weighted_edges(n, order, &edges).expect("pairs are distinct sites")
}

/// The `index`-th multigraph in the fixed enumeration order: base-`d`
/// digits of the index are edge multiplicities on [`site_pairs`].
pub fn graph_from_index(n: usize, order: FieldOrder, index: u128) -> GraphAdjacency {
    let pairs = site_pairs(n);
    let mut digits = vec![0u8; pairs.len()];
    decode_multiplicities(index, u128::from(order.order()), &mut digits);
    graph_from_digits(n, order, &pairs, &digits)
}

/// Every labeled multigraph on the configuration's sites, paired with the
/// fixed partition. Errors when the enumeration exceeds `budget`.
pub fn enumerate_graph_states(
    config: &PartyConfiguration,
    order: FieldOrder,
    budget: u128,
) -> Result<impl Iterator<Item = (GraphAdjacency, PartyPartition)>, EgsError> {
    let n = config.num_sites();
    let total = enumeration_size(n, order).unwrap_or(u128::MAX);
    if total > budget {
        return Err(EgsError::EnumerationTooLarge {
            space: total,
            budget,
        });
    }
    let partition = config.partition();
    Ok((0..total).map(move |idx| (graph_from_index(n, order, idx), partition.clone())))
}

// ---------------------------------------------------------------------------
// The search pipeline.

struct Survivor {
    graph: GraphAdjacency,
    tuple: CommutationTuple,
}

enum PipelineOutcome {
    Decomposable,
    Quarantined(GraphAdjacency),
    Survivor(Survivor),
}

/// Rank skip plus splitting filter for one candidate graph.
fn filter_candidate(
    graph: GraphAdjacency,
    partition: &PartyPartition,
    limits: &SearchLimits,
) -> Result<PipelineOutcome, EgsError> {
    let n = graph.num_sites();
    let tuple = CommutationTuple::from_graph(&graph, partition)?;
    // A joint-rank deficit means a basis change splits off a zero block, so
    // any such graph on n ≥ 2 sites is decomposable without further work.
    if n >= 2 && tuple.concatenated_rank() < n {
        return Ok(PipelineOutcome::Decomposable);
    }
    Ok(match fitting_split_matrices(tuple.matrices(), limits)? {
        SplitVerdict::Split { .. } => PipelineOutcome::Decomposable,
        SplitVerdict::Inconclusive => PipelineOutcome::Quarantined(graph),
        SplitVerdict::Indecomposable => PipelineOutcome::Survivor(Survivor { graph, tuple }),
    })
}

/// Greedy congruence deduplication of survivors, bucketed by the cheap
/// invariants (subset rank profile, endomorphism ring dimension) so that
/// full congruence runs only within a bucket. A survivor whose comparison
/// is inconclusive is quarantined, not guessed.
fn dedup_classes(
    survivors: Vec<Survivor>,
    limits: &SearchLimits,
    quarantined: &mut Vec<GraphAdjacency>,
) -> Result<Vec<EgsClass>, EgsError> {
    let mut representatives: Vec<EgsClass> = Vec::new();
    let mut buckets: HashMap<(Vec<usize>, usize), Vec<usize>> = HashMap::new();
    for s in survivors {
        let key = (
            subset_rank_profile(s.tuple.matrices()),
            endomorphism_basis_of(s.tuple.matrices()).len(),
        );
        let bucket = buckets.entry(key).or_default();
        let mut duplicate = false;
        let mut undecided = false;
        for &r in bucket.iter() {
            match congruence_equivalent(&representatives[r].tuple, &s.tuple, limits)? {
                EquivalenceVerdict::Equivalent(_) => {
                    duplicate = true;
                    break;
                }
                EquivalenceVerdict::Inequivalent => {}
                EquivalenceVerdict::Inconclusive => {
                    undecided = true;
                    break;
                }
            }
        }
        if undecided {
            quarantined.push(s.graph);
        } else if !duplicate {
            bucket.push(representatives.len());
            representatives.push(EgsClass {
                graph: s.graph,
                tuple: s.tuple,
            });
        }
    }
    Ok(representatives)
}

fn permutations_of(m: usize) -> Vec<Vec<usize>> {
    fn rec(m: usize, cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for v in 0..m {
            if !used[v] {
                used[v] = true;
                cur.push(v);
                rec(m, cur, used, out);
                cur.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(m, &mut Vec::with_capacity(m), &mut vec![false; m], &mut out);
    out
}

/// All permutations of the party indices that map each party to one of the
/// same size.
pub fn size_preserving_permutations(sizes: &[usize]) -> Vec<Vec<usize>> {
    permutations_of(sizes.len())
        .into_iter()
        .filter(|p| p.iter().enumerate().all(|(a, &b)| sizes[a] == sizes[b]))
        .collect()
}

/// Whether the tuple matches some report representative up to a
/// size-preserving relabeling of parties.
pub fn report_contains_class(
    report: &EgsReport,
    tuple: &CommutationTuple,
    limits: &SearchLimits,
) -> Result<bool, EgsError> {
    let perms = size_preserving_permutations(report.configuration.sizes());
    for rep in &report.representatives {
        for perm in &perms {
            let permuted: Vec<PrimeFieldMatrix> =
                perm.iter().map(|&a| rep.tuple.matrix(a).clone()).collect();
            if congruence_equivalent_matrices(&permuted, tuple.matrices(), limits)?
                .is_equivalent()
            {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

fn relabel_class_count(
    representatives: &[EgsClass],
    sizes: &[usize],
    limits: &SearchLimits,
) -> Result<usize, EgsError> {
    let perms = size_preserving_permutations(sizes);
    let mut leaders: Vec<usize> = Vec::new();
    'rep: for r in 0..representatives.len() {
        for &l in &leaders {
            for perm in &perms {
                let permuted: Vec<PrimeFieldMatrix> = perm
                    .iter()
                    .map(|&a| representatives[l].tuple.matrix(a).clone())
                    .collect();
                if congruence_equivalent_matrices(
                    &permuted,
                    representatives[r].tuple.matrices(),
                    limits,
                )?
                .is_equivalent()
                {
                    continue 'rep;
                }
            }
        }
        leaders.push(r);
    }
    Ok(leaders.len())
}

fn assemble_report(
    config: &PartyConfiguration,
    order: FieldOrder,
    graphs_total: u128,
    graphs_processed: u128,
    survivors: Vec<Survivor>,
    mut quarantined: Vec<GraphAdjacency>,
    limits: &SearchLimits,
) -> Result<EgsReport, EgsError> {
    let representatives = dedup_classes(survivors, limits, &mut quarantined)?;
    let class_count = representatives.len();
    let class_count_up_to_party_relabeling =
        relabel_class_count(&representatives, config.sizes(), limits)?;
    let complete = graphs_processed == graphs_total && quarantined.is_empty();
    Ok(EgsReport {
        configuration: config.clone(),
        order,
        graphs_total,
        graphs_processed,
        representatives,
        quarantined,
        class_count,
        class_count_up_to_party_relabeling,
        complete,
    })
}

/// Exhaustive EGS search over every labeled multigraph on the
/// configuration. Graphs with intra-party edges are dismissed outright —
/// toggling an edge inside a party is a party-local move, so each of their
/// classes is also hit by a cross-party-only graph in the same sweep.
/// Deduplication is a sequential reduction in enumeration order, so the
/// report is independent of the worker count.
pub fn egs_search(
    config: &PartyConfiguration,
    order: FieldOrder,
    limits: &SearchLimits,
    graph_budget: u128,
) -> Result<EgsReport, EgsError> {
    let n = config.num_sites();
    let partition = config.partition();
    let pairs = site_pairs(n);
    let total = enumeration_size(n, order).ok_or(EgsError::EnumerationTooLarge {
        space: u128::MAX,
        budget: graph_budget,
    })?;
    let processed = total.min(graph_budget);
    let d = u128::from(order.order());
    let intra: Vec<bool> = pairs
        .iter()
        .map(|&(i, j)| partition.site_party(i) == partition.site_party(j))
        .collect();

    const CHUNK: u128 = 4096;
    let chunk_count = processed.div_ceil(CHUNK);
    let chunk_results: Result<Vec<(Vec<Survivor>, Vec<GraphAdjacency>)>, EgsError> = (0
        ..chunk_count)
        .into_par_iter()
        .map(|chunk| {
            let start = chunk * CHUNK;
            let end = (start + CHUNK).min(processed);
            let mut survivors = Vec::new();
            let mut quarantine = Vec::new();
            let mut digits = vec![0u8; pairs.len()];
            for idx in start..end {
                decode_multiplicities(idx, d, &mut digits);
                if digits
                    .iter()
                    .zip(&intra)
                    .any(|(&m, &within)| within && m != 0)
                {
                    continue;
                }
                let graph = graph_from_digits(n, order, &pairs, &digits);
                match filter_candidate(graph, &partition, limits)? {
                    PipelineOutcome::Decomposable => {}
                    PipelineOutcome::Quarantined(g) => quarantine.push(g),
                    PipelineOutcome::Survivor(s) => survivors.push(s),
                }
            }
            Ok((survivors, quarantine))
        })
        .collect();

    let mut survivors = Vec::new();
    let mut quarantined = Vec::new();
    for (s, q) in chunk_results? {
        survivors.extend(s);
        quarantined.extend(q);
    }
    assemble_report(
        config,
        order,
        total,
        processed,
        survivors,
        quarantined,
        limits,
    )
}

/// [`egs_search`] over ternary multigraphs.
pub fn qutrit_egs_search(
    config: &PartyConfiguration,
    limits: &SearchLimits,
    graph_budget: u128,
) -> Result<EgsReport, EgsError> {
    egs_search(config, FieldOrder::THREE, limits, graph_budget)
}

// ---------------------------------------------------------------------------
// Orbit-database ingestion.

struct DatabaseBlock {
    header_line: usize,
    n: usize,
    edges: Vec<(usize, usize, u8)>,
    seen: HashSet<(usize, usize)>,
}

fn finish_block(
    block: DatabaseBlock,
    order: FieldOrder,
    out: &mut Vec<(usize, GraphAdjacency)>,
) -> Result<(), EgsError> {
    let graph = GraphAdjacency::from_weighted_edges(block.n, order, &block.edges).map_err(
        |e| EgsError::DatabaseParse {
            line: block.header_line,
            reason: format!("invalid graph block: {e}"),
        },
    )?;
    out.push((block.header_line, graph));
    Ok(())
}

/// Parses an orbit-database file: blocks separated by blank lines, each a
/// header `n=<count>` followed by 1-indexed edge lines `i j` or `i j m`
/// (multiplicity defaults to 1). Lines starting with `#` are comments.
/// Returns each graph with its header's line number.
pub fn parse_orbit_database(
    text: &str,
    order: FieldOrder,
) -> Result<Vec<(usize, GraphAdjacency)>, EgsError> {
    let d = u64::from(order.order());
    let mut graphs = Vec::new();
    let mut current: Option<DatabaseBlock> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.trim();
        if content.is_empty() {
            if let Some(block) = current.take() {
                finish_block(block, order, &mut graphs)?;
            }
            continue;
        }
        if content.starts_with('#') {
            continue;
        }
        match current.as_mut() {
            None => {
                let n = content
                    .strip_prefix("n=")
                    .and_then(|v| v.trim().parse::<usize>().ok())
                    .ok_or_else(|| EgsError::DatabaseParse {
                        line,
                        reason: format!("expected a header like `n=4`, found `{content}`"),
                    })?;
                if n == 0 {
                    return Err(EgsError::DatabaseParse {
                        line,
                        reason: "site count must be positive".into(),
                    });
                }
                current = Some(DatabaseBlock {
                    header_line: line,
                    n,
                    edges: Vec::new(),
                    seen: HashSet::new(),
                });
            }
            Some(block) => {
                let tokens: Vec<&str> = content.split_whitespace().collect();
                if tokens.len() != 2 && tokens.len() != 3 {
                    return Err(EgsError::DatabaseParse {
                        line,
                        reason: format!(
                            "expected `i j` or `i j multiplicity`, found `{content}`"
                        ),
                    });
                }
                let parse_site = |tok: &str| -> Result<usize, EgsError> {
                    let v = tok.parse::<usize>().map_err(|_| EgsError::DatabaseParse {
                        line,
                        reason: format!("`{tok}` is not a site number"),
                    })?;
                    if v == 0 || v > block.n {
                        return Err(EgsError::DatabaseParse {
                            line,
                            reason: format!("site {v} out of range 1..={}", block.n),
                        });
                    }
                    Ok(v - 1)
                };
                let a = parse_site(tokens[0])?;
                let b = parse_site(tokens[1])?;
                if a == b {
                    return Err(EgsError::DatabaseParse {
                        line,
                        reason: format!("self-loop at site {}", a + 1),
                    });
                }
                let raw_mult = match tokens.get(2) {
                    None => 1u64,
                    Some(tok) => tok.parse::<u64>().map_err(|_| EgsError::DatabaseParse {
                        line,
                        reason: format!("`{tok}` is not a multiplicity"),
                    })?,
                };
                let m = (raw_mult % d) as u8;
                if m == 0 {
                    return Err(EgsError::DatabaseParse {
                        line,
                        reason: format!(
                            "multiplicity {raw_mult} vanishes modulo the field order {d}"
                        ),
                    });
                }
                let pair = (a.min(b), a.max(b));
                if !block.seen.insert(pair) {
                    return Err(EgsError::DatabaseParse {
                        line,
                        reason: format!("duplicate edge {} {}", pair.0 + 1, pair.1 + 1),
                    });
                }
                block.edges.push((pair.0, pair.1, m));
            }
        }
    }
    if let Some(block) = current.take() {
        finish_block(block, order, &mut graphs)?;
    }
    Ok(graphs)
}

fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    if items.len() < k {
        return Vec::new();
    }
    let mut out = Vec::new();
    for (i, &first) in items.iter().enumerate() {
        for rest in combinations(&items[i + 1..], k - 1) {
            let mut v = Vec::with_capacity(k);
            v.push(first);
            v.extend(rest);
            out.push(v);
        }
    }
    out
}

/// All assignments of `n` source vertices to the configuration's site
/// slots, one per coset of party-internal reorderings: within each party
/// block the assigned source vertices are increasing.
fn party_assignments(n: usize, sizes: &[usize]) -> Vec<Vec<usize>> {
    fn rec(
        remaining: &[usize],
        sizes: &[usize],
        acc: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        match sizes.first() {
            None => out.push(acc.clone()),
            Some(&k) => {
                for chosen in combinations(remaining, k) {
                    let rest: Vec<usize> = remaining
                        .iter()
                        .copied()
                        .filter(|v| !chosen.contains(v))
                        .collect();
                    let before = acc.len();
                    acc.extend(&chosen);
                    rec(&rest, &sizes[1..], acc, out);
                    acc.truncate(before);
                }
            }
        }
    }
    let all: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    rec(&all, sizes, &mut Vec::with_capacity(n), &mut out);
    out
}

/// EGS search seeded from an orbit database instead of a full enumeration:
/// every parsed representative graph is distributed over the configuration
/// in all party-distinct ways, then run through the same filter pipeline.
pub fn egs_search_from_orbit_database(
    text: &str,
    config: &PartyConfiguration,
    order: FieldOrder,
    limits: &SearchLimits,
    graph_budget: u128,
) -> Result<EgsReport, EgsError> {
    let graphs = parse_orbit_database(text, order)?;
    let n = config.num_sites();
    for &(line, ref g) in &graphs {
        if g.num_sites() != n {
            return Err(EgsError::DatabaseParse {
                line,
                reason: format!(
                    "graph has {} sites but the configuration needs {n}",
                    g.num_sites()
                ),
            });
        }
    }
    let partition = config.partition();
    let assignments = party_assignments(n, config.sizes());
    let total = graphs.len() as u128 * assignments.len() as u128;
    let mut processed = 0u128;
    let mut survivors = Vec::new();
    let mut quarantined = Vec::new();
    'outer: for (_, source) in &graphs {
        let gamma = source.matrix();
        for sigma in &assignments {
            if processed == graph_budget {
                break 'outer;
            }
            processed += 1;
            let relabeled =
                PrimeFieldMatrix::from_fn(n, n, order, |a, b| gamma.get(sigma[a], sigma[b]));
            let graph = GraphAdjacency::from_matrix(relabeled)?;
            match filter_candidate(graph, &partition, limits)? {
                PipelineOutcome::Decomposable => {}
                PipelineOutcome::Quarantined(g) => quarantined.push(g),
                PipelineOutcome::Survivor(s) => survivors.push(s),
            }
        }
    }
    assemble_report(
        config,
        order,
        total,
        processed,
        survivors,
        quarantined,
        limits,
    )
}

// ---------------------------------------------------------------------------
// The spiral family.

/// The length-`n` spiral: a path graph with sites dealt cyclically to four
/// parties (site `j`, 0-indexed, to party `j mod 4`). Under this layout the
/// two path endpoints' generators touch two parties and every interior
/// generator touches three.
pub fn spiral_graph(
    n: usize,
    order: FieldOrder,
) -> Result<(GraphAdjacency, PartyPartition), EgsError> {
    if n < 4 {
        return Err(EgsError::SpiralTooShort { n });
    }
    let graph = GraphAdjacency::path(n, order);
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); 4];
    for site in 0..n {
        groups[site % 4].push(site);
    }
    let partition = PartyPartition::new(n, groups)?;
    Ok((graph, partition))
}

/// Runs the splitting filter on each spiral length: the full four-party
/// tuple, and the two-matrix family from merging parties 1∪2 and 2∪3.
pub fn verify_spiral_family(
    lengths: &[usize],
    order: FieldOrder,
    limits: &SearchLimits,
) -> Result<Vec<SpiralVerdict>, EgsError> {
    lengths
        .iter()
        .map(|&n| {
            let (graph, partition) = spiral_graph(n, order)?;
            let tuple = CommutationTuple::from_graph(&graph, &partition)?;
            let whole = fitting_split(&tuple, limits)?;
            // The two-member probe merges interleaving party groups: the
            // first member unions the two parties that jointly cover the
            // even path positions, the second re-pairs the inner one of
            // those with the first odd-position party.  Merging adjacent
            // groups instead yields a pair that is rigid over every field
            // and would hide the ternary even-length splits.
            let merged = [
                tuple.matrix(0).add(tuple.matrix(2)),
                tuple.matrix(2).add(tuple.matrix(1)),
            ];
            let merged_pair = fitting_split_matrices(&merged, limits)?;
            Ok(SpiralVerdict {
                n,
                whole,
                merged_pair,
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Two-site Clifford coset verification.

/// The 20 generation sequences of the two-site coset table, as indices
/// into the generator list `[CZ, S₁, S₂, S₁·(X↦XZ)₂, (X↦XZ)₁·S₂]`,
/// leftmost applied first.
const COSET_SEQUENCES: [&[usize]; 20] = [
    &[1],
    &[0, 3, 0, 2, 0, 3, 0],
    &[1, 0, 3, 0],
    &[0, 4, 0],
    &[0, 4, 3, 0, 2, 1, 0, 4, 0],
    &[0, 4, 3, 4, 0],
    &[2, 0, 3, 0],
    &[0],
    &[1, 2, 0, 4, 3, 0],
    &[1, 0, 4, 3, 0],
    &[2, 0],
    &[1, 0, 3, 4, 0],
    &[2, 1, 0, 3, 0, 2, 0],
    &[0, 3, 0, 2, 1, 0],
    &[0, 3, 4, 0],
    &[1, 0, 4, 0],
    &[2, 0, 3, 0, 2, 0],
    &[1, 0],
    &[2, 1, 0],
    &[0, 4, 0, 1, 0],
];

fn matrix_from_bits(bits: u16) -> PrimeFieldMatrix {
    PrimeFieldMatrix::from_fn(4, 4, FieldOrder::TWO, |i, j| {
        ((bits >> (4 * i + j)) & 1) as u8
    })
}

fn matrix_to_bits(m: &PrimeFieldMatrix) -> u16 {
    let mut bits = 0u16;
    for i in 0..4 {
        for j in 0..4 {
            if m.get(i, j) != 0 {
                bits |= 1 << (4 * i + j);
            }
        }
    }
    bits
}

fn is_site_local(m: &PrimeFieldMatrix) -> bool {
    (0..4).all(|i| (0..4).all(|j| i / 2 == j / 2 || m.get(i, j) == 0))
}

/// A matrix from its columns (each the image of one basis vector, in the
/// interleaved order `a₁, b₁, a₂, b₂`).
fn matrix_from_columns(cols: [[u8; 4]; 4]) -> PrimeFieldMatrix {
    PrimeFieldMatrix::from_fn(4, 4, FieldOrder::TWO, |i, j| cols[j][i])
}

fn coset_generators() -> [PrimeFieldMatrix; 5] {
    // Images of X₁, Z₁, X₂, Z₂ under each generator.
    let cz = matrix_from_columns([[1, 0, 0, 1], [0, 1, 0, 0], [0, 1, 1, 0], [0, 0, 0, 1]]);
    let s1 = matrix_from_columns([[1, 0, 0, 0], [1, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]);
    let s2 = matrix_from_columns([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 1, 1]]);
    let s1_h2 = matrix_from_columns([[1, 0, 0, 0], [1, 1, 0, 0], [0, 0, 1, 1], [0, 0, 0, 1]]);
    let h1_s2 = matrix_from_columns([[1, 1, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 1, 1]]);
    [cz, s1, s2, s1_h2, h1_s2]
}

/// Verifies the two-site Clifford coset table at the symplectic quotient
/// (Cliffords modulo Paulis and phases): enumerates the full 4×4 binary
/// symplectic group and its site-local subgroup, composes each of the 20
/// table sequences, and checks that the results hit 20 pairwise distinct
/// right cosets — exactly the whole quotient.
pub fn verify_coset_table() -> Result<CosetCheckReport, EgsError> {
    let order = FieldOrder::TWO;
    let mut gram = PrimeFieldMatrix::zeros(4, 4, order);
    for site in 0..2 {
        gram.set(2 * site, 2 * site + 1, 1);
        gram.set(2 * site + 1, 2 * site, 1);
    }
    let mut group: Vec<PrimeFieldMatrix> = Vec::new();
    let mut locals: Vec<PrimeFieldMatrix> = Vec::new();
    for bits in 0u32..(1 << 16) {
        let m = matrix_from_bits(bits as u16);
        if m.transpose().mul(&gram).mul(&m) == gram {
            if is_site_local(&m) {
                locals.push(m.clone());
            }
            group.push(m);
        }
    }
    if group.len() != 720 {
        return Err(EgsError::CosetCheck(format!(
            "symplectic group has {} elements, expected 720",
            group.len()
        )));
    }
    if locals.len() != 36 {
        return Err(EgsError::CosetCheck(format!(
            "local subgroup has {} elements, expected 36",
            locals.len()
        )));
    }

    // Canonical key of the right coset Local·g: the minimal encoding of
    // its members.
    let coset_key = |g: &PrimeFieldMatrix| -> u16 {
        locals
            .iter()
            .map(|l| matrix_to_bits(&l.mul(g)))
            .min()
            .expect("local subgroup is nonempty")
    };
    let quotient_keys: HashSet<u16> = group.iter().map(&coset_key).collect();
    if quotient_keys.len() != 20 {
        return Err(EgsError::CosetCheck(format!(
            "quotient has {} cosets, expected 720 / 36 = 20",
            quotient_keys.len()
        )));
    }

    let generators = coset_generators();
    for (i, g) in generators.iter().enumerate() {
        if g.transpose().mul(&gram).mul(g) != gram {
            return Err(EgsError::CosetCheck(format!(
                "generator {i} is not symplectic"
            )));
        }
    }
    let identity_key = coset_key(&PrimeFieldMatrix::identity(4, order));
    let mut seen: HashMap<u16, usize> = HashMap::new();
    let mut local_sequences = Vec::new();
    for (index, sequence) in COSET_SEQUENCES.iter().enumerate() {
        let mut total = PrimeFieldMatrix::identity(4, order);
        for &g in sequence.iter() {
            total = generators[g].mul(&total);
        }
        let key = coset_key(&total);
        if let Some(&prev) = seen.get(&key) {
            return Err(EgsError::CosetCheck(format!(
                "sequences {prev} and {index} land in the same coset"
            )));
        }
        seen.insert(key, index);
        if key == identity_key {
            local_sequences.push(index);
        }
    }
    if !seen.keys().all(|k| quotient_keys.contains(k)) {
        return Err(EgsError::CosetCheck(
            "a sequence left the symplectic group".into(),
        ));
    }
    // 20 distinct cosets out of a 20-coset quotient: full coverage.
    Ok(CosetCheckReport {
        group_order: group.len(),
        subgroup_order: locals.len(),
        coset_count: quotient_keys.len(),
        sequences_verified: COSET_SEQUENCES.len(),
        local_sequences,
    })
}
