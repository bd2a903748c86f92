//! One function per subcommand, each returning the exit outcome and a
//! rendered report.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use plckit::commutation::{rank_inequality_check, synthesize_state};
use plckit::equivalence::{
    decompose, endomorphism_basis_of, fitting_split, ghz_extraction_count, subset_rank_profile,
    tripartite_canonical_counts, EquivalenceVerdict, SplitVerdict,
};
use plckit::field::{FieldOrder, PrimeFieldMatrix};
use plckit::stabilizer::GraphAdjacency;
use plckit::symplectic::PartyPartition;
use plckit::CommutationTuple;
use plckit::{egs, equivalence};

use crate::inputs::{
    load_state_or_graph, load_tuple, order_or_default, parse_partition, parse_sizes,
};
use crate::render::{rendered, Rendered};
use crate::reports::{
    graph_edges, matrix_rows, ConfigEcho, CosetReport, DecomposeReport, EgsClassOut, EgsReportOut,
    EquivInvariants, EquivReport, InfoReport, PropertiesReport, PropertyFailure, SpiralReport,
    SpiralRow, SynthReport, TripartiteReport,
};
use crate::{
    DecomposeArgs, EgsArgs, EquivArgs, InfoArgs, InputError, Outcome, SynthArgs, VerifyArgs,
    VerifySuite,
};

type CommandResult = Result<(Outcome, Rendered), InputError>;

/// A verification that itself failed, as a report rather than an error.
#[derive(Serialize, Debug)]
struct FailureReport {
    passed: bool,
    error: String,
}

fn input_err(e: impl std::fmt::Display) -> InputError {
    InputError(e.to_string())
}

fn verdict_name(v: &SplitVerdict) -> String {
    match v {
        SplitVerdict::Indecomposable => "indecomposable".into(),
        SplitVerdict::Split { sizes, .. } => format!("split({},{})", sizes.0, sizes.1),
        SplitVerdict::Inconclusive => "inconclusive".into(),
    }
}

pub fn info(args: &InfoArgs) -> CommandResult {
    let state = load_state_or_graph(
        args.state.as_deref(),
        args.graph.as_deref(),
        args.common.d,
        "info",
    )?;
    let partition = parse_partition(&args.partition, state.num_sites())?;
    let report = state.validate();
    if !report.is_valid() {
        let out = FailureReport {
            passed: false,
            error: format!("not a stabilizer state: {}", report.violations.join("; ")),
        };
        return Ok((Outcome::Negative, rendered(&out)?));
    }
    let tuple = CommutationTuple::from_state(&state, &partition).map_err(input_err)?;
    let m = partition.party_count();
    let out = InfoReport {
        n: state.num_sites(),
        d: u64::from(state.order().order()),
        partition: partition.to_compact_string(),
        valid: true,
        violations: Vec::new(),
        local_ranks: tuple.local_ranks(),
        local_subspace_dims: (0..m)
            .map(|p| state.local_subspace_dim(&partition, p))
            .collect(),
        ghz_extraction_delta: ghz_extraction_count(&state, &partition),
        rank_condition: tuple.rank_condition(),
        zero_sum: tuple.is_zero_sum(),
        concatenated_rank: tuple.concatenated_rank(),
        tuple: tuple.to_dto(),
    };
    Ok((Outcome::Success, rendered(&out)?))
}

pub fn equiv(args: &EquivArgs) -> CommandResult {
    let state_a = load_state_or_graph(
        args.state_a.as_deref(),
        args.graph_a.as_deref(),
        args.common.d,
        "first state",
    )?;
    let state_b = load_state_or_graph(
        args.state_b.as_deref(),
        args.graph_b.as_deref(),
        args.common.d,
        "second state",
    )?;
    if state_a.num_sites() != state_b.num_sites() {
        return Err(InputError(format!(
            "states have {} and {} sites",
            state_a.num_sites(),
            state_b.num_sites()
        )));
    }
    let partition = parse_partition(&args.partition, state_a.num_sites())?;
    let limits = args.common.limits();
    let tuple_a = CommutationTuple::from_state(&state_a, &partition).map_err(input_err)?;
    let tuple_b = CommutationTuple::from_state(&state_b, &partition).map_err(input_err)?;
    let verdict =
        equivalence::congruence_equivalent(&tuple_a, &tuple_b, &limits).map_err(input_err)?;
    let invariants = EquivInvariants {
        subset_rank_profile_a: subset_rank_profile(tuple_a.matrices()),
        subset_rank_profile_b: subset_rank_profile(tuple_b.matrices()),
        ring_dimension_a: endomorphism_basis_of(tuple_a.matrices()).len(),
        ring_dimension_b: endomorphism_basis_of(tuple_b.matrices()).len(),
    };
    let config = ConfigEcho::new(&args.common, u64::from(state_a.order().order()));
    let (outcome, name, witness) = match verdict {
        EquivalenceVerdict::Equivalent(q) => (Outcome::Success, "equivalent", Some(matrix_rows(&q))),
        EquivalenceVerdict::Inequivalent => (Outcome::Negative, "inequivalent", None),
        EquivalenceVerdict::Inconclusive => (Outcome::Partial, "inconclusive", None),
    };
    let out = EquivReport {
        verdict: name,
        witness,
        invariants,
        config,
    };
    Ok((outcome, rendered(&out)?))
}

pub fn decompose_cmd(args: &DecomposeArgs) -> CommandResult {
    let limits = args.common.limits();
    let (tuple, tripartite) = match (&args.tuple, &args.state, &args.graph) {
        (Some(path), None, None) => (load_tuple(path, args.common.d)?, None),
        (None, state, graph) => {
            let state = load_state_or_graph(
                state.as_deref(),
                graph.as_deref(),
                args.common.d,
                "decompose",
            )?;
            let spec = args.partition.as_deref().ok_or_else(|| {
                InputError("state input needs --partition".into())
            })?;
            let partition = parse_partition(spec, state.num_sites())?;
            let tuple = CommutationTuple::from_state(&state, &partition).map_err(input_err)?;
            let tripartite = if partition.party_count() == 3 {
                let counts =
                    tripartite_canonical_counts(&state, &partition, &limits).map_err(input_err)?;
                Some(TripartiteReport {
                    zeros_per_party: counts.zeros_per_party,
                    bell_per_pair: counts.bell_per_pair,
                    ghz: counts.ghz,
                })
            } else {
                None
            };
            (tuple, tripartite)
        }
        _ => {
            return Err(InputError(
                "provide exactly one of --tuple, --state, or --graph".into(),
            ))
        }
    };
    let report = decompose(&tuple, &limits).map_err(input_err)?;
    let out = DecomposeReport {
        n: tuple.num_generators(),
        d: u64::from(tuple.order().order()),
        parties: tuple.party_count(),
        conclusive: report.conclusive,
        block_sizes: report.block_sizes(),
        witness: matrix_rows(&report.witness),
        blocks: report.blocks.iter().map(CommutationTuple::to_dto).collect(),
        tripartite,
        config: ConfigEcho::new(&args.common, u64::from(tuple.order().order())),
    };
    let outcome = if report.conclusive {
        Outcome::Success
    } else {
        Outcome::Partial
    };
    Ok((outcome, rendered(&out)?))
}

pub fn synth(args: &SynthArgs) -> CommandResult {
    let tuple = load_tuple(&args.tuple, args.common.d)?;
    let result = synthesize_state(&tuple).map_err(input_err)?;
    let round_trip = CommutationTuple::from_state(&result.tableau, &result.partition)
        .map(|t| t.to_dto() == tuple.to_dto())
        .unwrap_or(false);
    if !round_trip {
        return Err(InputError(
            "internal: synthesized state does not reproduce the tuple".into(),
        ));
    }
    let dto = result.tableau.to_dto();
    let out = SynthReport {
        n: dto.n,
        d: dto.d,
        partition: result.partition.to_compact_string(),
        generators: dto.generators,
        phases: dto.phases,
        round_trip_exact: true,
    };
    Ok((Outcome::Success, rendered(&out)?))
}

pub fn egs_cmd(args: &EgsArgs) -> CommandResult {
    let sizes = parse_sizes(&args.sizes)?;
    let config = egs::PartyConfiguration::new(sizes.clone()).map_err(input_err)?;
    let order = order_or_default(args.common.d)?;
    let limits = args.common.limits();
    let report = match &args.database {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| InputError(format!("cannot read {}: {e}", path.display())))?;
            egs::egs_search_from_orbit_database(
                &text,
                &config,
                order,
                &limits,
                args.common.budget_graphs,
            )
            .map_err(input_err)?
        }
        None => {
            egs::egs_search(&config, order, &limits, args.common.budget_graphs).map_err(input_err)?
        }
    };
    let out = EgsReportOut {
        sizes,
        n: config.num_sites(),
        d: u64::from(order.order()),
        graphs_total: report.graphs_total,
        graphs_processed: report.graphs_processed,
        class_count: report.class_count,
        class_count_up_to_party_relabeling: report.class_count_up_to_party_relabeling,
        complete: report.complete,
        representatives: report
            .representatives
            .iter()
            .map(|class| EgsClassOut {
                edges: graph_edges(&class.graph),
            })
            .collect(),
        quarantined: report.quarantined.iter().map(graph_edges).collect(),
        config: ConfigEcho::new(&args.common, u64::from(order.order())),
    };
    let outcome = if report.complete {
        Outcome::Success
    } else {
        Outcome::Partial
    };
    Ok((outcome, rendered(&out)?))
}

pub fn verify(args: &VerifyArgs) -> CommandResult {
    match &args.suite {
        VerifySuite::Spiral { min, max, common } => verify_spiral(*min, *max, common),
        VerifySuite::Cosets { common } => verify_cosets(common),
        VerifySuite::Properties { trials, common } => verify_properties(*trials, common),
    }
}

fn verify_spiral(min: usize, max: usize, common: &crate::CommonOpts) -> CommandResult {
    if min < 4 || min > max {
        return Err(InputError(format!(
            "spiral range needs 4 ≤ min ≤ max, got {min}…{max}"
        )));
    }
    let order = order_or_default(common.d)?;
    let limits = common.limits();
    let lengths: Vec<usize> = (min..=max).collect();
    let verdicts = egs::verify_spiral_family(&lengths, order, &limits).map_err(input_err)?;
    let rows: Vec<SpiralRow> = verdicts
        .iter()
        .map(|v| SpiralRow {
            n: v.n,
            whole: verdict_name(&v.whole),
            merged_pair: verdict_name(&v.merged_pair),
        })
        .collect();
    let all_indec = verdicts
        .iter()
        .all(|v| v.whole == SplitVerdict::Indecomposable);
    let any_split = verdicts
        .iter()
        .any(|v| matches!(v.whole, SplitVerdict::Split { .. }));
    let out = SpiralReport {
        d: u64::from(order.order()),
        verdicts: rows,
        all_indecomposable: all_indec,
        config: ConfigEcho::new(common, u64::from(order.order())),
    };
    let outcome = if all_indec {
        Outcome::Success
    } else if any_split {
        Outcome::Negative
    } else {
        Outcome::Partial
    };
    Ok((outcome, rendered(&out)?))
}

fn verify_cosets(common: &crate::CommonOpts) -> CommandResult {
    match egs::verify_coset_table() {
        Ok(report) => {
            let out = CosetReport {
                group_order: report.group_order,
                subgroup_order: report.subgroup_order,
                coset_count: report.coset_count,
                sequences_verified: report.sequences_verified,
                local_sequences: report.local_sequences,
                passed: true,
            };
            let _ = common;
            Ok((Outcome::Success, rendered(&out)?))
        }
        Err(err) => {
            let out = FailureReport {
                passed: false,
                error: err.to_string(),
            };
            Ok((Outcome::Negative, rendered(&out)?))
        }
    }
}

/// One sampled scenario of the properties battery: a random weighted
/// graph, a random partition, and a random zero-sum alternating family.
struct PropertySample {
    graph: GraphAdjacency,
    partition: PartyPartition,
    family: Vec<PrimeFieldMatrix>,
}

impl PropertySample {
    fn draw(order: FieldOrder, rng: &mut ChaCha8Rng) -> Self {
        use rand::Rng;
        let n = rng.gen_range(2..=7);
        let parties = rng.gen_range(2..=n.min(4));
        let graph = GraphAdjacency::random(n, order, rng);
        let partition = PartyPartition::random(n, parties, rng)
            .expect("parties ≤ sites by construction");
        let k = rng.gen_range(1..=6);
        let count = rng.gen_range(2..=4);
        let mut family: Vec<PrimeFieldMatrix> = (1..count)
            .map(|_| PrimeFieldMatrix::random_alternating(k, order, rng))
            .collect();
        let sum = family
            .iter()
            .fold(PrimeFieldMatrix::zeros(k, k, order), |acc, m| acc.add(m));
        family.push(sum.neg());
        PropertySample {
            graph,
            partition,
            family,
        }
    }

    /// Runs every check; returns the name of the first failing one.
    fn first_failure(&self, limits: &plckit::equivalence::SearchLimits) -> Option<String> {
        let from_graph = match CommutationTuple::from_graph(&self.graph, &self.partition) {
            Ok(t) => t,
            Err(e) => return Some(format!("tuple from graph: {e}")),
        };
        let state = self.graph.graph_state();
        if !state.validate().is_valid() {
            return Some("graph state fails tableau validation".into());
        }
        let from_state = match CommutationTuple::from_state(&state, &self.partition) {
            Ok(t) => t,
            Err(e) => return Some(format!("tuple from state: {e}")),
        };
        if from_graph.to_dto() != from_state.to_dto() {
            return Some("graph-rule and state-built tuples differ".into());
        }
        if !from_graph.is_zero_sum() {
            return Some("tuple is not zero-sum".into());
        }
        if !from_graph.rank_condition() {
            return Some("rank condition fails on a stabilizer state".into());
        }
        if !from_graph.validate().is_valid() {
            return Some("tuple fails validation".into());
        }
        match rank_inequality_check(&self.family) {
            Ok(true) => {}
            Ok(false) => return Some("rank inequality fails on a zero-sum family".into()),
            Err(e) => return Some(format!("rank inequality check: {e}")),
        }
        match synthesize_state(&from_graph) {
            Ok(result) => {
                let back = CommutationTuple::from_state(&result.tableau, &result.partition);
                match back {
                    Ok(t) if t.to_dto() == from_graph.to_dto() => {}
                    Ok(_) => return Some("synthesis round trip altered the tuple".into()),
                    Err(e) => return Some(format!("synthesized state rejected: {e}")),
                }
            }
            Err(e) => return Some(format!("synthesis failed: {e}")),
        }
        match fitting_split(&from_graph, limits) {
            Ok(SplitVerdict::Split { witness, .. }) => {
                let rotated = from_graph.change_basis(&witness);
                if rotated.is_err() {
                    return Some("split witness is not invertible".into());
                }
            }
            Ok(_) => {}
            Err(e) => return Some(format!("splitting filter: {e}")),
        }
        None
    }
}

fn verify_properties(trials: u64, common: &crate::CommonOpts) -> CommandResult {
    let order = order_or_default(common.d)?;
    let limits = common.limits();
    let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
    let mut failures = 0u64;
    let mut first_failure = None;
    for trial in 0..trials {
        let sample = PropertySample::draw(order, &mut rng);
        if let Some(check) = sample.first_failure(&limits) {
            failures += 1;
            if first_failure.is_none() {
                first_failure = Some(PropertyFailure {
                    trial,
                    check,
                    graph_edges: graph_edges(&sample.graph),
                    partition: sample.partition.to_compact_string(),
                });
            }
        }
    }
    let out = PropertiesReport {
        trials,
        failures,
        passed: failures == 0,
        first_failure,
        config: ConfigEcho::new(common, u64::from(order.order())),
    };
    let outcome = if failures == 0 {
        Outcome::Success
    } else {
        Outcome::Negative
    };
    Ok((outcome, rendered(&out)?))
}
