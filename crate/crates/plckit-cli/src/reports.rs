//! Serializable report shapes. Field order is the serialization order,
//! so identical runs print byte-identical JSON.

use serde::Serialize;

use plckit::commutation::TupleDto;
use plckit::field::PrimeFieldMatrix;
use plckit::stabilizer::GraphAdjacency;

use crate::CommonOpts;

/// Echo of the knobs a run depended on, embedded for auditability.
#[derive(Serialize, Debug, Clone)]
pub struct ConfigEcho {
    pub d: u64,
    pub seed: u64,
    pub budget_ring: u128,
    pub budget_congruence: u128,
    pub budget_graphs: u128,
    pub samples: u64,
}

impl ConfigEcho {
    pub fn new(common: &CommonOpts, d: u64) -> Self {
        ConfigEcho {
            d,
            seed: common.seed,
            budget_ring: common.budget_ring,
            budget_congruence: common.budget_congruence,
            budget_graphs: common.budget_graphs,
            samples: common.samples,
        }
    }
}

/// 1-indexed weighted edge list of a graph, the external graph shape.
pub fn graph_edges(graph: &GraphAdjacency) -> Vec<[usize; 3]> {
    graph
        .edges()
        .into_iter()
        .map(|(i, j, m)| [i + 1, j + 1, usize::from(m)])
        .collect()
}

/// Row-major entries of a matrix, the external matrix shape.
pub fn matrix_rows(m: &PrimeFieldMatrix) -> Vec<Vec<u8>> {
    m.to_rows()
}

#[derive(Serialize, Debug)]
pub struct InfoReport {
    pub n: usize,
    pub d: u64,
    pub partition: String,
    pub valid: bool,
    pub violations: Vec<String>,
    /// Rank of each party's commutation matrix.
    pub local_ranks: Vec<usize>,
    /// Dimension of each party's locally-supported generator subspace.
    pub local_subspace_dims: Vec<usize>,
    /// Maximal number of collective GHZ states extractable at once.
    pub ghz_extraction_delta: usize,
    pub rank_condition: bool,
    pub zero_sum: bool,
    pub concatenated_rank: usize,
    pub tuple: TupleDto,
}

#[derive(Serialize, Debug)]
pub struct EquivReport {
    pub verdict: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<Vec<u8>>>,
    pub invariants: EquivInvariants,
    pub config: ConfigEcho,
}

#[derive(Serialize, Debug)]
pub struct EquivInvariants {
    /// Ranks of concatenations over every nonempty party subset, A side.
    pub subset_rank_profile_a: Vec<usize>,
    /// Ranks of concatenations over every nonempty party subset, B side.
    pub subset_rank_profile_b: Vec<usize>,
    /// Dimension of the self-adjoint endomorphism space, A side.
    pub ring_dimension_a: usize,
    /// Dimension of the self-adjoint endomorphism space, B side.
    pub ring_dimension_b: usize,
}

#[derive(Serialize, Debug)]
pub struct DecomposeReport {
    pub n: usize,
    pub d: u64,
    pub parties: usize,
    pub conclusive: bool,
    pub block_sizes: Vec<usize>,
    pub witness: Vec<Vec<u8>>,
    pub blocks: Vec<TupleDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tripartite: Option<TripartiteReport>,
    pub config: ConfigEcho,
}

/// Canonical-factor counts for three parties.
#[derive(Serialize, Debug)]
pub struct TripartiteReport {
    pub zeros_per_party: [usize; 3],
    /// Bell pairs between parties (1,2), (1,3), (2,3).
    pub bell_per_pair: [usize; 3],
    pub ghz: usize,
}

/// Synthesis output: a loadable tableau plus the partition it realizes.
/// The extra fields are ignored when the file is read back as a state.
#[derive(Serialize, Debug)]
pub struct SynthReport {
    pub n: usize,
    pub d: u64,
    pub partition: String,
    pub generators: Vec<Vec<u8>>,
    pub phases: Vec<u8>,
    pub round_trip_exact: bool,
}

#[derive(Serialize, Debug)]
pub struct EgsReportOut {
    pub sizes: Vec<usize>,
    pub n: usize,
    pub d: u64,
    pub graphs_total: u128,
    pub graphs_processed: u128,
    pub class_count: usize,
    pub class_count_up_to_party_relabeling: usize,
    pub complete: bool,
    pub representatives: Vec<EgsClassOut>,
    pub quarantined: Vec<Vec<[usize; 3]>>,
    pub config: ConfigEcho,
}

#[derive(Serialize, Debug)]
pub struct EgsClassOut {
    pub edges: Vec<[usize; 3]>,
}

#[derive(Serialize, Debug)]
pub struct SpiralReport {
    pub d: u64,
    pub verdicts: Vec<SpiralRow>,
    pub all_indecomposable: bool,
    pub config: ConfigEcho,
}

#[derive(Serialize, Debug)]
pub struct SpiralRow {
    pub n: usize,
    pub whole: String,
    pub merged_pair: String,
}

#[derive(Serialize, Debug)]
pub struct CosetReport {
    pub group_order: usize,
    pub subgroup_order: usize,
    pub coset_count: usize,
    pub sequences_verified: usize,
    pub local_sequences: Vec<usize>,
    pub passed: bool,
}

#[derive(Serialize, Debug)]
pub struct PropertiesReport {
    pub trials: u64,
    pub failures: u64,
    pub passed: bool,
    /// The first failing sample, when any check failed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<PropertyFailure>,
    pub config: ConfigEcho,
}

#[derive(Serialize, Debug)]
pub struct PropertyFailure {
    pub trial: u64,
    pub check: String,
    pub graph_edges: Vec<[usize; 3]>,
    pub partition: String,
}
