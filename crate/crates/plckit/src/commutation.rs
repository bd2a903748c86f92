//! Commutation tuples: one alternating matrix per party recording, for every
//! pair of stabilizer generators, the symplectic form of their restrictions
//! to that party.
//!
//! The tuple `(C_α)_α` of a state is the complete party-local invariant this
//! crate is built around: basis changes of the generator set act by
//! simultaneous congruence `C_α ↦ Q·C_α·Qᵀ`, parties can be merged by adding
//! their matrices, and a tuple arises from a stabilizer *state* (rather than
//! a code) exactly when twice the rank of the concatenation `[C_α]_α` equals
//! the sum of the individual ranks. This module computes tuples from states
//! and graphs, decides that rank condition, puts single alternating matrices
//! into hyperbolic normal form, and synthesizes a state realizing any tuple
//! that passes the test.

use crate::field::{FieldError, FieldOrder, PrimeFieldMatrix};
use crate::stabilizer::{GraphAdjacency, StabilizerTableau};
use crate::symplectic::{omega, PartitionError, PartyPartition, SymplecticVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors from tuple construction and the operations on tuples.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum CommutationError {
    /// Matrices missing, non-square, or of mismatched sizes/orders.
    #[error("malformed tuple: {0}")]
    Shape(String),
    /// A matrix with nonzero diagonal or broken antisymmetry.
    #[error("matrix {index} is not alternating")]
    NotAlternating {
        /// Position of the offending matrix.
        index: usize,
    },
    /// The matrices do not sum to zero, violating a precondition.
    #[error("matrices do not sum to zero")]
    ZeroSumViolated,
    /// A tableau that fails its own invariants cannot yield a tuple.
    #[error("invalid stabilizer tableau: {0}")]
    InvalidState(String),
    /// Partition and tableau/graph disagree on the site count.
    #[error("partition covers {partition_sites} sites but the state has {state_sites}")]
    PartitionMismatch {
        /// Sites in the partition.
        partition_sites: usize,
        /// Sites in the state or graph.
        state_sites: usize,
    },
    /// A basis change needs an invertible matrix.
    #[error("basis-change matrix is singular")]
    SingularTransform,
    /// Merging a party with itself.
    #[error("cannot merge party {0} with itself")]
    SamePartyTwice(usize),
    /// A party index at or past the party count.
    #[error("party index {0} out of range")]
    PartyOutOfRange(usize),
    /// The tuple belongs to a stabilizer code, not a state.
    #[error("not a stabilizer tuple (stabilizer-code case, unsupported)")]
    NotStabilizerTuple,
    /// A violated internal postcondition (a bug, not bad input).
    #[error("internal error: {0}")]
    Internal(String),
    /// Underlying partition error.
    #[error(transparent)]
    Partition(#[from] PartitionError),
    /// Underlying field error.
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// One alternating `n × n` matrix per party over `Z_d`; the per-party
/// commutation data of `n` generators.
#[derive(Clone, Debug)]
pub struct CommutationTuple {
    order: FieldOrder,
    matrices: Vec<PrimeFieldMatrix>,
    partition: Option<PartyPartition>,
}

/// Outcome of checking the tuple invariants and the state-realizability
/// rank condition; an empty violation list means the tuple comes from a
/// stabilizer state.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TupleReport {
    /// Human-readable description of each violation.
    pub violations: Vec<String>,
    /// Twice the rank of the concatenation `[C_α]_α`.
    pub twice_joint_rank: usize,
    /// `Σ_α rank(C_α)`.
    pub rank_sum: usize,
}

impl TupleReport {
    /// True when no invariant (including the rank condition) is violated.
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// A state realizing a commutation tuple, with the partition that
/// reproduces the tuple (parties may end up with zero sites).
#[derive(Clone, Debug)]
pub struct SynthesisResult {
    /// The synthesized stabilizer tableau.
    pub tableau: StabilizerTableau,
    /// Site assignment: party `α` holds `rank(C_α)/2` entangled sites;
    /// all unentangled `|0⟩` sites go to party 1.
    pub partition: PartyPartition,
}

/// Hyperbolic normal form of one alternating matrix: an invertible `P`
/// with `P·C·Pᵀ` a direct sum of `[[0, 1], [−1, 0]]` blocks followed by
/// zeros.
#[derive(Clone, Debug)]
pub struct DicksonForm {
    /// The congruence transform `P`.
    pub transform: PrimeFieldMatrix,
    /// The normal form `P·C·Pᵀ`.
    pub normal: PrimeFieldMatrix,
    /// Index pairs `(2t, 2t+1)` of the hyperbolic blocks.
    pub pairs: Vec<(usize, usize)>,
    /// Indices carrying no block (the radical).
    pub zero_indices: Vec<usize>,
}

/// Serialization shape for tuples: `{n, d, parties, matrices}`.
#[derive(Serialize, Deserialize, Debug, Clone, PartialEq, Eq)]
pub struct TupleDto {
    /// Generator count (matrix dimension).
    pub n: usize,
    /// Field order.
    pub d: u64,
    /// Party count.
    pub parties: usize,
    /// One `n × n` row-major matrix per party.
    pub matrices: Vec<Vec<Vec<u8>>>,
}

impl CommutationTuple {
    /// Wraps per-party matrices, validating shape and alternation. The
    /// zero-sum invariant is *reported* by [`CommutationTuple::validate`]
    /// rather than enforced here, so that defective families can still be
    /// examined.
    pub fn new(matrices: Vec<PrimeFieldMatrix>) -> Result<Self, CommutationError> {
        if matrices.is_empty() {
            return Err(CommutationError::Shape("no matrices".into()));
        }
        let n = matrices[0].rows();
        let order = matrices[0].order();
        for (idx, m) in matrices.iter().enumerate() {
            if m.rows() != n || m.cols() != n {
                return Err(CommutationError::Shape(format!(
                    "matrix {idx} is {}×{}, expected {n}×{n}",
                    m.rows(),
                    m.cols()
                )));
            }
            if m.order() != order {
                return Err(CommutationError::Shape(format!(
                    "matrix {idx} is over Z_{}, expected Z_{}",
                    m.order().order(),
                    order.order()
                )));
            }
            if !m.is_alternating() {
                return Err(CommutationError::NotAlternating { index: idx });
            }
        }
        Ok(CommutationTuple {
            order,
            matrices,
            partition: None,
        })
    }

    /// Like [`CommutationTuple::new`], attaching the partition the matrices
    /// came from.
    pub fn with_partition(
        matrices: Vec<PrimeFieldMatrix>,
        partition: PartyPartition,
    ) -> Result<Self, CommutationError> {
        if partition.party_count() != matrices.len() {
            return Err(CommutationError::Shape(format!(
                "{} matrices for {} parties",
                matrices.len(),
                partition.party_count()
            )));
        }
        let mut tuple = Self::new(matrices)?;
        tuple.partition = Some(partition);
        Ok(tuple)
    }

    /// The tuple of a stabilizer state: entry `(i, j)` of `C_α` is
    /// `ω(g_i|_α, g_j|_α)`.
    pub fn from_state(
        tableau: &StabilizerTableau,
        partition: &PartyPartition,
    ) -> Result<Self, CommutationError> {
        let report = tableau.validate();
        if !report.is_valid() {
            return Err(CommutationError::InvalidState(
                report.violations.join("; "),
            ));
        }
        if partition.num_sites() != tableau.num_sites() {
            return Err(CommutationError::PartitionMismatch {
                partition_sites: partition.num_sites(),
                state_sites: tableau.num_sites(),
            });
        }
        let n = tableau.num_sites();
        let order = tableau.order();
        let generators: Vec<SymplecticVector> =
            (0..n).map(|i| tableau.generator(i)).collect();
        let matrices = (0..partition.party_count())
            .map(|p| {
                let restricted: Vec<SymplecticVector> = generators
                    .iter()
                    .map(|g| g.restrict(partition.party(p)))
                    .collect();
                PrimeFieldMatrix::from_fn(n, n, order, |i, j| {
                    omega(&restricted[i], &restricted[j])
                })
            })
            .collect();
        Self::with_partition(matrices, partition.clone())
    }

    /// The tuple of a graph state, computed directly from the adjacency:
    /// `C_α = Γ·E_α − E_α·Γ` with `E_α` the coordinate projector onto the
    /// party's sites. Equals [`CommutationTuple::from_state`] of the graph
    /// state.
    pub fn from_graph(
        graph: &GraphAdjacency,
        partition: &PartyPartition,
    ) -> Result<Self, CommutationError> {
        if partition.num_sites() != graph.num_sites() {
            return Err(CommutationError::PartitionMismatch {
                partition_sites: partition.num_sites(),
                state_sites: graph.num_sites(),
            });
        }
        let n = graph.num_sites();
        let order = graph.order();
        let gamma = graph.matrix();
        let matrices = (0..partition.party_count())
            .map(|p| {
                let sites = partition.party(p);
                PrimeFieldMatrix::from_fn(n, n, order, |i, j| {
                    let in_i = sites.binary_search(&i).is_ok();
                    let in_j = sites.binary_search(&j).is_ok();
                    let forward = if in_j { gamma.get(i, j) } else { 0 };
                    let backward = if in_i { gamma.get(i, j) } else { 0 };
                    order.sub(forward, backward)
                })
            })
            .collect();
        Self::with_partition(matrices, partition.clone())
    }

    /// Generator count `n` (the matrix dimension).
    pub fn num_generators(&self) -> usize {
        self.matrices[0].rows()
    }

    /// The field of the entries.
    pub fn order(&self) -> FieldOrder {
        self.order
    }

    /// Party count `M`.
    pub fn party_count(&self) -> usize {
        self.matrices.len()
    }

    /// The matrix of party `p`.
    pub fn matrix(&self, p: usize) -> &PrimeFieldMatrix {
        &self.matrices[p]
    }

    /// All per-party matrices in party order.
    pub fn matrices(&self) -> &[PrimeFieldMatrix] {
        &self.matrices
    }

    /// The partition the tuple was derived from, when known.
    pub fn partition(&self) -> Option<&PartyPartition> {
        self.partition.as_ref()
    }

    /// True when the matrices sum to zero, as every state tuple must.
    pub fn is_zero_sum(&self) -> bool {
        zero_sum(&self.matrices)
    }

    /// The rank of the side-by-side concatenation `[C_α]_α`.
    pub fn concatenated_rank(&self) -> usize {
        let refs: Vec<&PrimeFieldMatrix> = self.matrices.iter().collect();
        PrimeFieldMatrix::concat_cols(&refs).rank()
    }

    /// Per-party ranks `rank(C_α)`.
    pub fn local_ranks(&self) -> Vec<usize> {
        self.matrices.iter().map(PrimeFieldMatrix::rank).collect()
    }

    /// Applies the generator basis change `C_α ↦ q·C_α·qᵀ` to every party.
    pub fn change_basis(&self, q: &PrimeFieldMatrix) -> Result<Self, CommutationError> {
        let n = self.num_generators();
        if q.rows() != n || q.cols() != n || q.order() != self.order {
            return Err(CommutationError::Shape(format!(
                "basis change must be {n}×{n} over Z_{}",
                self.order.order()
            )));
        }
        if !q.is_invertible() {
            return Err(CommutationError::SingularTransform);
        }
        let qt = q.transpose();
        let matrices = self
            .matrices
            .iter()
            .map(|c| q.mul(c).mul(&qt))
            .collect();
        Ok(CommutationTuple {
            order: self.order,
            matrices,
            partition: self.partition.clone(),
        })
    }

    /// Merges two distinct parties: their matrices are replaced by the
    /// entrywise sum, placed at the smaller index.
    pub fn merge_parties(&self, i: usize, j: usize) -> Result<Self, CommutationError> {
        let m = self.party_count();
        if i >= m {
            return Err(CommutationError::PartyOutOfRange(i));
        }
        if j >= m {
            return Err(CommutationError::PartyOutOfRange(j));
        }
        if i == j {
            return Err(CommutationError::SamePartyTwice(i));
        }
        let (lo, hi) = (i.min(j), i.max(j));
        let mut matrices = self.matrices.clone();
        matrices[lo] = matrices[lo].add(&matrices[hi]);
        matrices.remove(hi);
        let partition = match &self.partition {
            None => None,
            Some(p) => {
                let mut parties: Vec<Vec<usize>> = (0..p.party_count())
                    .map(|q| p.party(q).to_vec())
                    .collect();
                let moved = parties.remove(hi);
                parties[lo].extend(moved);
                Some(PartyPartition::with_possibly_empty_parties(
                    p.num_sites(),
                    parties,
                )?)
            }
        };
        Ok(CommutationTuple {
            order: self.order,
            matrices,
            partition,
        })
    }

    /// Decides whether the tuple comes from a stabilizer *state*: the
    /// matrices must sum to zero and satisfy
    /// `2·rank([C_α]_α) = Σ_α rank(C_α)`. A tuple failing either test is
    /// realizable only as a stabilizer code, not a state.
    pub fn rank_condition(&self) -> bool {
        self.is_zero_sum()
            && 2 * self.concatenated_rank() == self.local_ranks().iter().sum::<usize>()
    }

    /// Reports every violated invariant (alternation is enforced at
    /// construction; zero-sum and the rank condition are checked here)
    /// together with the two sides of the rank identity.
    pub fn validate(&self) -> TupleReport {
        let mut violations = Vec::new();
        for (idx, m) in self.matrices.iter().enumerate() {
            if !m.is_alternating() {
                violations.push(format!("matrix {idx} is not alternating"));
            }
        }
        let zero_sum = self.is_zero_sum();
        if !zero_sum {
            violations.push("matrices do not sum to zero".into());
        }
        let twice_joint_rank = 2 * self.concatenated_rank();
        let rank_sum = self.local_ranks().iter().sum();
        if zero_sum && twice_joint_rank != rank_sum {
            violations.push(format!(
                "rank condition fails: 2·rank of concatenation = {twice_joint_rank} \
                 but ranks sum to {rank_sum}"
            ));
        }
        TupleReport {
            violations,
            twice_joint_rank,
            rank_sum,
        }
    }

    /// Converts to the serialization shape.
    pub fn to_dto(&self) -> TupleDto {
        TupleDto {
            n: self.num_generators(),
            d: self.order.order(),
            parties: self.party_count(),
            matrices: self
                .matrices
                .iter()
                .map(|m| m.to_rows())
                .collect(),
        }
    }

    /// Rebuilds from the serialization shape, checking the declared sizes.
    pub fn from_dto(dto: &TupleDto) -> Result<Self, CommutationError> {
        let order = FieldOrder::new(dto.d)?;
        if dto.matrices.len() != dto.parties {
            return Err(CommutationError::Shape(format!(
                "declared {} parties but {} matrices",
                dto.parties,
                dto.matrices.len()
            )));
        }
        let matrices: Result<Vec<_>, _> = dto
            .matrices
            .iter()
            .map(|rows| {
                let rows: Vec<Vec<i64>> = rows
                    .iter()
                    .map(|r| r.iter().map(|&v| i64::from(v)).collect())
                    .collect();
                PrimeFieldMatrix::from_rows(order, &rows)
            })
            .collect();
        let tuple = Self::new(matrices?)?;
        if tuple.num_generators() != dto.n {
            return Err(CommutationError::Shape(format!(
                "declared n = {} but matrices are {got}×{got}",
                dto.n,
                got = tuple.num_generators()
            )));
        }
        Ok(tuple)
    }

    /// Serializes to the JSON form `{n, d, parties, matrices}`.
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_dto()).expect("tuple serialization")
    }

    /// Parses the JSON form.
    pub fn from_json_str(text: &str) -> Result<Self, CommutationError> {
        let dto: TupleDto = serde_json::from_str(text)
            .map_err(|e| CommutationError::Shape(format!("bad tuple JSON: {e}")))?;
        Self::from_dto(&dto)
    }
}

fn zero_sum(matrices: &[PrimeFieldMatrix]) -> bool {
    let mut sum = matrices[0].clone();
    for m in &matrices[1..] {
        sum = sum.add(m);
    }
    sum.is_zero()
}

/// Verifies the concatenation-rank inequality
/// `2·rank([A_α]_α) ≤ Σ_α rank(A_α)` for a family of alternating matrices
/// summing to zero. The inequality is a theorem for such families, so this
/// exists as a test oracle; violated preconditions are errors.
pub fn rank_inequality_check(
    matrices: &[PrimeFieldMatrix],
) -> Result<bool, CommutationError> {
    if matrices.is_empty() {
        return Err(CommutationError::Shape("no matrices".into()));
    }
    let n = matrices[0].rows();
    for (idx, m) in matrices.iter().enumerate() {
        if m.rows() != n || m.cols() != n || m.order() != matrices[0].order() {
            return Err(CommutationError::Shape(format!(
                "matrix {idx} has mismatched shape or field"
            )));
        }
        if !m.is_alternating() {
            return Err(CommutationError::NotAlternating { index: idx });
        }
    }
    if !zero_sum(matrices) {
        return Err(CommutationError::ZeroSumViolated);
    }
    let refs: Vec<&PrimeFieldMatrix> = matrices.iter().collect();
    let joint = PrimeFieldMatrix::concat_cols(&refs).rank();
    let sum: usize = matrices.iter().map(PrimeFieldMatrix::rank).sum();
    Ok(2 * joint <= sum)
}

/// Dense scratch copies used by the congruence eliminations below.
struct DenseCongruence {
    d: FieldOrder,
    n: usize,
    /// Working matrix, kept equal to `transform · c · transformᵀ`.
    w: Vec<Vec<u8>>,
    transform: Vec<Vec<u8>>,
}

impl DenseCongruence {
    fn new(c: &PrimeFieldMatrix) -> Self {
        let n = c.rows();
        let d = c.order();
        let w = (0..n)
            .map(|i| (0..n).map(|j| c.get(i, j)).collect())
            .collect();
        let transform = (0..n)
            .map(|i| (0..n).map(|j| u8::from(i == j)).collect())
            .collect();
        DenseCongruence { d, n, w, transform }
    }

    /// Row swap mirrored as a column swap (congruence by a permutation).
    fn swap(&mut self, i: usize, j: usize) {
        self.w.swap(i, j);
        for row in &mut self.w {
            row.swap(i, j);
        }
        self.transform.swap(i, j);
    }

    /// Row scale mirrored on the column.
    fn scale(&mut self, i: usize, c: u8) {
        for j in 0..self.n {
            self.w[i][j] = self.d.mul(self.w[i][j], c);
        }
        for row in &mut self.w {
            row[i] = self.d.mul(row[i], c);
        }
        for v in &mut self.transform[i] {
            *v = self.d.mul(*v, c);
        }
    }

    /// `row_k += c·row_j` mirrored on the columns.
    fn add_multiple(&mut self, k: usize, j: usize, c: u8) {
        for col in 0..self.n {
            self.w[k][col] = self.d.add(self.w[k][col], self.d.mul(c, self.w[j][col]));
        }
        for row in 0..self.n {
            self.w[row][k] = self.d.add(self.w[row][k], self.d.mul(c, self.w[row][j]));
        }
        for col in 0..self.n {
            self.transform[k][col] = self
                .d
                .add(self.transform[k][col], self.d.mul(c, self.transform[j][col]));
        }
    }

    fn into_matrices(self) -> (PrimeFieldMatrix, PrimeFieldMatrix) {
        let to_matrix = |rows: Vec<Vec<u8>>| {
            let rows: Vec<Vec<i64>> = rows
                .into_iter()
                .map(|r| r.into_iter().map(i64::from).collect())
                .collect();
            PrimeFieldMatrix::from_rows(self.d, &rows).expect("dense scratch shape")
        };
        (to_matrix(self.w), to_matrix(self.transform))
    }
}

/// Brings one alternating matrix to hyperbolic normal form by symplectic
/// Gram–Schmidt: `P·C·Pᵀ` is a direct sum of `[[0, 1], [−1, 0]]` blocks
/// (over `Z_2`: `[[0, 1], [1, 0]]`) followed by zeros. Pivots are chosen at
/// the lowest available indices.
pub fn dickson_normal_form(c: &PrimeFieldMatrix) -> Result<DicksonForm, CommutationError> {
    if c.rows() != c.cols() {
        return Err(CommutationError::Shape(format!(
            "matrix is {}×{}, expected square",
            c.rows(),
            c.cols()
        )));
    }
    if !c.is_alternating() {
        return Err(CommutationError::NotAlternating { index: 0 });
    }
    let n = c.rows();
    let mut scratch = DenseCongruence::new(c);
    let mut blocks = 0usize;
    loop {
        let base = 2 * blocks;
        if base + 1 >= n {
            break;
        }
        // Lowest-index pivot in the untouched trailing submatrix.
        let pivot = (base..n)
            .flat_map(|i| (base..n).map(move |j| (i, j)))
            .find(|&(i, j)| scratch.w[i][j] != 0);
        let Some((i, mut j)) = pivot else { break };
        if i != base {
            scratch.swap(i, base);
            if j == base {
                j = i;
            }
        }
        if j != base + 1 {
            scratch.swap(j, base + 1);
        }
        let v = scratch.w[base][base + 1];
        let inv = scratch.d.inv(v).expect("pivot is nonzero");
        if inv != 1 {
            scratch.scale(base + 1, inv);
        }
        for k in 0..n {
            if k == base || k == base + 1 {
                continue;
            }
            let c1 = scratch.w[k][base + 1];
            if c1 != 0 {
                scratch.add_multiple(k, base, scratch.d.neg(c1));
            }
            let c2 = scratch.w[k][base];
            if c2 != 0 {
                scratch.add_multiple(k, base + 1, c2);
            }
        }
        blocks += 1;
    }
    let pairs: Vec<(usize, usize)> = (0..blocks).map(|t| (2 * t, 2 * t + 1)).collect();
    let zero_indices: Vec<usize> = (2 * blocks..n).collect();
    let (normal, transform) = scratch.into_matrices();
    debug_assert_eq!(transform.mul(c).mul(&transform.transpose()), normal);
    Ok(DicksonForm {
        transform,
        normal,
        pairs,
        zero_indices,
    })
}

/// The pairwise symplectic forms of the rows of an interleaved `r × 2m`
/// matrix, as an `r × r` matrix.
fn row_gram(rows: &PrimeFieldMatrix) -> PrimeFieldMatrix {
    let order = rows.order();
    let r = rows.rows();
    let vectors: Vec<SymplecticVector> = (0..r)
        .map(|i| {
            let entries: Vec<u8> = (0..rows.cols()).map(|c| rows.get(i, c)).collect();
            SymplecticVector::from_entries(order, entries)
        })
        .collect();
    PrimeFieldMatrix::from_fn(r, r, order, |i, j| omega(&vectors[i], &vectors[j]))
}

/// Synthesizes a stabilizer state whose commutation tuple is *exactly* the
/// input. Party `α` receives `rank(C_α)/2` entangled sites (numbered in
/// party order); the `n − rank([C_α]_α)` remaining generators become `|0⟩`
/// sites appended at the end and assigned to party 1.
pub fn synthesize_state(c: &CommutationTuple) -> Result<SynthesisResult, CommutationError> {
    if !c.is_zero_sum() {
        return Err(CommutationError::ZeroSumViolated);
    }
    if !c.rank_condition() {
        return Err(CommutationError::NotStabilizerTuple);
    }
    let n = c.num_generators();
    let order = c.order();
    let m_parties = c.party_count();

    // Basis in which the joint radical is the last w coordinates.
    let refs: Vec<&PrimeFieldMatrix> = c.matrices().iter().collect();
    let concat = PrimeFieldMatrix::concat_cols(&refs);
    let radical = concat.left_kernel();
    let w = radical.rows();
    let r = n - w;
    let extended = radical.extend_rows_to_basis();
    let all_cols: Vec<usize> = (0..n).collect();
    let reordered: Vec<usize> = (w..n).chain(0..w).collect();
    let transform = extended.submatrix(&reordered, &all_cols);
    let transform_inv = transform
        .invert()
        .ok_or_else(|| CommutationError::Internal("radical completion not invertible".into()))?;

    // Per-party data in the new basis, supported on the leading r × r block.
    let leading: Vec<usize> = (0..r).collect();
    let mut entangled_sites = Vec::with_capacity(m_parties);
    let mut party_rows: Vec<PrimeFieldMatrix> = Vec::with_capacity(m_parties);
    for alpha in 0..m_parties {
        let conjugated = transform.mul(c.matrix(alpha)).mul(&transform.transpose());
        for i in 0..n {
            for j in 0..n {
                if (i >= r || j >= r) && conjugated.get(i, j) != 0 {
                    return Err(CommutationError::Internal(
                        "conjugated matrix leaks outside the leading block".into(),
                    ));
                }
            }
        }
        let block = conjugated.submatrix(&leading, &leading);
        let dickson = dickson_normal_form(&block)?;
        let m_alpha = dickson.pairs.len();
        if 2 * m_alpha != block.rank() {
            return Err(CommutationError::Internal(
                "hyperbolic block count disagrees with the rank".into(),
            ));
        }
        // Local generator rows: the pair row 2t, 2t+1 places on local site t
        // the ordered Pauli pair (u, v) with ω(u, v) = 1 — (X, Z) for d = 2
        // and (Z, X) otherwise.
        let rows = PrimeFieldMatrix::from_fn(r, 2 * m_alpha, order, |row, col| {
            let (site, part) = (col / 2, col % 2);
            if row / 2 != site || row >= 2 * m_alpha {
                return 0;
            }
            let x_part = part == 0;
            let first_of_pair = row % 2 == 0;
            let x_first = order.is_binary();
            u8::from(x_part == (first_of_pair == x_first))
        });
        let p_inv = dickson
            .transform
            .invert()
            .ok_or_else(|| CommutationError::Internal("normal-form transform singular".into()))?;
        let local = p_inv.mul(&rows);
        if row_gram(&local) != block {
            return Err(CommutationError::Internal(
                "local rows do not reproduce the party matrix".into(),
            ));
        }
        entangled_sites.push(m_alpha);
        party_rows.push(local);
    }

    let total_entangled: usize = entangled_sites.iter().sum();
    if total_entangled != r {
        return Err(CommutationError::Internal(
            "entangled sites do not add up to the joint rank".into(),
        ));
    }

    // Assemble generators: entangled sites first (party order), then one
    // fresh |0⟩ site per radical generator.
    let mut generators = PrimeFieldMatrix::zeros(n, 2 * n, order);
    let mut offset = 0usize;
    for rows in &party_rows {
        for i in 0..r {
            for col in 0..rows.cols() {
                generators.set(i, 2 * offset + col, rows.get(i, col));
            }
        }
        offset += rows.cols() / 2;
    }
    for free in 0..w {
        generators.set(r + free, 2 * (r + free) + 1, 1);
    }
    let generators = transform_inv.mul(&generators);

    // Phases: for d = 2 each generator gets the exponent making it square
    // to +𝟙; odd d needs none.
    let phases: Vec<u8> = (0..n)
        .map(|row| {
            if order.is_binary() {
                (0..n)
                    .map(|s| generators.get(row, 2 * s) & generators.get(row, 2 * s + 1))
                    .fold(0, |acc, v| acc ^ v)
            } else {
                0
            }
        })
        .collect();
    let tableau = StabilizerTableau::new(generators, phases)
        .map_err(|e| CommutationError::Internal(format!("assembled tableau: {e}")))?;

    // Site assignment: party 1 additionally receives every |0⟩ site.
    let mut parties: Vec<Vec<usize>> = Vec::with_capacity(m_parties);
    let mut next = 0usize;
    for (alpha, &m_alpha) in entangled_sites.iter().enumerate() {
        let mut sites: Vec<usize> = (next..next + m_alpha).collect();
        next += m_alpha;
        if alpha == 0 {
            sites.extend(r..n);
        }
        parties.push(sites);
    }
    let partition = PartyPartition::with_possibly_empty_parties(n, parties)?;

    let check = CommutationTuple::from_state(&tableau, &partition)
        .map_err(|e| CommutationError::Internal(format!("round-trip tuple: {e}")))?;
    if check.matrices() != c.matrices() {
        return Err(CommutationError::Internal(
            "synthesized state does not reproduce the tuple".into(),
        ));
    }
    Ok(SynthesisResult { tableau, partition })
}
