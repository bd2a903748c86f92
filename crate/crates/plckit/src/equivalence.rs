//! Deciding party-local Clifford equivalence and tensor-product structure
//! on commutation tuples.
//!
//! Two states are PLC-equivalent exactly when their tuples are related by a
//! simultaneous congruence `Q·A_α·Qᵀ = B_α`; a state factorizes exactly when
//! some congruence block-diagonalizes every matrix at once. Both decisions
//! run through the *self-adjoint endomorphism ring*
//! `{E : C_α E = Eᵀ C_α ∀α}`: congruence witnesses live in the solution
//! space of a relaxed linear system, and proper idempotents of the ring are
//! in one-to-one correspondence with tensor splits (Fitting's lemma). All
//! searches are budgeted and tri-state — a definite answer always carries a
//! re-verified witness or an exhaustion argument, and everything else is
//! reported as inconclusive.

use crate::commutation::{CommutationError, CommutationTuple};
use crate::field::{FieldError, FieldOrder, PrimeFieldMatrix};
use crate::stabilizer::StabilizerTableau;
use crate::symplectic::{PartyPartition, SymplecticVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Errors from equivalence and decomposition procedures.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum EquivalenceError {
    /// Operands differ in generator count, field, or party count.
    #[error("operands are incompatible: {0}")]
    Mismatch(String),
    /// An operation fixed to a specific party count got another.
    #[error("expected {expected} parties, got {got}")]
    WrongPartyCount {
        /// Required party count.
        expected: usize,
        /// Actual party count.
        got: usize,
    },
    /// The GHZ condition requires every local subspace to vanish.
    #[error("precondition: not full local rank")]
    NotFullLocalRank,
    /// A tuple failing its invariants cannot be decomposed.
    #[error("invalid tuple: {0}")]
    InvalidTuple(String),
    /// A search space too large even to set up.
    #[error("search space of {space} points exceeds the hard cap {cap}")]
    SearchSpaceTooLarge {
        /// Points the enumeration would visit.
        space: u128,
        /// The cap in force.
        cap: u128,
    },
    /// A violated internal postcondition (a bug, not bad input).
    #[error("internal error: {0}")]
    Internal(String),
    /// Underlying tuple error.
    #[error(transparent)]
    Commutation(#[from] CommutationError),
    /// Underlying field error.
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Budgets and seeding for the search-based decisions. Identical inputs,
/// limits, and seeds give identical outputs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchLimits {
    /// Exhaustively enumerate an endomorphism ring of at most this many
    /// elements; beyond it, fall back to sampling.
    pub ring_enumeration: u128,
    /// Exhaustively enumerate a congruence solution space of at most this
    /// many points; beyond it, fall back to sampling.
    pub congruence_search: u128,
    /// Random samples drawn when a space exceeds its enumeration budget.
    pub random_samples: u64,
    /// Seed for all randomized sampling.
    pub seed: u64,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            ring_enumeration: 1 << 20,
            congruence_search: 1 << 20,
            random_samples: 4096,
            seed: 0,
        }
    }
}

/// Outcome of a congruence decision.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EquivalenceVerdict {
    /// A verified witness `Q` with `Q·A_α·Qᵀ = B_α` for every party.
    Equivalent(PrimeFieldMatrix),
    /// Provably no witness exists (invariant mismatch or exhausted the
    /// full solution space).
    Inequivalent,
    /// The search budget ran out before exhaustion.
    Inconclusive,
}

impl EquivalenceVerdict {
    /// True for [`EquivalenceVerdict::Equivalent`].
    pub fn is_equivalent(&self) -> bool {
        matches!(self, EquivalenceVerdict::Equivalent(_))
    }

    /// The witness, when equivalent.
    pub fn witness(&self) -> Option<&PrimeFieldMatrix> {
        match self {
            EquivalenceVerdict::Equivalent(q) => Some(q),
            _ => None,
        }
    }
}

/// Outcome of a one-step splitting attempt.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SplitVerdict {
    /// Exhaustively verified: no ring element yields a proper idempotent.
    Indecomposable,
    /// A verified block-diagonalizing congruence.
    Split {
        /// `witness·C_α·witnessᵀ` is block-diagonal for every party.
        witness: PrimeFieldMatrix,
        /// Sizes of the two diagonal blocks.
        sizes: (usize, usize),
    },
    /// The ring was too large to exhaust and sampling found nothing.
    Inconclusive,
}

/// A basis of the self-adjoint endomorphism ring
/// `{E : C_α E = Eᵀ C_α for all α}` of a matrix family.
#[derive(Clone, Debug)]
pub struct EndomorphismBasis {
    order: FieldOrder,
    n: usize,
    basis: Vec<PrimeFieldMatrix>,
}

impl EndomorphismBasis {
    /// Matrix dimension `n`.
    pub fn matrix_size(&self) -> usize {
        self.n
    }

    /// The field of the entries.
    pub fn order(&self) -> FieldOrder {
        self.order
    }

    /// Dimension of the ring as a vector space.
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    /// The basis matrices.
    pub fn basis(&self) -> &[PrimeFieldMatrix] {
        &self.basis
    }
}

/// Full recursive decomposition of a tuple into indecomposable blocks.
#[derive(Clone, Debug)]
pub struct DecompositionReport {
    /// Indecomposable (or unresolved, when not conclusive) blocks, in the
    /// order produced by the recursion.
    pub blocks: Vec<CommutationTuple>,
    /// Overall congruence: `witness·C_α·witnessᵀ` is the direct sum of the
    /// block matrices for every party.
    pub witness: PrimeFieldMatrix,
    /// False when some block's splitting attempt was inconclusive; such a
    /// block may decompose further.
    pub conclusive: bool,
}

impl DecompositionReport {
    /// Block sizes in block order.
    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(CommutationTuple::num_generators).collect()
    }
}

/// Copy counts of the three canonical tripartite factors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TripartiteCounts {
    /// `|0⟩` sites per party.
    pub zeros_per_party: [usize; 3],
    /// Bell pairs per party pair, ordered (1,2), (1,3), (2,3).
    pub bell_per_pair: [usize; 3],
    /// GHZ copies spanning all three parties.
    pub ghz: usize,
}

/// Outcome of the pairwise-colocal GHZ extraction condition.
#[derive(Clone, Debug)]
pub struct GhzCondition {
    /// Whether stabilizer elements `f_1 … f_{M−2}` exist that pair the
    /// first party with each middle party and share a common restriction.
    pub holds: bool,
    /// The witnesses, when the condition holds: `f_j` is supported exactly
    /// on the first party together with party `j+1` (0-indexed party `j`).
    pub witnesses: Vec<SymplecticVector>,
}

// ---------------------------------------------------------------------------
// Small matrix helpers.

/// The first `rank` rows of the reduced row-echelon form: a canonical basis
/// of the row space.
fn row_space_basis(m: &PrimeFieldMatrix) -> PrimeFieldMatrix {
    let red = m.row_reduce();
    let rows: Vec<usize> = (0..red.rank).collect();
    let cols: Vec<usize> = (0..m.cols()).collect();
    red.reduced.submatrix(&rows, &cols)
}

/// Stacks matrices vertically.
fn vstack(parts: &[&PrimeFieldMatrix]) -> PrimeFieldMatrix {
    assert!(!parts.is_empty(), "nothing to stack");
    let cols = parts[0].cols();
    let order = parts[0].order();
    let total: usize = parts.iter().map(|p| p.rows()).sum();
    let mut out = PrimeFieldMatrix::zeros(total, cols, order);
    let mut at = 0;
    for p in parts {
        assert_eq!(p.cols(), cols, "column mismatch");
        for i in 0..p.rows() {
            for j in 0..cols {
                let v = p.get(i, j);
                if v != 0 {
                    out.set(at + i, j, v);
                }
            }
        }
        at += p.rows();
    }
    out
}

/// A canonical basis of `rowspace(a) ∩ rowspace(b)`.
fn intersect_row_spaces(a: &PrimeFieldMatrix, b: &PrimeFieldMatrix) -> PrimeFieldMatrix {
    let cols = a.cols();
    let order = a.order();
    if a.rows() == 0 || b.rows() == 0 {
        return PrimeFieldMatrix::zeros(0, cols, order);
    }
    // Rows (x | y) of the left kernel of [a; −b] satisfy x·a = y·b: exactly
    // the intersection, parameterized by x.
    let stacked = vstack(&[a, &b.neg()]);
    let lk = stacked.left_kernel();
    if lk.rows() == 0 {
        return PrimeFieldMatrix::zeros(0, cols, order);
    }
    let x_cols: Vec<usize> = (0..a.rows()).collect();
    let lk_rows: Vec<usize> = (0..lk.rows()).collect();
    let x = lk.submatrix(&lk_rows, &x_cols);
    row_space_basis(&x.mul(a))
}

/// Reshapes a flat column-major vector of length `n²` into an `n × n`
/// matrix.
fn reshape_col_major(entries: &[u8], n: usize, order: FieldOrder) -> PrimeFieldMatrix {
    PrimeFieldMatrix::from_fn(n, n, order, |r, c| entries[c * n + r])
}

/// Base-`d` digits of `idx` across `k` positions (position 0 fastest).
fn digits_of(mut idx: u128, d: u64, k: usize) -> Vec<u8> {
    let mut out = vec![0u8; k];
    for slot in out.iter_mut() {
        *slot = (idx % u128::from(d)) as u8;
        idx /= u128::from(d);
    }
    out
}

/// The span element `Σ digit_t · basis_t`.
fn combine(basis: &[PrimeFieldMatrix], digits: &[u8], n: usize, order: FieldOrder) -> PrimeFieldMatrix {
    let mut out = PrimeFieldMatrix::zeros(n, n, order);
    for (b, &digit) in basis.iter().zip(digits) {
        if digit != 0 {
            out = out.add(&b.scale(digit));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Endomorphism ring.

/// True when `C·E = Eᵀ·C` for every matrix in the family.
pub fn satisfies_ring_relation(matrices: &[PrimeFieldMatrix], e: &PrimeFieldMatrix) -> bool {
    let et = e.transpose();
    matrices.iter().all(|c| c.mul(e) == et.mul(c))
}

/// A basis of `{E : C_α E = Eᵀ C_α ∀α}` for a raw alternating family.
///
/// For each party the matrix `C_α E − Eᵀ C_α` is symmetric, so only the
/// entries on or above the diagonal yield equations (and the diagonal
/// vanishes identically over `Z_2`).
pub fn endomorphism_basis_of(matrices: &[PrimeFieldMatrix]) -> Vec<PrimeFieldMatrix> {
    assert!(!matrices.is_empty(), "empty family");
    let n = matrices[0].rows();
    let order = matrices[0].order();
    if n == 0 {
        return Vec::new();
    }
    let mut equations: Vec<(usize, usize, usize)> = Vec::new();
    for alpha in 0..matrices.len() {
        for i in 0..n {
            let j_start = if order.is_binary() { i + 1 } else { i };
            for j in j_start..n {
                equations.push((alpha, i, j));
            }
        }
    }
    let system = PrimeFieldMatrix::from_fn(equations.len(), n * n, order, |row, col| {
        let (alpha, i, j) = equations[row];
        let c = &matrices[alpha];
        let (er, ec) = (col % n, col / n);
        let forward = if ec == j { c.get(i, er) } else { 0 };
        let backward = if ec == i { c.get(er, j) } else { 0 };
        order.sub(forward, backward)
    });
    let kernel = system.kernel();
    (0..kernel.cols())
        .map(|k| {
            let entries: Vec<u8> = (0..n * n).map(|r| kernel.get(r, k)).collect();
            reshape_col_major(&entries, n, order)
        })
        .inspect(|e| debug_assert!(satisfies_ring_relation(matrices, e)))
        .collect()
}

/// A basis of the self-adjoint endomorphism ring of a tuple. The identity
/// always lies in the span.
pub fn endomorphism_basis(c: &CommutationTuple) -> EndomorphismBasis {
    EndomorphismBasis {
        order: c.order(),
        n: c.num_generators(),
        basis: endomorphism_basis_of(c.matrices()),
    }
}

// ---------------------------------------------------------------------------
// Congruence decision.

/// Ranks of all nonempty partial sums `Σ_{α∈S} C_α`, indexed by the subset
/// bitmask `S = 1 … 2^M−1`. Invariant under simultaneous congruence.
pub fn subset_rank_profile(matrices: &[PrimeFieldMatrix]) -> Vec<usize> {
    let m = matrices.len();
    assert!(m < 16, "subset profile of {m} parties is unreasonable");
    let n = matrices[0].rows();
    let order = matrices[0].order();
    (1u32..(1 << m))
        .map(|mask| {
            let mut sum = PrimeFieldMatrix::zeros(n, n, order);
            for (alpha, mat) in matrices.iter().enumerate() {
                if mask & (1 << alpha) != 0 {
                    sum = sum.add(mat);
                }
            }
            sum.rank()
        })
        .collect()
}

fn family_zero_sum(matrices: &[PrimeFieldMatrix]) -> bool {
    let mut sum = matrices[0].clone();
    for m in &matrices[1..] {
        sum = sum.add(m);
    }
    sum.is_zero()
}

/// Kernel of the relaxed witness system `Q·A_α = B_α·P`, as columns over
/// the `2n²` unknowns `(vec Q | vec P)` (column-major). When both families
/// sum to zero the last party's equations are implied and skipped.
fn relaxed_solution_space(
    a: &[PrimeFieldMatrix],
    b: &[PrimeFieldMatrix],
    skip_last: bool,
) -> PrimeFieldMatrix {
    let n = a[0].rows();
    let order = a[0].order();
    let used = if skip_last && a.len() > 1 {
        a.len() - 1
    } else {
        a.len()
    };
    let nn = n * n;
    let mut equations: Vec<(usize, usize, usize)> = Vec::new();
    for alpha in 0..used {
        for i in 0..n {
            for j in 0..n {
                equations.push((alpha, i, j));
            }
        }
    }
    let system = PrimeFieldMatrix::from_fn(equations.len(), 2 * nn, order, |row, col| {
        let (alpha, i, j) = equations[row];
        if col < nn {
            // Coefficient of Q(er, ec) in (Q·A_α)(i, j).
            let (er, ec) = (col % n, col / n);
            if er == i {
                a[alpha].get(ec, j)
            } else {
                0
            }
        } else {
            // Coefficient of P(er, ec) in −(B_α·P)(i, j).
            let p = col - nn;
            let (er, ec) = (p % n, p / n);
            if ec == j {
                order.neg(b[alpha].get(i, er))
            } else {
                0
            }
        }
    });
    system.kernel()
}

/// A canonical basis (as matrices) of the projection of the solution space
/// onto the `Q` unknowns.
fn q_projection_basis(solutions: &PrimeFieldMatrix, n: usize) -> Vec<PrimeFieldMatrix> {
    let order = solutions.order();
    let nn = n * n;
    if solutions.cols() == 0 {
        return Vec::new();
    }
    let flat = PrimeFieldMatrix::from_fn(solutions.cols(), nn, order, |row, col| {
        solutions.get(col, row)
    });
    let basis = row_space_basis(&flat);
    (0..basis.rows())
        .map(|r| {
            let entries: Vec<u8> = (0..nn).map(|c| basis.get(r, c)).collect();
            reshape_col_major(&entries, n, order)
        })
        .collect()
}

/// True when `q` is invertible and `q·A_α·qᵀ = B_α` for every party.
pub fn is_congruence_witness(
    q: &PrimeFieldMatrix,
    a: &[PrimeFieldMatrix],
    b: &[PrimeFieldMatrix],
) -> bool {
    if !q.is_invertible() {
        return false;
    }
    let qt = q.transpose();
    a.iter()
        .zip(b)
        .all(|(ca, cb)| &q.mul(ca).mul(&qt) == cb)
}

/// Decides simultaneous congruence of two matrix families: is there an
/// invertible `Q` with `Q·A_α·Qᵀ = B_α` for every `α`?
///
/// Pipeline: (1) exact invariant filters (subset rank profile, solution
/// space dimensions), (2) the relaxed linear system `Q·A_α = B_α·P`,
/// (3) a search of the solution space's `Q`-projection — exhaustive within
/// the budget (then a miss proves inequivalence, since every witness lies
/// in that projection), sampling beyond it. Witnesses are re-verified.
pub fn congruence_equivalent_matrices(
    a: &[PrimeFieldMatrix],
    b: &[PrimeFieldMatrix],
    limits: &SearchLimits,
) -> Result<EquivalenceVerdict, EquivalenceError> {
    if a.is_empty() || a.len() != b.len() {
        return Err(EquivalenceError::Mismatch(format!(
            "{} parties vs {}",
            a.len(),
            b.len()
        )));
    }
    let n = a[0].rows();
    let order = a[0].order();
    if b[0].rows() != n || b[0].order() != order {
        return Err(EquivalenceError::Mismatch(format!(
            "{n}×{n} over Z_{} vs {}×{} over Z_{}",
            order.order(),
            b[0].rows(),
            b[0].rows(),
            b[0].order().order()
        )));
    }
    if n == 0 || a == b {
        return Ok(EquivalenceVerdict::Equivalent(PrimeFieldMatrix::identity(
            n, order,
        )));
    }
    if subset_rank_profile(a) != subset_rank_profile(b) {
        return Ok(EquivalenceVerdict::Inequivalent);
    }
    let skip_last = family_zero_sum(a) && family_zero_sum(b);
    let sol_ab = relaxed_solution_space(a, b, skip_last);
    let sol_aa = relaxed_solution_space(a, a, skip_last);
    // Witness multiplication maps the A→A space bijectively onto the A→B
    // space, so unequal dimensions rule out a witness.
    if sol_ab.cols() != sol_aa.cols() {
        return Ok(EquivalenceVerdict::Inequivalent);
    }
    if sol_ab.cols() == 0 {
        return Ok(EquivalenceVerdict::Inequivalent);
    }
    let basis = q_projection_basis(&sol_ab, n);
    if basis.is_empty() {
        return Ok(EquivalenceVerdict::Inequivalent);
    }
    let d = order.order();
    let space = u128::from(d).checked_pow(basis.len() as u32);
    match space {
        Some(count) if count <= limits.congruence_search => {
            for idx in 1..count {
                let q = combine(&basis, &digits_of(idx, d, basis.len()), n, order);
                if is_congruence_witness(&q, a, b) {
                    return Ok(EquivalenceVerdict::Equivalent(q));
                }
            }
            Ok(EquivalenceVerdict::Inequivalent)
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(limits.seed);
            for _ in 0..limits.random_samples {
                let digits: Vec<u8> = (0..basis.len())
                    .map(|_| rng.gen_range(0..d) as u8)
                    .collect();
                if digits.iter().all(|&v| v == 0) {
                    continue;
                }
                let q = combine(&basis, &digits, n, order);
                if is_congruence_witness(&q, a, b) {
                    return Ok(EquivalenceVerdict::Equivalent(q));
                }
            }
            Ok(EquivalenceVerdict::Inconclusive)
        }
    }
}

/// [`congruence_equivalent_matrices`] on two tuples, checking that they are
/// comparable (same size, field, and party count).
pub fn congruence_equivalent(
    a: &CommutationTuple,
    b: &CommutationTuple,
    limits: &SearchLimits,
) -> Result<EquivalenceVerdict, EquivalenceError> {
    if a.num_generators() != b.num_generators()
        || a.order() != b.order()
        || a.party_count() != b.party_count()
    {
        return Err(EquivalenceError::Mismatch(format!(
            "n = {}, d = {}, M = {} vs n = {}, d = {}, M = {}",
            a.num_generators(),
            a.order().order(),
            a.party_count(),
            b.num_generators(),
            b.order().order(),
            b.party_count()
        )));
    }
    congruence_equivalent_matrices(a.matrices(), b.matrices(), limits)
}

/// PLC equivalence of two stabilizer states over one partition: computes
/// both commutation tuples and decides their congruence.
pub fn plc_equivalent(
    state_a: &StabilizerTableau,
    state_b: &StabilizerTableau,
    partition: &PartyPartition,
    limits: &SearchLimits,
) -> Result<EquivalenceVerdict, EquivalenceError> {
    let a = CommutationTuple::from_state(state_a, partition)?;
    let b = CommutationTuple::from_state(state_b, partition)?;
    congruence_equivalent(&a, &b, limits)
}

// ---------------------------------------------------------------------------
// Fitting splits and decomposition.

/// `E` raised to a power that stabilizes both range and kernel (`≥ n` by
/// repeated squaring).
fn stabilized_power(e: &PrimeFieldMatrix) -> PrimeFieldMatrix {
    let n = e.rows();
    let mut s = e.clone();
    let mut t = 1usize;
    while t < n {
        s = s.mul(&s);
        t *= 2;
    }
    s
}

/// The Fitting projector of `E`: the idempotent power of `E` projecting
/// onto `range(E^s)` along `ker(E^s)`. `None` when `E` is invertible or
/// nilpotent (projector trivial either way).
fn fitting_projector(e: &PrimeFieldMatrix) -> Option<(PrimeFieldMatrix, usize)> {
    let n = e.rows();
    let s = stabilized_power(e);
    let r = s.rank();
    if r == 0 || r == n {
        return None;
    }
    let order = e.order();
    let col_basis = row_space_basis(&s.transpose()).transpose();
    let kernel = s.kernel();
    let u = PrimeFieldMatrix::concat_cols(&[&col_basis, &kernel]);
    let u_inv = u
        .invert()
        .expect("stabilized power splits the space into range ⊕ kernel");
    let truncated = PrimeFieldMatrix::from_fn(n, n, order, |i, j| {
        if j < r {
            u.get(i, j)
        } else {
            0
        }
    });
    let f = truncated.mul(&u_inv);
    debug_assert_eq!(f.mul(&f), f, "projector must be idempotent");
    Some((f, r))
}

/// Builds the block-diagonalizing congruence from a proper self-adjoint
/// idempotent: rows adapted to `im ⊕ ker` of the induced map on row
/// vectors `x ↦ x·Fᵀ`.
fn split_from_idempotent(
    matrices: &[PrimeFieldMatrix],
    f: &PrimeFieldMatrix,
    rank: usize,
) -> Option<(PrimeFieldMatrix, (usize, usize))> {
    let n = f.rows();
    let ft = f.transpose();
    let image = row_space_basis(&ft);
    let kernel = ft.left_kernel();
    if image.rows() != rank || kernel.rows() != n - rank {
        return None;
    }
    let q = vstack(&[&image, &kernel]);
    if !q.is_invertible() {
        return None;
    }
    let qt = q.transpose();
    for c in matrices {
        let w = q.mul(c).mul(&qt);
        for i in 0..n {
            for j in 0..n {
                if (i < rank) != (j < rank) && w.get(i, j) != 0 {
                    return None;
                }
            }
        }
    }
    Some((q, (rank, n - rank)))
}

/// One splitting attempt on a raw alternating family (no zero-sum
/// assumption — merged sub-families are welcome). Explores the
/// self-adjoint ring: basis elements, then pairwise products (membership-
/// checked, since the ring is not product-closed), then the whole ring
/// when small enough — making "indecomposable" a complete decision — and
/// seeded random span samples otherwise.
pub fn fitting_split_matrices(
    matrices: &[PrimeFieldMatrix],
    limits: &SearchLimits,
) -> Result<SplitVerdict, EquivalenceError> {
    if matrices.is_empty() {
        return Err(EquivalenceError::Mismatch("empty family".into()));
    }
    let n = matrices[0].rows();
    let order = matrices[0].order();
    if n <= 1 {
        return Ok(SplitVerdict::Indecomposable);
    }
    let basis = endomorphism_basis_of(matrices);
    let try_split = |e: &PrimeFieldMatrix| -> Option<(PrimeFieldMatrix, (usize, usize))> {
        let (f, rank) = fitting_projector(e)?;
        debug_assert!(
            satisfies_ring_relation(matrices, &f),
            "idempotent power of a ring element stays in the ring"
        );
        split_from_idempotent(matrices, &f, rank)
    };

    for e in &basis {
        if let Some((witness, sizes)) = try_split(e) {
            return Ok(SplitVerdict::Split { witness, sizes });
        }
    }
    for left in &basis {
        for right in &basis {
            let product = left.mul(right);
            if !satisfies_ring_relation(matrices, &product) {
                continue;
            }
            if let Some((witness, sizes)) = try_split(&product) {
                return Ok(SplitVerdict::Split { witness, sizes });
            }
        }
    }

    let d = order.order();
    let space = u128::from(d).checked_pow(basis.len() as u32);
    match space {
        Some(count) if count <= limits.ring_enumeration => {
            for idx in 1..count {
                let e = combine(&basis, &digits_of(idx, d, basis.len()), n, order);
                if let Some((witness, sizes)) = try_split(&e) {
                    return Ok(SplitVerdict::Split { witness, sizes });
                }
            }
            Ok(SplitVerdict::Indecomposable)
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(limits.seed);
            for _ in 0..limits.random_samples {
                let digits: Vec<u8> = (0..basis.len())
                    .map(|_| rng.gen_range(0..d) as u8)
                    .collect();
                let e = combine(&basis, &digits, n, order);
                if let Some((witness, sizes)) = try_split(&e) {
                    return Ok(SplitVerdict::Split { witness, sizes });
                }
            }
            Ok(SplitVerdict::Inconclusive)
        }
    }
}

/// One splitting attempt on a tuple.
pub fn fitting_split(
    c: &CommutationTuple,
    limits: &SearchLimits,
) -> Result<SplitVerdict, EquivalenceError> {
    fitting_split_matrices(c.matrices(), limits)
}

fn block_tuple(c: &CommutationTuple, from: usize, to: usize) -> Result<CommutationTuple, EquivalenceError> {
    let idx: Vec<usize> = (from..to).collect();
    let matrices: Vec<PrimeFieldMatrix> = c
        .matrices()
        .iter()
        .map(|m| m.submatrix(&idx, &idx))
        .collect();
    Ok(CommutationTuple::new(matrices)?)
}

fn decompose_rec(
    c: &CommutationTuple,
    limits: &SearchLimits,
    blocks: &mut Vec<CommutationTuple>,
    conclusive: &mut bool,
) -> Result<PrimeFieldMatrix, EquivalenceError> {
    let n = c.num_generators();
    match fitting_split(c, limits)? {
        SplitVerdict::Indecomposable => {
            blocks.push(c.clone());
            Ok(PrimeFieldMatrix::identity(n, c.order()))
        }
        SplitVerdict::Inconclusive => {
            blocks.push(c.clone());
            *conclusive = false;
            Ok(PrimeFieldMatrix::identity(n, c.order()))
        }
        SplitVerdict::Split {
            witness,
            sizes: (n1, _),
        } => {
            let rotated = c.change_basis(&witness)?;
            let first = block_tuple(&rotated, 0, n1)?;
            let second = block_tuple(&rotated, n1, n)?;
            let w1 = decompose_rec(&first, limits, blocks, conclusive)?;
            let w2 = decompose_rec(&second, limits, blocks, conclusive)?;
            Ok(PrimeFieldMatrix::direct_sum(&[&w1, &w2]).mul(&witness))
        }
    }
}

/// Fully decomposes a state tuple into indecomposable blocks by recursive
/// splitting, returning the composed congruence witness. Every block of a
/// state tuple is itself a state tuple (the rank condition passes blockwise).
pub fn decompose(
    c: &CommutationTuple,
    limits: &SearchLimits,
) -> Result<DecompositionReport, EquivalenceError> {
    if !c.is_zero_sum() {
        return Err(EquivalenceError::InvalidTuple(
            "matrices do not sum to zero".into(),
        ));
    }
    if !c.rank_condition() {
        return Err(EquivalenceError::InvalidTuple(
            "rank condition fails (stabilizer-code tuple)".into(),
        ));
    }
    let mut blocks = Vec::new();
    let mut conclusive = true;
    let witness = decompose_rec(c, limits, &mut blocks, &mut conclusive)?;

    // Verify the invariant: witness·C_α·witnessᵀ = ⊕ blocks, per party.
    let rotated = c.change_basis(&witness)?;
    for alpha in 0..c.party_count() {
        let parts: Vec<&PrimeFieldMatrix> =
            blocks.iter().map(|b| b.matrix(alpha)).collect();
        if rotated.matrix(alpha) != &PrimeFieldMatrix::direct_sum(&parts) {
            return Err(EquivalenceError::Internal(
                "blocks do not reassemble the rotated tuple".into(),
            ));
        }
    }
    for block in &blocks {
        if !block.rank_condition() {
            return Err(EquivalenceError::Internal(
                "a block of a state tuple fails the rank condition".into(),
            ));
        }
    }
    Ok(DecompositionReport {
        blocks,
        witness,
        conclusive,
    })
}

// ---------------------------------------------------------------------------
// Named extraction criteria.

/// The Bell reference tuple on `parties` parties: a single edge whose
/// endpoints sit at parties `x` and `y`, with zero matrices elsewhere.
fn bell_reference(
    order: FieldOrder,
    parties: usize,
    x: usize,
    y: usize,
) -> Result<CommutationTuple, EquivalenceError> {
    let graph = crate::stabilizer::GraphAdjacency::from_edges(2, order, &[(0, 1)])
        .map_err(|e| EquivalenceError::Internal(format!("bell reference graph: {e}")))?;
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); parties];
    groups[x] = vec![0];
    groups[y] = vec![1];
    let partition = PartyPartition::with_possibly_empty_parties(2, groups)
        .map_err(|e| EquivalenceError::Internal(format!("bell reference partition: {e}")))?;
    Ok(CommutationTuple::from_state(&graph.graph_state(), &partition)?)
}

/// The three-party GHZ reference tuple: the star graph on three sites,
/// one site per party.
fn ghz3_reference(order: FieldOrder) -> Result<CommutationTuple, EquivalenceError> {
    let graph = crate::stabilizer::GraphAdjacency::star(3, order);
    let partition = PartyPartition::consecutive(&[1, 1, 1])
        .map_err(|e| EquivalenceError::Internal(format!("ghz reference partition: {e}")))?;
    Ok(CommutationTuple::from_state(&graph.graph_state(), &partition)?)
}

/// Counts the canonical factors of a three-party stabilizer state: `|0⟩`
/// sites per party, Bell pairs per party pair, and GHZ copies. Every
/// three-party state decomposes into exactly these factors, so an
/// unmatched block signals an internal error.
pub fn tripartite_canonical_counts(
    state: &StabilizerTableau,
    partition: &PartyPartition,
    limits: &SearchLimits,
) -> Result<TripartiteCounts, EquivalenceError> {
    if partition.party_count() != 3 {
        return Err(EquivalenceError::WrongPartyCount {
            expected: 3,
            got: partition.party_count(),
        });
    }
    let tuple = CommutationTuple::from_state(state, partition)?;
    let n = tuple.num_generators();
    let zeros_per_party = [
        state.local_subspace_dim(partition, 0),
        state.local_subspace_dim(partition, 1),
        state.local_subspace_dim(partition, 2),
    ];
    let total_zeros: usize = zeros_per_party.iter().sum();
    if total_zeros != n - tuple.concatenated_rank() {
        return Err(EquivalenceError::Internal(
            "local dimensions disagree with the joint radical".into(),
        ));
    }

    let report = decompose(&tuple, limits)?;
    if !report.conclusive {
        return Err(EquivalenceError::Internal(
            "three-party decomposition came back inconclusive".into(),
        ));
    }
    let order = tuple.order();
    let pair_order = [(0usize, 1usize), (0, 2), (1, 2)];
    let mut bell_per_pair = [0usize; 3];
    let mut ghz = 0usize;
    let mut zero_blocks = 0usize;
    for block in &report.blocks {
        match block.num_generators() {
            1 => {
                if !block.matrices().iter().all(PrimeFieldMatrix::is_zero) {
                    return Err(EquivalenceError::Internal(
                        "nonzero 1×1 alternating block".into(),
                    ));
                }
                zero_blocks += 1;
            }
            2 => {
                let mut matched = false;
                for (slot, &(x, y)) in pair_order.iter().enumerate() {
                    let reference = bell_reference(order, 3, x, y)?;
                    if congruence_equivalent(block, &reference, limits)?.is_equivalent() {
                        bell_per_pair[slot] += 1;
                        matched = true;
                        break;
                    }
                }
                if !matched {
                    return Err(EquivalenceError::Internal(
                        "a 2-generator block matches no Bell pair placement".into(),
                    ));
                }
            }
            3 => {
                let reference = ghz3_reference(order)?;
                if !congruence_equivalent(block, &reference, limits)?.is_equivalent() {
                    return Err(EquivalenceError::Internal(
                        "a 3-generator block is not the GHZ tuple".into(),
                    ));
                }
                ghz += 1;
            }
            other => {
                return Err(EquivalenceError::Internal(format!(
                    "indecomposable block of size {other} in a three-party state"
                )));
            }
        }
    }
    if zero_blocks != total_zeros {
        return Err(EquivalenceError::Internal(
            "zero blocks disagree with the local dimensions".into(),
        ));
    }
    Ok(TripartiteCounts {
        zeros_per_party,
        bell_per_pair,
        ghz,
    })
}

/// The number of GHZ copies extractable across all parties:
/// `Δ = n − dim span(∪_α colocal subspaces)`.
pub fn ghz_extraction_count(state: &StabilizerTableau, partition: &PartyPartition) -> usize {
    let n = state.num_sites();
    let order = state.order();
    let mut rows: Vec<Vec<i64>> = Vec::new();
    for party in 0..partition.party_count() {
        for v in state.colocal_subspace(partition, party) {
            rows.push(v.entries().iter().map(|&x| i64::from(x)).collect());
        }
    }
    if rows.is_empty() {
        return n;
    }
    let stacked = PrimeFieldMatrix::from_rows(order, &rows).expect("uniform row length");
    n - stacked.rank()
}

/// Decides the pairwise-colocal GHZ extraction condition: are there
/// stabilizer elements `f_1 … f_{M−2}`, one per middle party, each
/// supported on exactly the first party together with that party, all
/// sharing one nonzero restriction to the first party?
///
/// Requires every party's local subspace to vanish ("full local rank");
/// under that precondition each candidate restriction lifts uniquely, so
/// the search space is the intersection of the projected subspaces.
pub fn ghz_condition(
    state: &StabilizerTableau,
    partition: &PartyPartition,
) -> Result<GhzCondition, EquivalenceError> {
    let m = partition.party_count();
    if m < 3 {
        return Err(EquivalenceError::Mismatch(format!(
            "the GHZ condition needs at least 3 parties, got {m}"
        )));
    }
    for party in 0..m {
        if state.local_subspace_dim(partition, party) != 0 {
            return Err(EquivalenceError::NotFullLocalRank);
        }
    }
    let n = state.num_sites();
    let order = state.order();
    let first = partition.party(0);
    let first_width = 2 * first.len();

    // Per middle party: elements vanishing outside (first ∪ that party),
    // and their compressed restrictions to the first party.
    let mut element_bases: Vec<PrimeFieldMatrix> = Vec::new();
    let mut projections: Vec<PrimeFieldMatrix> = Vec::new();
    for j in 1..m - 1 {
        let mut outside: Vec<usize> = (0..n)
            .filter(|&s| {
                let p = partition.site_party(s);
                p != 0 && p != j
            })
            .collect();
        outside.sort_unstable();
        let coeffs = state.restricted_columns(&outside).left_kernel();
        let elements = coeffs.mul(state.generators());
        let compressed_cols: Vec<usize> = first
            .iter()
            .flat_map(|&s| [2 * s, 2 * s + 1])
            .collect();
        let rows: Vec<usize> = (0..elements.rows()).collect();
        projections.push(elements.submatrix(&rows, &compressed_cols));
        element_bases.push(elements);
    }

    // Common restrictions: intersect the projected subspaces.
    let mut common = match projections.first() {
        Some(p) => row_space_basis(p),
        None => PrimeFieldMatrix::zeros(0, first_width, order),
    };
    for p in &projections[1..] {
        common = intersect_row_spaces(&common, p);
    }
    if common.rows() == 0 {
        return Ok(GhzCondition {
            holds: false,
            witnesses: Vec::new(),
        });
    }
    let d = order.order();
    let space = u128::from(d)
        .checked_pow(common.rows() as u32)
        .ok_or(EquivalenceError::SearchSpaceTooLarge {
            space: u128::MAX,
            cap: 1 << 20,
        })?;
    if space > (1 << 20) {
        return Err(EquivalenceError::SearchSpaceTooLarge {
            space,
            cap: 1 << 20,
        });
    }

    for idx in 1..space {
        let digits = digits_of(idx, d, common.rows());
        let mut rho = PrimeFieldMatrix::zeros(1, first_width, order);
        for (r, &digit) in digits.iter().enumerate() {
            if digit != 0 {
                let all: Vec<usize> = (0..first_width).collect();
                rho = rho.add(&common.submatrix(&[r], &all).scale(digit));
            }
        }
        let mut witnesses = Vec::new();
        let mut ok = true;
        for (j, (proj, elems)) in projections.iter().zip(&element_bases).enumerate() {
            // Solve x·proj = rho; the lift x·elems is unique under full
            // local rank.
            let Some(solution) = proj.transpose().solve(&rho.transpose()) else {
                ok = false;
                break;
            };
            let x = solution.particular.transpose();
            let f_row = x.mul(elems);
            let entries: Vec<u8> = (0..2 * n).map(|c| f_row.get(0, c)).collect();
            let f = SymplecticVector::from_entries(order, entries);
            let mut expected: Vec<usize> = first.to_vec();
            expected.extend_from_slice(partition.party(j + 1));
            expected.sort_unstable();
            if f.support() != expected {
                ok = false;
                break;
            }
            witnesses.push(f);
        }
        if ok {
            return Ok(GhzCondition {
                holds: true,
                witnesses,
            });
        }
    }
    Ok(GhzCondition {
        holds: false,
        witnesses: Vec::new(),
    })
}

/// The four-party size imbalance criterion: a partition with
/// `max size > 2 · min size` admits no indecomposable state, so every
/// state on it decomposes.
pub fn imbalance_forces_decomposition(sizes: &[usize]) -> Result<bool, EquivalenceError> {
    if sizes.len() != 4 {
        return Err(EquivalenceError::WrongPartyCount {
            expected: 4,
            got: sizes.len(),
        });
    }
    let max = *sizes.iter().max().expect("nonempty");
    let min = *sizes.iter().min().expect("nonempty");
    Ok(max > 2 * min)
}

fn block_multisets_congruent(
    a: &[CommutationTuple],
    b: &[CommutationTuple],
    limits: &SearchLimits,
) -> Result<bool, EquivalenceError> {
    if a.len() != b.len() {
        return Ok(false);
    }
    let mut unmatched: Vec<&CommutationTuple> = b.iter().collect();
    'outer: for block in a {
        for i in 0..unmatched.len() {
            if unmatched[i].num_generators() == block.num_generators()
                && congruence_equivalent(block, unmatched[i], limits)?.is_equivalent()
            {
                unmatched.swap_remove(i);
                continue 'outer;
            }
        }
        return Ok(false);
    }
    Ok(true)
}

/// Empirical probe of decomposition uniqueness: decomposes random
/// congruent conjugates of the tuple and checks that the multiset of block
/// congruence classes never changes. `false` flags either an inconclusive
/// run or a genuine disagreement.
pub fn decomposition_order_invariance(
    c: &CommutationTuple,
    trials: u32,
    seed: u64,
    limits: &SearchLimits,
) -> Result<bool, EquivalenceError> {
    let base = decompose(c, limits)?;
    if !base.conclusive {
        return Ok(false);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let rotation =
            PrimeFieldMatrix::random_invertible(c.num_generators(), c.order(), &mut rng);
        let conjugated = c.change_basis(&rotation)?;
        let run = decompose(&conjugated, limits)?;
        if !run.conclusive || !block_multisets_congruent(&base.blocks, &run.blocks, limits)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The direct sum of tuples over the same field and party count.
pub fn direct_sum_tuple(parts: &[&CommutationTuple]) -> Result<CommutationTuple, EquivalenceError> {
    if parts.is_empty() {
        return Err(EquivalenceError::Mismatch("nothing to sum".into()));
    }
    let m = parts[0].party_count();
    let order = parts[0].order();
    if parts.iter().any(|p| p.party_count() != m || p.order() != order) {
        return Err(EquivalenceError::Mismatch(
            "direct summands disagree in party count or field".into(),
        ));
    }
    let matrices: Vec<PrimeFieldMatrix> = (0..m)
        .map(|alpha| {
            let blocks: Vec<&PrimeFieldMatrix> =
                parts.iter().map(|p| p.matrix(alpha)).collect();
            PrimeFieldMatrix::direct_sum(&blocks)
        })
        .collect();
    Ok(CommutationTuple::new(matrices)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stabilizer::GraphAdjacency;

    fn d2() -> FieldOrder {
        FieldOrder::TWO
    }

    fn d3() -> FieldOrder {
        FieldOrder::THREE
    }

    fn limits() -> SearchLimits {
        SearchLimits::default()
    }

    fn m(order: FieldOrder, rows: &[Vec<i64>]) -> PrimeFieldMatrix {
        PrimeFieldMatrix::from_rows(order, rows).unwrap()
    }

    fn bell_tuple() -> CommutationTuple {
        let g = GraphAdjacency::from_edges(2, d2(), &[(0, 1)]).unwrap();
        let p = PartyPartition::consecutive(&[1, 1]).unwrap();
        CommutationTuple::from_state(&g.graph_state(), &p).unwrap()
    }

    fn ghz3_tuple() -> CommutationTuple {
        let g = GraphAdjacency::path(3, d2());
        let p = PartyPartition::consecutive(&[1, 1, 1]).unwrap();
        CommutationTuple::from_state(&g.graph_state(), &p).unwrap()
    }

    fn zero_tuple(parties: usize) -> CommutationTuple {
        CommutationTuple::new(vec![PrimeFieldMatrix::zeros(1, 1, d2()); parties]).unwrap()
    }

    #[test]
    fn bell_ring_is_three_dimensional() {
        let basis = endomorphism_basis(&bell_tuple());
        assert_eq!(basis.dimension(), 3);
        // Brute force: 8 of the 16 binary 2×2 matrices satisfy the relation.
        let solutions = PrimeFieldMatrix::enumerate_all(2, 2, d2())
            .filter(|e| satisfies_ring_relation(bell_tuple().matrices(), e))
            .count();
        assert_eq!(solutions, 8);
        // The identity and both single-entry off-diagonal matrices qualify.
        for e in [
            PrimeFieldMatrix::identity(2, d2()),
            m(d2(), &[vec![0, 1], vec![0, 0]]),
            m(d2(), &[vec![0, 0], vec![1, 0]]),
        ] {
            assert!(satisfies_ring_relation(bell_tuple().matrices(), &e));
        }
    }

    #[test]
    fn identity_always_lies_in_the_ring() {
        for tuple in [bell_tuple(), ghz3_tuple()] {
            let id = PrimeFieldMatrix::identity(tuple.num_generators(), tuple.order());
            assert!(satisfies_ring_relation(tuple.matrices(), &id));
            assert!(endomorphism_basis(&tuple).dimension() >= 1);
        }
    }

    #[test]
    fn block_projectors_of_a_direct_sum_are_ring_elements() {
        let sum = direct_sum_tuple(&[&ghz3_tuple(), &bell_reference(d2(), 3, 0, 1).unwrap()])
            .unwrap();
        let p1 = PrimeFieldMatrix::from_fn(5, 5, d2(), |i, j| u8::from(i == j && i < 3));
        let p2 = PrimeFieldMatrix::from_fn(5, 5, d2(), |i, j| u8::from(i == j && i >= 3));
        assert!(satisfies_ring_relation(sum.matrices(), &p1));
        assert!(satisfies_ring_relation(sum.matrices(), &p2));
    }

    #[test]
    fn subset_rank_profile_of_the_bell_tuple() {
        assert_eq!(subset_rank_profile(bell_tuple().matrices()), vec![2, 2, 0]);
    }

    #[test]
    fn ghz3_is_congruent_to_its_tilde_form() {
        let q = m(d2(), &[vec![1, 0, 0], vec![0, 1, 0], vec![0, 1, 1]]);
        let tilde = ghz3_tuple().change_basis(&q).unwrap();
        let verdict = congruence_equivalent(&ghz3_tuple(), &tilde, &limits()).unwrap();
        let witness = verdict.witness().expect("equivalent");
        assert!(is_congruence_witness(
            witness,
            ghz3_tuple().matrices(),
            tilde.matrices()
        ));
    }

    #[test]
    fn every_tuple_is_congruent_to_itself_via_identity() {
        let verdict = congruence_equivalent(&ghz3_tuple(), &ghz3_tuple(), &limits()).unwrap();
        assert_eq!(
            verdict.witness(),
            Some(&PrimeFieldMatrix::identity(3, d2()))
        );
    }

    #[test]
    fn bell_differs_from_the_merged_ghz_restriction() {
        let merged = ghz3_tuple().merge_parties(0, 1).unwrap();
        let idx = [0usize, 1];
        let restricted = CommutationTuple::new(
            merged
                .matrices()
                .iter()
                .map(|mat| mat.submatrix(&idx, &idx))
                .collect(),
        )
        .unwrap();
        assert_eq!(
            congruence_equivalent(&bell_tuple(), &restricted, &limits()).unwrap(),
            EquivalenceVerdict::Inequivalent
        );
    }

    #[test]
    fn qutrit_conjugates_are_recognized() {
        let g = GraphAdjacency::from_weighted_edges(
            4,
            d3(),
            &[(0, 1, 1), (0, 3, 1), (2, 3, 2)],
        )
        .unwrap();
        let p = PartyPartition::consecutive(&[1, 1, 1, 1]).unwrap();
        let tuple = CommutationTuple::from_state(&g.graph_state(), &p).unwrap();
        let q = m(
            d3(),
            &[
                vec![1, 0, 2, 0],
                vec![1, 1, 0, 0],
                vec![0, 0, 1, 1],
                vec![0, 0, 0, 1],
            ],
        );
        let rotated = tuple.change_basis(&q).unwrap();
        let verdict = congruence_equivalent(&tuple, &rotated, &limits()).unwrap();
        assert!(verdict.is_equivalent());
        assert!(is_congruence_witness(
            verdict.witness().unwrap(),
            tuple.matrices(),
            rotated.matrices()
        ));
    }

    #[test]
    fn zero_budget_reports_inconclusive_honestly() {
        let q = m(d2(), &[vec![1, 0, 0], vec![0, 1, 0], vec![0, 1, 1]]);
        let tilde = ghz3_tuple().change_basis(&q).unwrap();
        let starved = SearchLimits {
            congruence_search: 1,
            random_samples: 0,
            ..SearchLimits::default()
        };
        assert_eq!(
            congruence_equivalent(&ghz3_tuple(), &tilde, &starved).unwrap(),
            EquivalenceVerdict::Inconclusive
        );
    }

    #[test]
    fn mismatched_tuples_are_an_error_not_a_verdict() {
        assert!(matches!(
            congruence_equivalent(&bell_tuple(), &ghz3_tuple(), &limits()),
            Err(EquivalenceError::Mismatch(_))
        ));
    }

    #[test]
    fn plc_equivalence_survives_an_intra_party_move() {
        // Two parties of two sites each; toggling an intra-party edge and
        // locally complementing stay in the class.
        let g = GraphAdjacency::from_edges(4, d2(), &[(0, 2), (1, 3)]).unwrap();
        let partition = PartyPartition::new(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
        let moved = g
            .toggle_edge(0, 1, 1)
            .unwrap()
            .local_complement(0)
            .unwrap();
        let verdict = plc_equivalent(
            &g.graph_state(),
            &moved.graph_state(),
            &partition,
            &limits(),
        )
        .unwrap();
        assert!(verdict.is_equivalent());
    }

    #[test]
    fn ghz3_and_padded_bell_are_not_plc_equivalent() {
        let ghz = GraphAdjacency::path(3, d2()).graph_state();
        let padded_bell = GraphAdjacency::from_edges(3, d2(), &[(1, 2)])
            .unwrap()
            .graph_state();
        let partition = PartyPartition::consecutive(&[1, 1, 1]).unwrap();
        assert_eq!(
            plc_equivalent(&ghz, &padded_bell, &partition, &limits()).unwrap(),
            EquivalenceVerdict::Inequivalent
        );
    }

    #[test]
    fn double_bell_splits_into_two_bell_blocks() {
        let sum = direct_sum_tuple(&[&bell_tuple(), &bell_tuple()]).unwrap();
        let SplitVerdict::Split { witness, sizes } =
            fitting_split(&sum, &limits()).unwrap()
        else {
            panic!("expected a split");
        };
        assert_eq!(sizes, (2, 2));
        let rotated = sum.change_basis(&witness).unwrap();
        for alpha in 0..2 {
            let w = rotated.matrix(alpha);
            for i in 0..2 {
                for j in 2..4 {
                    assert_eq!(w.get(i, j), 0, "off-diagonal block must vanish");
                }
            }
        }
    }

    #[test]
    fn small_entangled_tuples_are_indecomposable() {
        assert_eq!(
            fitting_split(&bell_tuple(), &limits()).unwrap(),
            SplitVerdict::Indecomposable
        );
        assert_eq!(
            fitting_split(&ghz3_tuple(), &limits()).unwrap(),
            SplitVerdict::Indecomposable
        );
    }

    #[test]
    fn decompose_recovers_all_three_factors() {
        let sum = direct_sum_tuple(&[
            &ghz3_tuple(),
            &bell_reference(d2(), 3, 0, 1).unwrap(),
            &zero_tuple(3),
        ])
        .unwrap();
        let report = decompose(&sum, &limits()).unwrap();
        assert!(report.conclusive);
        let mut sizes = report.block_sizes();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![1, 2, 3]);
        for block in &report.blocks {
            assert!(block.rank_condition());
        }

        let single = decompose(&ghz3_tuple(), &limits()).unwrap();
        assert_eq!(single.block_sizes(), vec![3]);
    }

    #[test]
    fn decompose_rejects_invalid_tuples() {
        let swap = m(d3(), &[vec![0, 1], vec![2, 0]]);
        let code = CommutationTuple::new(vec![swap.clone(), swap.clone(), swap]).unwrap();
        assert!(matches!(
            decompose(&code, &limits()),
            Err(EquivalenceError::InvalidTuple(_))
        ));
    }

    #[test]
    fn tripartite_counts_on_canonical_states() {
        let lim = limits();
        let singles = PartyPartition::consecutive(&[1, 1, 1]).unwrap();

        let ghz = GraphAdjacency::path(3, d2()).graph_state();
        assert_eq!(
            tripartite_canonical_counts(&ghz, &singles, &lim).unwrap(),
            TripartiteCounts {
                zeros_per_party: [0, 0, 0],
                bell_per_pair: [0, 0, 0],
                ghz: 1
            }
        );

        // Two Bell pairs: party 1 holds one end of each.
        let two_bells = GraphAdjacency::from_edges(4, d2(), &[(0, 1), (2, 3)])
            .unwrap()
            .graph_state();
        let grouping = PartyPartition::new(4, vec![vec![0, 2], vec![1], vec![3]]).unwrap();
        assert_eq!(
            tripartite_canonical_counts(&two_bells, &grouping, &lim).unwrap(),
            TripartiteCounts {
                zeros_per_party: [0, 0, 0],
                bell_per_pair: [1, 1, 0],
                ghz: 0
            }
        );

        // Fully product state: one |0⟩ per site.
        let zeros = GraphAdjacency::empty(4, d2()).graph_state();
        let split = PartyPartition::consecutive(&[2, 1, 1]).unwrap();
        assert_eq!(
            tripartite_canonical_counts(&zeros, &split, &lim).unwrap(),
            TripartiteCounts {
                zeros_per_party: [2, 1, 1],
                bell_per_pair: [0, 0, 0],
                ghz: 0
            }
        );

        // A Bell pair between parties 1 and 2 plus an idle site at party 3.
        let mixed = GraphAdjacency::from_edges(3, d2(), &[(0, 1)])
            .unwrap()
            .graph_state();
        assert_eq!(
            tripartite_canonical_counts(&mixed, &singles, &lim).unwrap(),
            TripartiteCounts {
                zeros_per_party: [0, 0, 1],
                bell_per_pair: [1, 0, 0],
                ghz: 0
            }
        );

        assert!(matches!(
            tripartite_canonical_counts(
                &ghz,
                &PartyPartition::consecutive(&[2, 1]).unwrap(),
                &lim
            ),
            Err(EquivalenceError::WrongPartyCount { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn ghz_extraction_counts() {
        let singles3 = PartyPartition::consecutive(&[1, 1, 1]).unwrap();
        let ghz = GraphAdjacency::path(3, d2()).graph_state();
        assert_eq!(ghz_extraction_count(&ghz, &singles3), 1);

        // Two Bell pairs with the middle party holding sites 2 and 3.
        let layout = PartyPartition::new(4, vec![vec![0], vec![1, 2], vec![3]]).unwrap();
        let two_bells = GraphAdjacency::from_edges(4, d2(), &[(0, 1), (2, 3)])
            .unwrap()
            .graph_state();
        assert_eq!(ghz_extraction_count(&two_bells, &layout), 0);

        let product = GraphAdjacency::empty(3, d2()).graph_state();
        assert_eq!(ghz_extraction_count(&product, &singles3), 0);
    }

    #[test]
    fn ghz_condition_on_the_four_party_star() {
        let star = GraphAdjacency::star(4, d2()).graph_state();
        let singles = PartyPartition::consecutive(&[1, 1, 1, 1]).unwrap();
        let result = ghz_condition(&star, &singles).unwrap();
        assert!(result.holds);
        assert_eq!(result.witnesses.len(), 2);
        for (j, f) in result.witnesses.iter().enumerate() {
            assert_eq!(f.support(), vec![0, j + 1]);
        }
        // All witnesses share the same restriction to the first party.
        let first = result.witnesses[0].restrict(&[0]);
        for f in &result.witnesses {
            assert_eq!(f.restrict(&[0]), first);
        }
    }

    #[test]
    fn ghz_condition_fails_on_spiral_and_double_bell() {
        // Spiral on 5 sites: path 1–2–3–4–5 with the ends sharing a party.
        let spiral = GraphAdjacency::path(5, d2()).graph_state();
        let partition =
            PartyPartition::new(5, vec![vec![0, 4], vec![1], vec![2], vec![3]]).unwrap();
        assert!(!ghz_condition(&spiral, &partition).unwrap().holds);

        let two_bells = GraphAdjacency::from_edges(4, d2(), &[(0, 1), (2, 3)])
            .unwrap()
            .graph_state();
        let singles = PartyPartition::consecutive(&[1, 1, 1, 1]).unwrap();
        assert!(!ghz_condition(&two_bells, &singles).unwrap().holds);
    }

    #[test]
    fn ghz_condition_requires_full_local_rank() {
        let product = GraphAdjacency::empty(3, d2()).graph_state();
        let singles = PartyPartition::consecutive(&[1, 1, 1]).unwrap();
        let err = ghz_condition(&product, &singles).unwrap_err();
        assert_eq!(err.to_string(), "precondition: not full local rank");
    }

    #[test]
    fn imbalance_criterion_on_four_parties() {
        assert_eq!(imbalance_forces_decomposition(&[4, 2, 2, 2]), Ok(false));
        assert_eq!(imbalance_forces_decomposition(&[5, 2, 2, 2]), Ok(true));
        assert_eq!(imbalance_forces_decomposition(&[1, 1, 1, 1]), Ok(false));
        assert_eq!(imbalance_forces_decomposition(&[2, 2, 1, 5]), Ok(true));
        assert!(matches!(
            imbalance_forces_decomposition(&[1, 1, 1]),
            Err(EquivalenceError::WrongPartyCount { expected: 4, got: 3 })
        ));
    }

    #[test]
    fn decomposition_is_order_invariant_on_a_mixed_sum() {
        let sum = direct_sum_tuple(&[
            &ghz3_tuple(),
            &bell_reference(d2(), 3, 0, 1).unwrap(),
            &zero_tuple(3),
        ])
        .unwrap();
        assert_eq!(
            decomposition_order_invariance(&sum, 3, 7, &limits()),
            Ok(true)
        );
    }
}
