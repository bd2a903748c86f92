//! Stabilizer tableaux, graph states, and the graph moves that stay inside
//! a party-local equivalence class.
//!
//! A stabilizer state on `n` sites of prime dimension `d` is described by
//! `n` independent, pairwise-commuting Pauli generators — rows of an
//! `n × 2n` matrix in the interleaved `(a_1, b_1, …, a_n, b_n)` layout —
//! together with a phase exponent per generator. Graph states are the
//! special case where generator `i` is `X_i ⊗ Π_j Z_j^{Γ_ij}` for an
//! adjacency matrix `Γ`.

use crate::field::{FieldError, FieldOrder, PrimeFieldMatrix};
use crate::symplectic::{omega, PartyPartition, SymplecticVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors from tableau and graph operations.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum StabilizerError {
    /// An operation restricted to one characteristic was called on another.
    #[error("operation requires {required}, got order {got}")]
    WrongOrder {
        /// What the operation needs, e.g. "order 2".
        required: &'static str,
        /// The actual field order.
        got: u64,
    },
    /// A site index at or past the site count.
    #[error("site index {0} out of range")]
    SiteOutOfRange(usize),
    /// An edge endpoint repeated.
    #[error("self-loop at site {0}")]
    SelfLoop(usize),
    /// Edge multiplication by zero would erase incident edges irreversibly.
    #[error("scale factor must be nonzero")]
    ZeroFactor,
    /// An edge toggle between different parties is not a party-local move.
    #[error("edge toggle between sites {i} and {j} crosses parties")]
    CrossPartyToggle {
        /// First endpoint (0-indexed).
        i: usize,
        /// Second endpoint (0-indexed).
        j: usize,
    },
    /// A matrix that is not symmetric with zero diagonal.
    #[error("adjacency matrix must be symmetric with zero diagonal")]
    NotAdjacency,
    /// Structurally invalid tableau input.
    #[error("malformed tableau: {0}")]
    Malformed(String),
    /// Unreadable edge-list text.
    #[error("cannot parse edge list (line {line}): {reason}")]
    EdgeParse {
        /// 1-indexed line number within the given text.
        line: usize,
        /// What was wrong.
        reason: String,
    },
    /// Underlying field error.
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// A stabilizer tableau: `n` generator rows over `Z_d` plus per-generator
/// phase exponents (power of `i` mod 4 for `d = 2`, power of the primitive
/// root `η` mod `d` otherwise).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct StabilizerTableau {
    order: FieldOrder,
    generators: PrimeFieldMatrix,
    phases: Vec<u8>,
}

/// Outcome of checking the three tableau invariants; an empty violation
/// list means the tableau describes a stabilizer state.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TableauReport {
    /// Human-readable description of each violated invariant.
    pub violations: Vec<String>,
}

impl TableauReport {
    /// True when no invariant is violated.
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Serialization shape for tableaux: `{n, d, generators, phases}` with
/// generators as interleaved exponent rows.
#[derive(Serialize, Deserialize, Debug, Clone, PartialEq, Eq)]
pub struct TableauDto {
    /// Site count.
    pub n: usize,
    /// Field order.
    pub d: u64,
    /// One row per generator, `2n` interleaved entries each.
    pub generators: Vec<Vec<u8>>,
    /// One phase exponent per generator.
    pub phases: Vec<u8>,
}

impl StabilizerTableau {
    /// Builds a tableau from a generator matrix and phases, checking shape
    /// only; use [`StabilizerTableau::validate`] for the state invariants.
    pub fn new(
        generators: PrimeFieldMatrix,
        phases: Vec<u8>,
    ) -> Result<Self, StabilizerError> {
        let n = generators.rows();
        if generators.cols() != 2 * n {
            return Err(StabilizerError::Malformed(format!(
                "generator matrix must be n×2n, got {}×{}",
                n,
                generators.cols()
            )));
        }
        if phases.len() != n {
            return Err(StabilizerError::Malformed(format!(
                "expected {} phases, got {}",
                n,
                phases.len()
            )));
        }
        let order = generators.order();
        let modulus = if order.is_binary() { 4 } else { order.order() as u8 };
        let phases = phases.into_iter().map(|p| p % modulus).collect();
        Ok(StabilizerTableau {
            order,
            generators,
            phases,
        })
    }

    /// Site count `n`.
    pub fn num_sites(&self) -> usize {
        self.generators.rows()
    }

    /// The field of the exponents.
    pub fn order(&self) -> FieldOrder {
        self.order
    }

    /// The `n × 2n` generator matrix.
    pub fn generators(&self) -> &PrimeFieldMatrix {
        &self.generators
    }

    /// Generator `i` as a symplectic vector.
    pub fn generator(&self, i: usize) -> SymplecticVector {
        let row: Vec<u8> = (0..self.generators.cols())
            .map(|c| self.generators.get(i, c))
            .collect();
        SymplecticVector::from_entries(self.order, row)
    }

    /// Per-generator phase exponents.
    pub fn phases(&self) -> &[u8] {
        &self.phases
    }

    /// Checks the state invariants: full rank, pairwise commutation, and
    /// (for `d = 2`) that each phased generator squares to `+𝟙`.
    pub fn validate(&self) -> TableauReport {
        let mut violations = Vec::new();
        let n = self.num_sites();
        let rank = self.generators.rank();
        if rank != n {
            violations.push(format!(
                "generators are dependent: rank {rank} of {n}"
            ));
        }
        let vectors: Vec<SymplecticVector> = (0..n).map(|i| self.generator(i)).collect();
        for i in 0..n {
            for j in (i + 1)..n {
                let w = omega(&vectors[i], &vectors[j]);
                if w != 0 {
                    violations.push(format!(
                        "generators {} and {} fail to commute (ω = {w})",
                        i + 1,
                        j + 1
                    ));
                }
            }
        }
        if self.order.is_binary() {
            for (i, g) in vectors.iter().enumerate() {
                let overlap: u32 = (0..n)
                    .map(|s| u32::from(g.x_exponent(s) & g.z_exponent(s)))
                    .sum();
                if (u32::from(self.phases[i]) + overlap) % 2 != 0 {
                    violations.push(format!(
                        "generator {} squares to −𝟙 with phase exponent {}",
                        i + 1,
                        self.phases[i]
                    ));
                }
            }
        }
        TableauReport { violations }
    }

    /// The submatrix of generator columns belonging to the listed sites
    /// (both interleaved columns per site, sites in the given order).
    pub fn restricted_columns(&self, sites: &[usize]) -> PrimeFieldMatrix {
        let rows: Vec<usize> = (0..self.num_sites()).collect();
        let cols: Vec<usize> = sites
            .iter()
            .flat_map(|&s| [2 * s, 2 * s + 1])
            .collect();
        self.generators.submatrix(&rows, &cols)
    }

    /// Dimension of the subspace of stabilizer vectors supported only on
    /// the given party: `{f ∈ span(generators) : f vanishes off the party}`.
    pub fn local_subspace_dim(&self, partition: &PartyPartition, party: usize) -> usize {
        let complement = partition.complement(party);
        self.num_sites() - self.restricted_columns(&complement).rank()
    }

    /// A basis of the stabilizer vectors that vanish **on** the given party
    /// (the part visible to everyone else); its dimension is
    /// `n − rank(restriction to the party)`.
    pub fn colocal_subspace(
        &self,
        partition: &PartyPartition,
        party: usize,
    ) -> Vec<SymplecticVector> {
        let restricted = self.restricted_columns(partition.party(party));
        let kernel_rows = restricted.left_kernel();
        (0..kernel_rows.rows())
            .map(|r| {
                let coeff = kernel_rows.submatrix(&[r], &(0..self.num_sites()).collect::<Vec<_>>());
                let combo = coeff.mul(&self.generators);
                let entries: Vec<u8> = (0..combo.cols()).map(|c| combo.get(0, c)).collect();
                SymplecticVector::from_entries(self.order, entries)
            })
            .collect()
    }

    /// `log_d` of the rank of the reduced density matrix on the party:
    /// `|party| − local_subspace_dim`.
    pub fn reduced_rank_exponent(&self, partition: &PartyPartition, party: usize) -> usize {
        partition.party(party).len() - self.local_subspace_dim(partition, party)
    }

    /// Converts to the serialization shape.
    pub fn to_dto(&self) -> TableauDto {
        TableauDto {
            n: self.num_sites(),
            d: self.order.order(),
            generators: (0..self.num_sites())
                .map(|i| {
                    (0..self.generators.cols())
                        .map(|c| self.generators.get(i, c))
                        .collect()
                })
                .collect(),
            phases: self.phases.clone(),
        }
    }

    /// Rebuilds from the serialization shape, checking declared sizes.
    pub fn from_dto(dto: &TableauDto) -> Result<Self, StabilizerError> {
        let order = FieldOrder::new(dto.d)?;
        if dto.generators.len() != dto.n {
            return Err(StabilizerError::Malformed(format!(
                "declared n = {} but {} generator rows",
                dto.n,
                dto.generators.len()
            )));
        }
        let rows: Vec<Vec<i64>> = dto
            .generators
            .iter()
            .map(|r| r.iter().map(|&v| i64::from(v)).collect())
            .collect();
        let generators = if dto.n == 0 {
            PrimeFieldMatrix::zeros(0, 0, order)
        } else {
            PrimeFieldMatrix::from_rows(order, &rows)?
        };
        if generators.cols() != 2 * dto.n {
            return Err(StabilizerError::Malformed(format!(
                "generator rows must have {} entries, got {}",
                2 * dto.n,
                generators.cols()
            )));
        }
        Self::new(generators, dto.phases.clone())
    }

    /// Serializes to the JSON form `{n, d, generators, phases}`.
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_dto()).expect("tableau serialization")
    }

    /// Parses the JSON form.
    pub fn from_json_str(text: &str) -> Result<Self, StabilizerError> {
        let dto: TableauDto = serde_json::from_str(text)
            .map_err(|e| StabilizerError::Malformed(format!("bad tableau JSON: {e}")))?;
        Self::from_dto(&dto)
    }
}

/// A multigraph on `n` sites: symmetric adjacency matrix over `Z_d` with
/// zero diagonal, entries being edge multiplicities.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct GraphAdjacency {
    matrix: PrimeFieldMatrix,
}

/// One step of a party-local graph rewrite sequence.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum LceMove {
    /// Local complementation at a site (multiplicity-1 flavour; for
    /// `d = 2` the classic rule toggling all edges among the neighbours).
    Complement {
        /// The pivot site (0-indexed).
        site: usize,
    },
    /// Scaling all multiplicities incident to a site (`d ≥ 3` only).
    EdgeMultiply {
        /// The site whose incident edges are scaled.
        site: usize,
        /// Nonzero scale factor.
        factor: u8,
    },
    /// Shifting one edge multiplicity; both endpoints must share a party.
    Toggle {
        /// First endpoint (0-indexed).
        i: usize,
        /// Second endpoint (0-indexed).
        j: usize,
        /// Multiplicity shift.
        delta: u8,
    },
}

impl GraphAdjacency {
    /// The edgeless graph.
    pub fn empty(n: usize, order: FieldOrder) -> Self {
        GraphAdjacency {
            matrix: PrimeFieldMatrix::zeros(n, n, order),
        }
    }

    /// Wraps an adjacency matrix, validating symmetry and zero diagonal.
    pub fn from_matrix(matrix: PrimeFieldMatrix) -> Result<Self, StabilizerError> {
        if matrix.rows() != matrix.cols() || !matrix.is_symmetric() {
            return Err(StabilizerError::NotAdjacency);
        }
        for i in 0..matrix.rows() {
            if matrix.get(i, i) != 0 {
                return Err(StabilizerError::NotAdjacency);
            }
        }
        Ok(GraphAdjacency { matrix })
    }

    /// Builds from unit-multiplicity edges (0-indexed endpoints).
    pub fn from_edges(
        n: usize,
        order: FieldOrder,
        edges: &[(usize, usize)],
    ) -> Result<Self, StabilizerError> {
        let weighted: Vec<(usize, usize, u8)> =
            edges.iter().map(|&(i, j)| (i, j, 1)).collect();
        Self::from_weighted_edges(n, order, &weighted)
    }

    /// Builds from weighted edges `(i, j, multiplicity)` (0-indexed);
    /// repeated pairs accumulate.
    pub fn from_weighted_edges(
        n: usize,
        order: FieldOrder,
        edges: &[(usize, usize, u8)],
    ) -> Result<Self, StabilizerError> {
        let mut g = Self::empty(n, order);
        for &(i, j, m) in edges {
            g = g.toggle_edge(i, j, m)?;
        }
        Ok(g)
    }

    /// The path `1 – 2 – … – n`.
    pub fn path(n: usize, order: FieldOrder) -> Self {
        let edges: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
        Self::from_edges(n, order, &edges).expect("path edges are valid")
    }

    /// The star with centre at site `0`.
    pub fn star(n: usize, order: FieldOrder) -> Self {
        let edges: Vec<(usize, usize)> = (1..n).map(|i| (0, i)).collect();
        Self::from_edges(n, order, &edges).expect("star edges are valid")
    }

    /// The complete graph with unit multiplicities.
    pub fn complete(n: usize, order: FieldOrder) -> Self {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                edges.push((i, j));
            }
        }
        Self::from_edges(n, order, &edges).expect("complete-graph edges are valid")
    }

    /// A uniformly random (multi)graph: independent uniform multiplicities
    /// on every site pair.
    pub fn random(n: usize, order: FieldOrder, rng: &mut impl rand::Rng) -> Self {
        let mut g = Self::empty(n, order);
        for i in 0..n {
            for j in (i + 1)..n {
                let m = rng.gen_range(0..order.order()) as u8;
                if m != 0 {
                    g = g.toggle_edge(i, j, m).expect("distinct sites in range");
                }
            }
        }
        g
    }

    /// Site count.
    pub fn num_sites(&self) -> usize {
        self.matrix.rows()
    }

    /// The field of the multiplicities.
    pub fn order(&self) -> FieldOrder {
        self.matrix.order()
    }

    /// The adjacency matrix.
    pub fn matrix(&self) -> &PrimeFieldMatrix {
        &self.matrix
    }

    /// Edges `(i, j, multiplicity)` with `i < j`, lexicographic.
    pub fn edges(&self) -> Vec<(usize, usize, u8)> {
        let n = self.num_sites();
        let mut out = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let m = self.matrix.get(i, j);
                if m != 0 {
                    out.push((i, j, m));
                }
            }
        }
        out
    }

    /// The stabilizer state of the graph: generator `i` is
    /// `X_i ⊗ Π_j Z_j^{Γ_ij}`, all phases trivial.
    pub fn graph_state(&self) -> StabilizerTableau {
        let n = self.num_sites();
        let order = self.order();
        let generators = PrimeFieldMatrix::from_fn(n, 2 * n, order, |r, c| {
            let site = c / 2;
            if c % 2 == 0 {
                u8::from(site == r)
            } else {
                self.matrix.get(r, site)
            }
        });
        StabilizerTableau::new(generators, vec![0; n]).expect("graph tableau shape")
    }

    fn check_site(&self, v: usize) -> Result<(), StabilizerError> {
        if v >= self.num_sites() {
            Err(StabilizerError::SiteOutOfRange(v))
        } else {
            Ok(())
        }
    }

    /// Local complementation at `v` for `d = 2`: toggles every edge among
    /// the neighbours of `v`. Involutive.
    pub fn local_complement(&self, v: usize) -> Result<Self, StabilizerError> {
        if !self.order().is_binary() {
            return Err(StabilizerError::WrongOrder {
                required: "order 2",
                got: self.order().order(),
            });
        }
        self.complement_with_factor(v, 1)
    }

    /// The multiplicity-weighted complementation at `v` for `d ≥ 3`:
    /// `Γ → Γ + a·(Γ_v Γ_vᵀ with zero diagonal)`.
    pub fn qudit_local_complement(&self, v: usize, a: u8) -> Result<Self, StabilizerError> {
        if self.order().is_binary() {
            return Err(StabilizerError::WrongOrder {
                required: "order ≥ 3",
                got: 2,
            });
        }
        self.complement_with_factor(v, a)
    }

    fn complement_with_factor(&self, v: usize, a: u8) -> Result<Self, StabilizerError> {
        self.check_site(v)?;
        let d = self.order();
        let n = self.num_sites();
        let mut m = self.matrix.clone();
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let w = d.mul(a, d.mul(self.matrix.get(v, i), self.matrix.get(v, j)));
                m.set(i, j, d.add(m.get(i, j), w));
            }
        }
        Ok(GraphAdjacency { matrix: m })
    }

    /// Scales every multiplicity incident to `v` by the nonzero factor `b`
    /// (`d ≥ 3`).
    pub fn qudit_edge_multiply(&self, v: usize, b: u8) -> Result<Self, StabilizerError> {
        if self.order().is_binary() {
            return Err(StabilizerError::WrongOrder {
                required: "order ≥ 3",
                got: 2,
            });
        }
        self.check_site(v)?;
        let d = self.order();
        if b % d.order() as u8 == 0 {
            return Err(StabilizerError::ZeroFactor);
        }
        let n = self.num_sites();
        let mut m = self.matrix.clone();
        for i in 0..n {
            if i != v {
                m.set(v, i, d.mul(self.matrix.get(v, i), b));
                m.set(i, v, m.get(v, i));
            }
        }
        Ok(GraphAdjacency { matrix: m })
    }

    /// Shifts the multiplicity of edge `{i, j}` by `delta` (mod `d`).
    pub fn toggle_edge(&self, i: usize, j: usize, delta: u8) -> Result<Self, StabilizerError> {
        self.check_site(i)?;
        self.check_site(j)?;
        if i == j {
            return Err(StabilizerError::SelfLoop(i));
        }
        let d = self.order();
        let mut m = self.matrix.clone();
        m.set(i, j, d.add(m.get(i, j), delta));
        m.set(j, i, m.get(i, j));
        Ok(GraphAdjacency { matrix: m })
    }

    /// Applies a move sequence left to right; every toggle must stay
    /// inside one party, while complementations and edge multiplications
    /// are single-site and always permitted.
    pub fn apply_lce_sequence(
        &self,
        partition: &PartyPartition,
        moves: &[LceMove],
    ) -> Result<Self, StabilizerError> {
        let mut g = self.clone();
        for mv in moves {
            g = match *mv {
                LceMove::Complement { site } => {
                    if g.order().is_binary() {
                        g.local_complement(site)?
                    } else {
                        g.qudit_local_complement(site, 1)?
                    }
                }
                LceMove::EdgeMultiply { site, factor } => {
                    g.qudit_edge_multiply(site, factor)?
                }
                LceMove::Toggle { i, j, delta } => {
                    g.check_site(i)?;
                    g.check_site(j)?;
                    if i != j && partition.site_party(i) != partition.site_party(j) {
                        return Err(StabilizerError::CrossPartyToggle { i, j });
                    }
                    g.toggle_edge(i, j, delta)?
                }
            };
        }
        Ok(g)
    }

    /// Renders one `"i j m"` line per edge (1-indexed, multiplicity 1
    /// written without the third column).
    pub fn edge_list_string(&self) -> String {
        self.edges()
            .iter()
            .map(|&(i, j, m)| {
                if m == 1 {
                    format!("{} {}", i + 1, j + 1)
                } else {
                    format!("{} {} {}", i + 1, j + 1, m)
                }
            })
            .collect::<Vec<_>>()
            .join("\n")
    }

    /// Parses edge lines (`"i j"` or `"i j m"`, 1-indexed; blank lines
    /// skipped) into a graph on `n` sites.
    pub fn from_edge_lines(
        n: usize,
        order: FieldOrder,
        text: &str,
    ) -> Result<Self, StabilizerError> {
        let mut edges = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 2 && toks.len() != 3 {
                return Err(StabilizerError::EdgeParse {
                    line: idx + 1,
                    reason: format!("expected 'i j' or 'i j m', got '{line}'"),
                });
            }
            let parse = |t: &str| -> Result<usize, StabilizerError> {
                t.parse().map_err(|_| StabilizerError::EdgeParse {
                    line: idx + 1,
                    reason: format!("not a number: '{t}'"),
                })
            };
            let i = parse(toks[0])?;
            let j = parse(toks[1])?;
            let m = if toks.len() == 3 { parse(toks[2])? } else { 1 };
            if i == 0 || j == 0 || i > n || j > n {
                return Err(StabilizerError::EdgeParse {
                    line: idx + 1,
                    reason: format!("site out of range 1…{n}"),
                });
            }
            edges.push((i - 1, j - 1, (m % order.order() as usize) as u8));
        }
        Self::from_weighted_edges(n, order, &edges)
    }
}
