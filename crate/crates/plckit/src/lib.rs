//! Toolkit for party-local Clifford (PLC) analysis of prime-dimensional
//! stabilizer states.
//!
//! A stabilizer state on `n` sites of local dimension `d` (a prime) is
//! described by `n` commuting Pauli generators, each of which restricts to a
//! tensor factor on every party of a partition of the sites. Recording the
//! symplectic form of those restrictions for every pair of generators yields
//! one alternating matrix per party — the state's *commutation tuple*. Two
//! states are PLC-equivalent exactly when their tuples are related by a
//! simultaneous congruence `C_α ↦ Q·C_α·Qᵀ`, and a state factorizes into a
//! tensor product exactly when one `Q` block-diagonalizes all matrices at
//! once. This crate implements that formalism end to end:
//!
//! * [`field`] — exact linear algebra over `Z_d` (bit-packed for `d = 2`),
//! * [`symplectic`] — phase-space vectors, party partitions, the form `ω`,
//! * [`stabilizer`] — tableaux, graph states, and graph moves,
//! * [`commutation`] — commutation tuples, rank tests, normal forms, and
//!   state synthesis from a tuple,
//! * [`equivalence`] — congruence decisions, self-adjoint endomorphism rings,
//!   Fitting splits, full decompositions, and tripartite canonical counts,
//! * [`egs`] — entanglement-generating-set searches over graph-state
//!   enumerations, the spiral family, and the two-site Clifford coset check.
//!
//! Decision procedures that search (congruence, splitting, enumeration) are
//! budgeted and tri-state: they answer definitely-yes with a verified
//! witness, definitely-no only after an exhaustive argument, and
//! "inconclusive" otherwise. All randomness is seeded explicitly; identical
//! inputs, seeds, and budgets give identical outputs.

pub mod commutation;
pub mod egs;
pub mod equivalence;
pub mod field;
pub mod stabilizer;
pub mod symplectic;

pub use commutation::CommutationTuple;
pub use egs::{EgsReport, PartyConfiguration};
pub use equivalence::{EquivalenceVerdict, SearchLimits, SplitVerdict};
pub use field::{FieldOrder, PrimeFieldMatrix};
pub use stabilizer::{GraphAdjacency, StabilizerTableau};
pub use symplectic::{PartyPartition, SymplecticVector};
