//! Shared fixtures and independent oracles for the integration suites.
//!
//! The oracles here deliberately avoid the library's decision procedures:
//! ranks are measured by counting the row span element by element, and
//! congruence / splitting questions over four generators at order two are
//! settled by scanning the whole invertible group in a bit-packed
//! representation. The suites compare the library's answers against these.

#![allow(dead_code)]

use plckit::field::{FieldOrder, PrimeFieldMatrix};
use plckit::stabilizer::GraphAdjacency;
use plckit::symplectic::PartyPartition;
use plckit::CommutationTuple;
use rand::Rng;
use std::collections::HashSet;

pub fn d2() -> FieldOrder {
    FieldOrder::TWO
}

pub fn d3() -> FieldOrder {
    FieldOrder::THREE
}

pub fn d5() -> FieldOrder {
    FieldOrder::new(5).unwrap()
}

pub fn m(order: FieldOrder, rows: &[Vec<i64>]) -> PrimeFieldMatrix {
    PrimeFieldMatrix::from_rows(order, rows).unwrap()
}

// ---------------------------------------------------------------------------
// Reference states and their frozen commutation tuples
// ---------------------------------------------------------------------------

/// Two-site maximally entangled pair, one site per party.
pub fn bell_tuple() -> CommutationTuple {
    let g = GraphAdjacency::from_edges(2, d2(), &[(0, 1)]).unwrap();
    let p = PartyPartition::consecutive(&[1, 1]).unwrap();
    CommutationTuple::from_state(&g.graph_state(), &p).unwrap()
}

/// Three-site GHZ state (path graph), one site per party.
pub fn ghz3_tuple() -> CommutationTuple {
    let g = GraphAdjacency::path(3, d2());
    let p = PartyPartition::consecutive(&[1, 1, 1]).unwrap();
    CommutationTuple::from_state(&g.graph_state(), &p).unwrap()
}

/// Generator basis change that sends the GHZ tuple to its hollow twin.
pub fn ghz3_basis_change() -> PrimeFieldMatrix {
    m(d2(), &[vec![1, 0, 0], vec![0, 1, 0], vec![0, 1, 1]])
}

/// Four-site weighted qutrit graph with one doubled edge.
pub fn qutrit_four_site_graph() -> GraphAdjacency {
    GraphAdjacency::from_weighted_edges(4, d3(), &[(0, 1, 1), (0, 3, 1), (2, 3, 2)]).unwrap()
}

/// Four alternating 8×8 matrices whose joint rank equals half the rank sum
/// even though they do not sum to zero — the fixture that forces the rank
/// decision to check the zero-sum precondition rather than ranks alone.
pub fn eight_site_family() -> Vec<PrimeFieldMatrix> {
    let edges: [&[(usize, usize)]; 4] = [
        &[(0, 1), (3, 4), (4, 5)],
        &[(0, 1), (1, 2), (4, 5), (5, 6)],
        &[(1, 2), (2, 3), (5, 6), (6, 7)],
        &[(0, 6), (2, 4)],
    ];
    edges
        .iter()
        .map(|e| {
            GraphAdjacency::from_edges(8, d2(), e)
                .unwrap()
                .matrix()
                .clone()
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Random instance generation
// ---------------------------------------------------------------------------

/// Random graph state with a random partition: the standard source of valid
/// commutation tuples.
pub fn random_state_tuple(
    n: usize,
    parties: usize,
    order: FieldOrder,
    rng: &mut impl Rng,
) -> (GraphAdjacency, PartyPartition, CommutationTuple) {
    let graph = GraphAdjacency::random(n, order, rng);
    let partition = PartyPartition::random(n, parties, rng).unwrap();
    let tuple = CommutationTuple::from_state(&graph.graph_state(), &partition).unwrap();
    (graph, partition, tuple)
}

/// Random family of alternating matrices that sums to zero without being a
/// commutation tuple of any state in general.
pub fn random_zero_sum_family(
    n: usize,
    members: usize,
    order: FieldOrder,
    rng: &mut impl Rng,
) -> Vec<PrimeFieldMatrix> {
    assert!(members >= 2);
    let mut family: Vec<PrimeFieldMatrix> = (0..members - 1)
        .map(|_| PrimeFieldMatrix::random_alternating(n, order, rng))
        .collect();
    let sum = family
        .iter()
        .skip(1)
        .fold(family[0].clone(), |acc, mat| acc.add(mat));
    family.push(sum.neg());
    family
}

/// Random tree on `n` sites with the given edge weights drawn from
/// `1..order`; returned as (weighted graph, parent list).
pub fn random_weighted_tree(
    n: usize,
    order: FieldOrder,
    rng: &mut impl Rng,
) -> (GraphAdjacency, Vec<usize>) {
    assert!(n >= 2);
    let mut parents = vec![0usize; n];
    let mut edges = Vec::with_capacity(n - 1);
    for child in 1..n {
        let parent = rng.gen_range(0..child);
        parents[child] = parent;
        let weight = rng.gen_range(1..order.order()) as u8;
        edges.push((parent, child, weight));
    }
    (
        GraphAdjacency::from_weighted_edges(n, order, &edges).unwrap(),
        parents,
    )
}

// ---------------------------------------------------------------------------
// Independent rank oracle: count the row span
// ---------------------------------------------------------------------------

/// Rank via the size of the row span, grown one row at a time. Exponential
/// in the rank, so only for small matrices — which is the point: it shares
/// no code with the elimination-based rank.
pub fn span_rank(mat: &PrimeFieldMatrix) -> usize {
    let d = mat.order().order() as usize;
    let cols = mat.cols();
    let mut span: HashSet<Vec<u8>> = HashSet::new();
    span.insert(vec![0u8; cols]);
    for r in 0..mat.rows() {
        let row: Vec<u8> = (0..cols).map(|c| mat.get(r, c)).collect();
        let existing: Vec<Vec<u8>> = span.iter().cloned().collect();
        for base in existing {
            for k in 1..d {
                let combo: Vec<u8> = (0..cols)
                    .map(|c| {
                        let scaled = (k * row[c] as usize) % d;
                        ((base[c] as usize + scaled) % d) as u8
                    })
                    .collect();
                span.insert(combo);
            }
        }
    }
    let mut rank = 0usize;
    let mut size = span.len();
    while size > 1 {
        assert_eq!(size % d, 0, "span size must be a power of the order");
        size /= d;
        rank += 1;
    }
    rank
}

// ---------------------------------------------------------------------------
// Bit-packed 4×4 oracle over the two-element field
// ---------------------------------------------------------------------------
//
// A 4×4 matrix over Z_2 is sixteen bits: bit 4·r + c holds entry (r, c).
// These helpers share nothing with `PrimeFieldMatrix`, so scanning all
// 20160 invertible matrices gives a genuinely independent referee for the
// congruence and splitting procedures.

pub type Packed4 = u16;

pub fn pack4(mat: &PrimeFieldMatrix) -> Packed4 {
    assert_eq!(mat.rows(), 4);
    assert_eq!(mat.cols(), 4);
    assert_eq!(mat.order().order(), 2);
    let mut bits: Packed4 = 0;
    for r in 0..4 {
        for c in 0..4 {
            if mat.get(r, c) == 1 {
                bits |= 1 << (4 * r + c);
            }
        }
    }
    bits
}

fn row4(mat: Packed4, r: usize) -> u16 {
    (mat >> (4 * r)) & 0xF
}

pub fn mul4(a: Packed4, b: Packed4) -> Packed4 {
    let mut out: Packed4 = 0;
    for r in 0..4 {
        let mut acc: u16 = 0;
        let ar = row4(a, r);
        for k in 0..4 {
            if ar & (1 << k) != 0 {
                acc ^= row4(b, k);
            }
        }
        out |= acc << (4 * r);
    }
    out
}

pub fn transpose4(a: Packed4) -> Packed4 {
    let mut out: Packed4 = 0;
    for r in 0..4 {
        for c in 0..4 {
            if a & (1 << (4 * r + c)) != 0 {
                out |= 1 << (4 * c + r);
            }
        }
    }
    out
}

fn invertible4(a: Packed4) -> bool {
    // Gaussian elimination on the four nibble rows.
    let mut rows = [row4(a, 0), row4(a, 1), row4(a, 2), row4(a, 3)];
    let mut pivot_row = 0usize;
    for col in 0..4 {
        let hit = (pivot_row..4).find(|&r| rows[r] & (1 << col) != 0);
        let Some(hit) = hit else { continue };
        rows.swap(pivot_row, hit);
        for r in 0..4 {
            if r != pivot_row && rows[r] & (1 << col) != 0 {
                rows[r] ^= rows[pivot_row];
            }
        }
        pivot_row += 1;
    }
    pivot_row == 4
}

/// All 20160 invertible 4×4 matrices over Z_2.
pub fn all_invertible4() -> Vec<Packed4> {
    (0u32..=0xFFFF)
        .map(|bits| bits as Packed4)
        .filter(|&bits| invertible4(bits))
        .collect()
}

/// Q·A·Qᵀ in packed form.
pub fn congruence4(q: Packed4, a: Packed4) -> Packed4 {
    mul4(mul4(q, a), transpose4(q))
}

/// Does some invertible Q map every member of `a` onto the corresponding
/// member of `b` by congruence? Exhaustive over the whole group.
pub fn brute_force_congruent(a: &[Packed4], b: &[Packed4], group: &[Packed4]) -> bool {
    assert_eq!(a.len(), b.len());
    group.iter().any(|&q| {
        a.iter()
            .zip(b)
            .all(|(&ai, &bi)| congruence4(q, ai) == bi)
    })
}

/// Is every off-diagonal block at the row/column cut `k` zero?
fn block_split_at4(a: Packed4, k: usize) -> bool {
    let low_mask: u16 = (1 << k) - 1;
    for r in 0..4 {
        let row = row4(a, r);
        if r < k {
            if row & !low_mask & 0xF != 0 {
                return false;
            }
        } else if row & low_mask != 0 {
            return false;
        }
    }
    true
}

/// Does some invertible Q block-diagonalize every member of `a`
/// simultaneously at some proper cut? Exhaustive over the whole group.
pub fn brute_force_splittable(a: &[Packed4], group: &[Packed4]) -> bool {
    group.iter().any(|&q| {
        let images: Vec<Packed4> = a.iter().map(|&ai| congruence4(q, ai)).collect();
        (1..4).any(|k| images.iter().all(|&img| block_split_at4(img, k)))
    })
}
