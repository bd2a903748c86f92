//! Pauli operators modulo phase as symplectic vectors, party partitions of
//! sites, and the symplectic form `ω`.
//!
//! A Pauli operator on `n` sites of dimension `d` is, up to phase, a vector
//! in `Z_d^{2n}`: site `i` contributes the pair `(a_i, b_i)` meaning
//! `X^{a_i} Z^{b_i}` on that site, stored interleaved as
//! `(a_1, b_1, …, a_n, b_n)`. Two Pauli operators commute up to the scalar
//! `η^{ω(f,g)}` where `ω(f, g) = Σ_i (b_i a'_i − a_i b'_i) mod d`; for
//! `d = 2` this is the familiar symmetric form `Σ_i (a_i b'_i + a'_i b_i)`.

use crate::field::{FieldOrder, PrimeFieldMatrix};
use thiserror::Error;

/// Errors from partition construction and parsing.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum PartitionError {
    /// A party had no sites.
    #[error("party {0} is empty")]
    EmptyParty(usize),
    /// A site appeared in two parties.
    #[error("site {0} appears in more than one party")]
    DuplicateSite(usize),
    /// A 1-indexed site reference was 0 or larger than the site count.
    #[error("site index {0} out of range")]
    SiteOutOfRange(usize),
    /// The parties did not cover every site.
    #[error("sites are not fully covered: {missing} of {n} missing")]
    IncompleteCover {
        /// How many sites are unassigned.
        missing: usize,
        /// Total sites.
        n: usize,
    },
    /// Text input that is not a partition expression.
    #[error("cannot parse partition: {0}")]
    Unparseable(String),
}

/// Mismatched operands (different site counts or field orders).
#[derive(Debug, Error, PartialEq, Eq)]
#[error("operands disagree: {0}")]
pub struct MismatchError(pub String);

/// A Pauli operator modulo phase: interleaved exponents
/// `(a_1, b_1, …, a_n, b_n)` over `Z_d`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct SymplecticVector {
    order: FieldOrder,
    entries: Vec<u8>,
}

impl SymplecticVector {
    /// The zero vector (the identity operator) on `n` sites.
    pub fn zero(n: usize, order: FieldOrder) -> Self {
        SymplecticVector {
            order,
            entries: vec![0; 2 * n],
        }
    }

    /// Builds a vector from interleaved entries; the length must be even.
    ///
    /// # Panics
    /// On odd length.
    pub fn from_entries(order: FieldOrder, entries: Vec<u8>) -> Self {
        assert!(entries.len() % 2 == 0, "interleaved layout has even length");
        let entries = entries
            .into_iter()
            .map(|v| v % order.order() as u8)
            .collect();
        SymplecticVector { order, entries }
    }

    /// Number of sites `n`.
    pub fn num_sites(&self) -> usize {
        self.entries.len() / 2
    }

    /// The field of the exponents.
    pub fn order(&self) -> FieldOrder {
        self.order
    }

    /// The `X` exponent `a_i` at site `i`.
    pub fn x_exponent(&self, site: usize) -> u8 {
        self.entries[2 * site]
    }

    /// The `Z` exponent `b_i` at site `i`.
    pub fn z_exponent(&self, site: usize) -> u8 {
        self.entries[2 * site + 1]
    }

    /// Sets the exponent pair at a site.
    pub fn set_site(&mut self, site: usize, a: u8, b: u8) {
        let d = self.order.order() as u8;
        self.entries[2 * site] = a % d;
        self.entries[2 * site + 1] = b % d;
    }

    /// The raw interleaved entries.
    pub fn entries(&self) -> &[u8] {
        &self.entries
    }

    /// True for the identity operator.
    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&v| v == 0)
    }

    /// Entrywise sum (operator product up to phase).
    ///
    /// # Panics
    /// On length or field mismatch.
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.order, other.order, "field mismatch");
        assert_eq!(self.entries.len(), other.entries.len(), "length mismatch");
        SymplecticVector {
            order: self.order,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| self.order.add(a, b))
                .collect(),
        }
    }

    /// Entrywise scaling (operator power up to phase).
    pub fn scale(&self, k: u8) -> Self {
        SymplecticVector {
            order: self.order,
            entries: self.entries.iter().map(|&v| self.order.mul(v, k)).collect(),
        }
    }

    /// Sites where the exponent pair is nonzero, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.num_sites())
            .filter(|&i| self.x_exponent(i) != 0 || self.z_exponent(i) != 0)
            .collect()
    }

    /// The restriction to the listed sites, as a vector over those sites in
    /// the given order.
    ///
    /// # Panics
    /// On an out-of-range site.
    pub fn restrict(&self, sites: &[usize]) -> Self {
        let mut entries = Vec::with_capacity(2 * sites.len());
        for &s in sites {
            entries.push(self.x_exponent(s));
            entries.push(self.z_exponent(s));
        }
        SymplecticVector {
            order: self.order,
            entries,
        }
    }

    /// The restriction to the listed sites kept at full length: exponents
    /// outside the sites are zeroed in place.
    pub fn restrict_zeroed(&self, sites: &[usize]) -> Self {
        let mut out = Self::zero(self.num_sites(), self.order);
        for &s in sites {
            out.set_site(s, self.x_exponent(s), self.z_exponent(s));
        }
        out
    }

    /// Parties (by index) on which the vector acts non-trivially.
    pub fn party_support(&self, partition: &PartyPartition) -> Vec<usize> {
        (0..partition.party_count())
            .filter(|&p| {
                partition
                    .party(p)
                    .iter()
                    .any(|&s| self.x_exponent(s) != 0 || self.z_exponent(s) != 0)
            })
            .collect()
    }
}

/// The symplectic form `ω(f, g) = Σ_i (b_i a'_i − a_i b'_i) mod d`.
///
/// Over `Z_2` the signs vanish and this is the symmetric commutation form;
/// for odd `d` it is antisymmetric. In both characteristics
/// `η^{ω(f,g)}` (with `η` the primitive `d`-th root used by the `Z`
/// operator, `η = −1` for `d = 2`) is the scalar by which the two Pauli
/// operators fail to commute.
///
/// # Panics
/// On length or field mismatch.
pub fn omega(f: &SymplecticVector, g: &SymplecticVector) -> u8 {
    assert_eq!(f.order(), g.order(), "field mismatch");
    assert_eq!(f.num_sites(), g.num_sites(), "site count mismatch");
    let d = f.order();
    let mut acc = 0u8;
    for i in 0..f.num_sites() {
        let term = d.sub(
            d.mul(f.z_exponent(i), g.x_exponent(i)),
            d.mul(f.x_exponent(i), g.z_exponent(i)),
        );
        acc = d.add(acc, term);
    }
    acc
}

/// The form `ω` as an explicit Gram matrix in the interleaved layout, one
/// `[[0, −1], [1, 0]]` block per site (over `Z_2`: `[[0, 1], [1, 0]]`).
///
/// `ω(f, g) = fᵀ · gram · g` as a matrix product of the entry vectors.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct SymplecticForm {
    /// The field order.
    pub order: FieldOrder,
    /// Number of sites.
    pub sites: usize,
}

impl SymplecticForm {
    /// The `2n × 2n` Gram matrix of the form.
    pub fn gram(&self) -> PrimeFieldMatrix {
        let mut g = PrimeFieldMatrix::zeros(2 * self.sites, 2 * self.sites, self.order);
        for i in 0..self.sites {
            g.set(2 * i, 2 * i + 1, self.order.neg(1));
            g.set(2 * i + 1, 2 * i, 1);
        }
        g
    }

    /// Evaluates the form on two vectors; equals [`omega`].
    pub fn evaluate(&self, f: &SymplecticVector, g: &SymplecticVector) -> u8 {
        omega(f, g)
    }
}

/// An ordered partition of the sites `{0, …, n−1}` into parties.
///
/// Party lists are stored sorted. The strict constructor requires every
/// party to be non-empty; synthesized states may legitimately assign a party
/// zero sites, which [`PartyPartition::with_possibly_empty_parties`] allows.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PartyPartition {
    n: usize,
    parties: Vec<Vec<usize>>,
    site_to_party: Vec<usize>,
}

impl PartyPartition {
    /// Builds a partition of `{0, …, n−1}`; every party must be non-empty,
    /// parties must be disjoint and jointly cover all sites.
    pub fn new(n: usize, parties: Vec<Vec<usize>>) -> Result<Self, PartitionError> {
        for (i, p) in parties.iter().enumerate() {
            if p.is_empty() {
                return Err(PartitionError::EmptyParty(i));
            }
        }
        Self::with_possibly_empty_parties(n, parties)
    }

    /// Like [`PartyPartition::new`] but permits empty parties (used by state
    /// synthesis, where a party can receive zero sites).
    pub fn with_possibly_empty_parties(
        n: usize,
        parties: Vec<Vec<usize>>,
    ) -> Result<Self, PartitionError> {
        let mut site_to_party = vec![usize::MAX; n];
        let mut covered = 0usize;
        for (i, p) in parties.iter().enumerate() {
            for &s in p {
                if s >= n {
                    return Err(PartitionError::SiteOutOfRange(s + 1));
                }
                if site_to_party[s] != usize::MAX {
                    return Err(PartitionError::DuplicateSite(s + 1));
                }
                site_to_party[s] = i;
                covered += 1;
            }
        }
        if covered != n {
            return Err(PartitionError::IncompleteCover {
                missing: n - covered,
                n,
            });
        }
        let parties = parties
            .into_iter()
            .map(|mut p| {
                p.sort_unstable();
                p
            })
            .collect();
        Ok(PartyPartition {
            n,
            parties,
            site_to_party,
        })
    }

    /// A uniformly random partition of `n` sites into `parties` nonempty
    /// parties, by rejection over uniform site assignments.
    pub fn random(
        n: usize,
        parties: usize,
        rng: &mut impl rand::Rng,
    ) -> Result<Self, PartitionError> {
        if parties == 0 || parties > n {
            // More parties than sites (or none) leaves some party empty.
            return Err(PartitionError::EmptyParty(parties.saturating_sub(1)));
        }
        loop {
            let mut groups: Vec<Vec<usize>> = vec![Vec::new(); parties];
            for site in 0..n {
                groups[rng.gen_range(0..parties)].push(site);
            }
            if groups.iter().all(|g| !g.is_empty()) {
                return Self::new(n, groups);
            }
        }
    }

    /// A partition into consecutive blocks of the given sizes:
    /// party 0 gets sites `0 … sizes[0]−1`, and so on.
    pub fn consecutive(sizes: &[usize]) -> Result<Self, PartitionError> {
        let n = sizes.iter().sum();
        let mut parties = Vec::with_capacity(sizes.len());
        let mut next = 0;
        for &s in sizes {
            parties.push((next..next + s).collect());
            next += s;
        }
        Self::new(n, parties)
    }

    /// Total number of sites.
    pub fn num_sites(&self) -> usize {
        self.n
    }

    /// Number of parties `M`.
    pub fn party_count(&self) -> usize {
        self.parties.len()
    }

    /// The sites of party `p`, sorted ascending.
    pub fn party(&self, p: usize) -> &[usize] {
        &self.parties[p]
    }

    /// The party holding `site`.
    pub fn site_party(&self, site: usize) -> usize {
        self.site_to_party[site]
    }

    /// Party sizes in party order.
    pub fn sizes(&self) -> Vec<usize> {
        self.parties.iter().map(Vec::len).collect()
    }

    /// All sites not in party `p`, sorted ascending.
    pub fn complement(&self, p: usize) -> Vec<usize> {
        (0..self.n).filter(|&s| self.site_to_party[s] != p).collect()
    }

    /// Renders the 1-indexed pipe syntax, e.g. `1,2|3|4`.
    pub fn to_compact_string(&self) -> String {
        self.parties
            .iter()
            .map(|p| {
                p.iter()
                    .map(|s| (s + 1).to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect::<Vec<_>>()
            .join("|")
    }

    /// Parses the 1-indexed pipe syntax `"1,2|3|4"` as a partition of
    /// `{1, …, n}` where `n` is the largest site mentioned; all of
    /// `1, …, n` must be covered.
    pub fn parse(text: &str) -> Result<Self, PartitionError> {
        let trimmed = text.trim();
        if trimmed.is_empty() {
            return Err(PartitionError::Unparseable("empty input".into()));
        }
        let mut parties: Vec<Vec<usize>> = Vec::new();
        let mut max_site = 0usize;
        for group in trimmed.split('|') {
            let mut sites = Vec::new();
            for tok in group.split(',') {
                let tok = tok.trim();
                if tok.is_empty() {
                    return Err(PartitionError::Unparseable(format!(
                        "empty site entry in group '{group}'"
                    )));
                }
                let v: usize = tok
                    .parse()
                    .map_err(|_| PartitionError::Unparseable(format!("not a site index: '{tok}'")))?;
                if v == 0 {
                    return Err(PartitionError::SiteOutOfRange(0));
                }
                max_site = max_site.max(v);
                sites.push(v - 1);
            }
            parties.push(sites);
        }
        Self::new(max_site, parties)
    }
}

impl std::str::FromStr for PartyPartition {
    type Err = PartitionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

impl std::fmt::Display for PartyPartition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.to_compact_string())
    }
}
