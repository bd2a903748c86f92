//! Exact linear algebra over the prime fields `Z_d`.
//!
//! Everything downstream — symplectic forms, commutation matrices, congruence
//! searches — reduces to row reduction, kernels, and inverses over a prime
//! field. [`PrimeFieldMatrix`] stores `d = 2` matrices with bit-packed rows
//! (one `u64` word per 64 columns, row operations are word-wise XOR) and
//! `d ≥ 3` matrices densely as bytes. All algorithms are exact; there is no
//! floating point anywhere in this crate.

use rand::Rng;
use thiserror::Error;

/// Largest prime that fits the `u8` entry representation.
const MAX_ORDER: u64 = 251;

/// Errors from field and matrix constructors.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum FieldError {
    /// The requested field order is not a prime number.
    #[error("field order {0} is not prime")]
    NotPrime(u64),
    /// The requested field order does not fit the entry representation.
    #[error("field order {0} exceeds the supported maximum {MAX_ORDER}")]
    TooLarge(u64),
    /// A row of input data had the wrong length.
    #[error("row {row} has {got} entries, expected {expected}")]
    RaggedRow {
        /// Index of the offending row.
        row: usize,
        /// Number of entries found.
        got: usize,
        /// Number of entries required.
        expected: usize,
    },
    /// An exhaustive enumeration was requested over too large a space.
    #[error("enumeration space of {space} matrices exceeds the budget {budget}")]
    EnumerationTooLarge {
        /// Number of matrices that would have to be visited.
        space: u128,
        /// Maximum allowed.
        budget: u128,
    },
}

/// A prime field order `d`, validated at construction.
///
/// Doubles as the scalar-arithmetic context: all `Z_d` operations on `u8`
/// values go through this type so reductions modulo `d` are never forgotten.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct FieldOrder(u8);

impl FieldOrder {
    /// The binary field `Z_2`.
    pub const TWO: FieldOrder = FieldOrder(2);
    /// The ternary field `Z_3`.
    pub const THREE: FieldOrder = FieldOrder(3);

    /// Validates `d` as a supported prime field order.
    pub fn new(d: u64) -> Result<Self, FieldError> {
        if d > MAX_ORDER {
            return Err(FieldError::TooLarge(d));
        }
        if !is_prime(d) {
            return Err(FieldError::NotPrime(d));
        }
        Ok(FieldOrder(d as u8))
    }

    /// The order `d` as an integer.
    pub fn order(self) -> u64 {
        u64::from(self.0)
    }

    /// True exactly for `d = 2`, the bit-packed case.
    pub fn is_binary(self) -> bool {
        self.0 == 2
    }

    /// Reduces an arbitrary signed integer into `{0, …, d−1}`.
    pub fn reduce(self, v: i64) -> u8 {
        let d = i64::from(self.0);
        (v.rem_euclid(d)) as u8
    }

    /// Addition in `Z_d`.
    pub fn add(self, a: u8, b: u8) -> u8 {
        ((u16::from(a) + u16::from(b)) % u16::from(self.0)) as u8
    }

    /// Subtraction in `Z_d`.
    pub fn sub(self, a: u8, b: u8) -> u8 {
        self.add(a, self.neg(b))
    }

    /// Multiplication in `Z_d`.
    pub fn mul(self, a: u8, b: u8) -> u8 {
        ((u16::from(a) * u16::from(b)) % u16::from(self.0)) as u8
    }

    /// Additive inverse in `Z_d`.
    pub fn neg(self, a: u8) -> u8 {
        if a == 0 {
            0
        } else {
            self.0 - (a % self.0)
        }
    }

    /// Multiplicative inverse in `Z_d`; `None` for zero.
    pub fn inv(self, a: u8) -> Option<u8> {
        let a = a % self.0;
        if a == 0 {
            return None;
        }
        // Fermat: a^(d−2) mod d. The exponent is tiny, repeated squaring is
        // overkill but harmless.
        let mut acc: u8 = 1;
        let mut base = a;
        let mut e = u32::from(self.0) - 2;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        Some(acc)
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= n {
        if n % k == 0 {
            return false;
        }
        k += 1;
    }
    true
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
enum Storage {
    /// `d = 2`: each row is `words_per_row` u64 words, bit `c` of the row is
    /// entry `c`. Bits beyond `cols` are kept zero so `PartialEq` is
    /// structural equality of matrices.
    Packed { words_per_row: usize, words: Vec<u64> },
    /// `d ≥ 3`: row-major bytes, each in `{0, …, d−1}`.
    Dense(Vec<u8>),
}

/// A dense matrix over `Z_d` with exact arithmetic.
///
/// Rows and columns are 0-indexed. Shape mismatches in arithmetic are
/// programming errors and panic; fallible operations (inversion, solving)
/// return `Option`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct PrimeFieldMatrix {
    rows: usize,
    cols: usize,
    order: FieldOrder,
    storage: Storage,
}

/// Row reduction output: `transform · input = reduced`, with `reduced` in
/// reduced row-echelon form and `transform` invertible.
#[derive(Clone, Debug)]
pub struct RowReduction {
    /// The reduced row-echelon form.
    pub reduced: PrimeFieldMatrix,
    /// Number of nonzero rows of `reduced`.
    pub rank: usize,
    /// Invertible matrix with `transform · input = reduced`.
    pub transform: PrimeFieldMatrix,
    /// Pivot column of each of the first `rank` rows, strictly increasing.
    pub pivot_cols: Vec<usize>,
}

/// Output of [`PrimeFieldMatrix::solve`]: one particular solution plus a
/// basis of the homogeneous kernel, so the full solution set is
/// `particular + span(kernel columns)`.
#[derive(Clone, Debug)]
pub struct LinearSolution {
    /// One solution `X` of `A·X = B`.
    pub particular: PrimeFieldMatrix,
    /// Columns form a basis of `{x : A·x = 0}`.
    pub kernel: PrimeFieldMatrix,
}

impl PrimeFieldMatrix {
    /// The all-zero `rows × cols` matrix.
    pub fn zeros(rows: usize, cols: usize, order: FieldOrder) -> Self {
        let storage = if order.is_binary() {
            let wpr = cols.div_ceil(64);
            Storage::Packed {
                words_per_row: wpr,
                words: vec![0; rows * wpr],
            }
        } else {
            Storage::Dense(vec![0; rows * cols])
        };
        PrimeFieldMatrix {
            rows,
            cols,
            order,
            storage,
        }
    }

    /// The `n × n` identity.
    pub fn identity(n: usize, order: FieldOrder) -> Self {
        let mut m = Self::zeros(n, n, order);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    /// Builds a matrix from row data, reducing each entry modulo `d` (so
    /// literals like `-1` denote `d − 1`).
    pub fn from_rows(order: FieldOrder, rows: &[Vec<i64>]) -> Result<Self, FieldError> {
        let cols = rows.first().map_or(0, Vec::len);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(FieldError::RaggedRow {
                    row: i,
                    got: r.len(),
                    expected: cols,
                });
            }
        }
        let mut m = Self::zeros(rows.len(), cols, order);
        for (i, r) in rows.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                m.set(i, j, order.reduce(v));
            }
        }
        Ok(m)
    }

    /// Builds a matrix by evaluating `f` at every position.
    pub fn from_fn(
        rows: usize,
        cols: usize,
        order: FieldOrder,
        mut f: impl FnMut(usize, usize) -> u8,
    ) -> Self {
        let mut m = Self::zeros(rows, cols, order);
        for i in 0..rows {
            for j in 0..cols {
                let v = f(i, j) % order.0;
                if v != 0 {
                    m.set(i, j, v);
                }
            }
        }
        m
    }

    /// Number of rows.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of columns.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// The field the entries live in.
    pub fn order(&self) -> FieldOrder {
        self.order
    }

    /// Entry at `(r, c)`.
    ///
    /// # Panics
    /// If the position is out of range.
    pub fn get(&self, r: usize, c: usize) -> u8 {
        assert!(r < self.rows && c < self.cols, "index ({r}, {c}) out of range");
        match &self.storage {
            Storage::Packed {
                words_per_row,
                words,
            } => ((words[r * words_per_row + c / 64] >> (c % 64)) & 1) as u8,
            Storage::Dense(data) => data[r * self.cols + c],
        }
    }

    /// Sets the entry at `(r, c)` to `v mod d`.
    ///
    /// # Panics
    /// If the position is out of range.
    pub fn set(&mut self, r: usize, c: usize, v: u8) {
        assert!(r < self.rows && c < self.cols, "index ({r}, {c}) out of range");
        let v = v % self.order.0;
        let cols = self.cols;
        match &mut self.storage {
            Storage::Packed {
                words_per_row,
                words,
            } => {
                let w = &mut words[r * *words_per_row + c / 64];
                let bit = 1u64 << (c % 64);
                if v == 1 {
                    *w |= bit;
                } else {
                    *w &= !bit;
                }
            }
            Storage::Dense(data) => data[r * cols + c] = v,
        }
    }

    /// The matrix as plain row data, for serialization and display.
    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// True if every entry is zero.
    pub fn is_zero(&self) -> bool {
        match &self.storage {
            Storage::Packed { words, .. } => words.iter().all(|&w| w == 0),
            Storage::Dense(data) => data.iter().all(|&v| v == 0),
        }
    }

    /// True if the matrix is square with `A = Aᵀ`.
    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows)
                .all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// True if the matrix is alternating: square, zero diagonal, and
    /// `A[i][j] = −A[j][i]`. Over `Z_2` this is symmetry with zero diagonal.
    pub fn is_alternating(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| self.get(i, i) == 0)
            && (0..self.rows)
                .all(|i| (0..i).all(|j| self.get(i, j) == self.order.neg(self.get(j, i))))
    }

    /// Entrywise sum.
    ///
    /// # Panics
    /// On shape or field mismatch.
    pub fn add(&self, other: &Self) -> Self {
        self.zip_entries(other, |d, a, b| d.add(a, b))
    }

    /// Entrywise difference.
    ///
    /// # Panics
    /// On shape or field mismatch.
    pub fn sub(&self, other: &Self) -> Self {
        self.zip_entries(other, |d, a, b| d.sub(a, b))
    }

    fn zip_entries(&self, other: &Self, f: impl Fn(FieldOrder, u8, u8) -> u8) -> Self {
        assert_eq!(self.order, other.order, "field mismatch");
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "shape mismatch"
        );
        if let (
            Storage::Packed { words: a, .. },
            Storage::Packed {
                words: b,
                words_per_row,
            },
        ) = (&self.storage, &other.storage)
        {
            // Over Z_2 both addition and subtraction are XOR.
            let words = a.iter().zip(b.iter()).map(|(&x, &y)| x ^ y).collect();
            return PrimeFieldMatrix {
                rows: self.rows,
                cols: self.cols,
                order: self.order,
                storage: Storage::Packed {
                    words_per_row: *words_per_row,
                    words,
                },
            };
        }
        Self::from_fn(self.rows, self.cols, self.order, |i, j| {
            f(self.order, self.get(i, j), other.get(i, j))
        })
    }

    /// Entrywise additive inverse.
    pub fn neg(&self) -> Self {
        Self::from_fn(self.rows, self.cols, self.order, |i, j| {
            self.order.neg(self.get(i, j))
        })
    }

    /// Scales every entry by `k`.
    pub fn scale(&self, k: u8) -> Self {
        Self::from_fn(self.rows, self.cols, self.order, |i, j| {
            self.order.mul(self.get(i, j), k)
        })
    }

    /// Matrix product `self · rhs`.
    ///
    /// # Panics
    /// On inner-dimension or field mismatch.
    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.order, rhs.order, "field mismatch");
        assert_eq!(self.cols, rhs.rows, "inner dimension mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols, self.order);
        match (&self.storage, &rhs.storage, &mut out.storage) {
            (
                Storage::Packed { .. },
                Storage::Packed {
                    words_per_row: rhs_wpr,
                    words: rhs_words,
                },
                Storage::Packed {
                    words_per_row: out_wpr,
                    words: out_words,
                },
            ) => {
                // Accumulate XORs of rhs rows selected by the bits of each
                // self row: word-parallel over the output columns.
                for i in 0..self.rows {
                    let out_row = &mut out_words[i * *out_wpr..(i + 1) * *out_wpr];
                    for k in 0..self.cols {
                        if self.get(i, k) == 1 {
                            let rhs_row = &rhs_words[k * *rhs_wpr..(k + 1) * *rhs_wpr];
                            for (o, &r) in out_row.iter_mut().zip(rhs_row) {
                                *o ^= r;
                            }
                        }
                    }
                }
            }
            _ => {
                for i in 0..self.rows {
                    for k in 0..self.cols {
                        let a = self.get(i, k);
                        if a == 0 {
                            continue;
                        }
                        for j in 0..rhs.cols {
                            let v = self.order.add(out.get(i, j), self.order.mul(a, rhs.get(k, j)));
                            out.set(i, j, v);
                        }
                    }
                }
            }
        }
        out
    }

    /// The transpose.
    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, self.order, |i, j| self.get(j, i))
    }

    /// Horizontal concatenation `[self | others…]`.
    ///
    /// # Panics
    /// If row counts or fields differ.
    pub fn concat_cols(parts: &[&Self]) -> Self {
        assert!(!parts.is_empty(), "nothing to concatenate");
        let rows = parts[0].rows;
        let order = parts[0].order;
        assert!(
            parts.iter().all(|p| p.rows == rows && p.order == order),
            "row count or field mismatch"
        );
        let cols: usize = parts.iter().map(|p| p.cols).sum();
        let mut out = Self::zeros(rows, cols, order);
        let mut offset = 0;
        for p in parts {
            for i in 0..rows {
                for j in 0..p.cols {
                    let v = p.get(i, j);
                    if v != 0 {
                        out.set(i, offset + j, v);
                    }
                }
            }
            offset += p.cols;
        }
        out
    }

    /// Block-diagonal direct sum of the given matrices.
    pub fn direct_sum(parts: &[&Self]) -> Self {
        assert!(!parts.is_empty(), "nothing to sum");
        let order = parts[0].order;
        assert!(parts.iter().all(|p| p.order == order), "field mismatch");
        let rows: usize = parts.iter().map(|p| p.rows).sum();
        let cols: usize = parts.iter().map(|p| p.cols).sum();
        let mut out = Self::zeros(rows, cols, order);
        let (mut ro, mut co) = (0, 0);
        for p in parts {
            for i in 0..p.rows {
                for j in 0..p.cols {
                    let v = p.get(i, j);
                    if v != 0 {
                        out.set(ro + i, co + j, v);
                    }
                }
            }
            ro += p.rows;
            co += p.cols;
        }
        out
    }

    /// The submatrix selecting the given rows and columns, in order.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), self.order, |i, j| {
            self.get(rows[i], cols[j])
        })
    }

    /// Reduced row-echelon form with the invertible row transform.
    pub fn row_reduce(&self) -> RowReduction {
        let mut reduced = self.clone();
        let mut transform = Self::identity(self.rows, self.order);
        let mut pivot_cols = Vec::new();
        let mut pivot_row = 0;
        for col in 0..self.cols {
            if pivot_row == self.rows {
                break;
            }
            let Some(src) = (pivot_row..self.rows).find(|&r| reduced.get(r, col) != 0) else {
                continue;
            };
            reduced.swap_rows(pivot_row, src);
            transform.swap_rows(pivot_row, src);
            let inv = self
                .order
                .inv(reduced.get(pivot_row, col))
                .expect("pivot is nonzero");
            if inv != 1 {
                reduced.scale_row(pivot_row, inv);
                transform.scale_row(pivot_row, inv);
            }
            for r in 0..self.rows {
                if r != pivot_row {
                    let factor = reduced.get(r, col);
                    if factor != 0 {
                        let neg = self.order.neg(factor);
                        reduced.add_scaled_row(pivot_row, r, neg);
                        transform.add_scaled_row(pivot_row, r, neg);
                    }
                }
            }
            pivot_cols.push(col);
            pivot_row += 1;
        }
        RowReduction {
            reduced,
            rank: pivot_row,
            transform,
            pivot_cols,
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        match &mut self.storage {
            Storage::Packed {
                words_per_row,
                words,
            } => {
                for k in 0..*words_per_row {
                    words.swap(a * *words_per_row + k, b * *words_per_row + k);
                }
            }
            Storage::Dense(data) => {
                for k in 0..self.cols {
                    data.swap(a * self.cols + k, b * self.cols + k);
                }
            }
        }
    }

    fn scale_row(&mut self, r: usize, k: u8) {
        if k == 1 {
            return;
        }
        for c in 0..self.cols {
            let v = self.order.mul(self.get(r, c), k);
            self.set(r, c, v);
        }
    }

    /// `row dst += k · row src`.
    fn add_scaled_row(&mut self, src: usize, dst: usize, k: u8) {
        if k == 0 {
            return;
        }
        match &mut self.storage {
            Storage::Packed {
                words_per_row,
                words,
            } if k == 1 => {
                let wpr = *words_per_row;
                for w in 0..wpr {
                    let s = words[src * wpr + w];
                    words[dst * wpr + w] ^= s;
                }
            }
            _ => {
                for c in 0..self.cols {
                    let v = self
                        .order
                        .add(self.get(dst, c), self.order.mul(k, self.get(src, c)));
                    self.set(dst, c, v);
                }
            }
        }
    }

    /// The rank over `Z_d`.
    pub fn rank(&self) -> usize {
        // Forward elimination on a scratch copy, no transform bookkeeping.
        let mut work = self.clone();
        let mut rank = 0;
        for col in 0..self.cols {
            if rank == self.rows {
                break;
            }
            let Some(src) = (rank..self.rows).find(|&r| work.get(r, col) != 0) else {
                continue;
            };
            work.swap_rows(rank, src);
            let inv = self.order.inv(work.get(rank, col)).expect("pivot nonzero");
            if inv != 1 {
                work.scale_row(rank, inv);
            }
            for r in rank + 1..self.rows {
                let factor = work.get(r, col);
                if factor != 0 {
                    work.add_scaled_row(rank, r, self.order.neg(factor));
                }
            }
            rank += 1;
        }
        rank
    }

    /// The inverse, or `None` if the matrix is singular or non-square.
    pub fn invert(&self) -> Option<Self> {
        if self.rows != self.cols {
            return None;
        }
        let red = self.row_reduce();
        (red.rank == self.rows).then_some(red.transform)
    }

    /// True if square and full-rank.
    pub fn is_invertible(&self) -> bool {
        self.rows == self.cols && self.rank() == self.rows
    }

    /// Solves `self · X = rhs`, returning a particular solution and a kernel
    /// basis, or `None` if the system is inconsistent.
    ///
    /// # Panics
    /// If `rhs` has a different row count or field.
    pub fn solve(&self, rhs: &Self) -> Option<LinearSolution> {
        assert_eq!(self.order, rhs.order, "field mismatch");
        assert_eq!(self.rows, rhs.rows, "row count mismatch");
        let red = self.row_reduce();
        let reduced_rhs = red.transform.mul(rhs);
        // Rows of the reduced system beyond the rank read 0 = rhs; any
        // nonzero entry there means no solution.
        for r in red.rank..self.rows {
            for c in 0..rhs.cols {
                if reduced_rhs.get(r, c) != 0 {
                    return None;
                }
            }
        }
        let mut particular = Self::zeros(self.cols, rhs.cols, self.order);
        for (r, &pc) in red.pivot_cols.iter().enumerate() {
            for c in 0..rhs.cols {
                let v = reduced_rhs.get(r, c);
                if v != 0 {
                    particular.set(pc, c, v);
                }
            }
        }
        Some(LinearSolution {
            particular,
            kernel: kernel_from_reduction(&red, self.cols, self.order),
        })
    }

    /// A matrix whose columns form a basis of `{x : self · x = 0}`.
    pub fn kernel(&self) -> Self {
        kernel_from_reduction(&self.row_reduce(), self.cols, self.order)
    }

    /// A matrix whose rows form a basis of `{y : y · self = 0}`.
    pub fn left_kernel(&self) -> Self {
        let red = self.row_reduce();
        // Transform rows past the rank map the input to zero rows, are
        // independent (the transform is invertible), and count m − rank: a
        // full basis of the left kernel.
        let tail: Vec<usize> = (red.rank..self.rows).collect();
        let all_cols: Vec<usize> = (0..self.rows).collect();
        red.transform.submatrix(&tail, &all_cols)
    }

    /// Extends the rows of `self` (assumed independent) to a basis of the
    /// full row space `Z_d^cols`, returning an invertible `cols × cols`
    /// matrix whose first `self.rows` rows are the rows of `self`.
    ///
    /// # Panics
    /// If the rows of `self` are linearly dependent.
    pub fn extend_rows_to_basis(&self) -> Self {
        assert_eq!(self.rank(), self.rows, "rows are not independent");
        let red = self.row_reduce();
        let mut rows: Vec<Vec<i64>> = self
            .to_rows()
            .into_iter()
            .map(|r| r.into_iter().map(i64::from).collect())
            .collect();
        let pivots: std::collections::HashSet<usize> = red.pivot_cols.iter().copied().collect();
        for c in 0..self.cols {
            if !pivots.contains(&c) {
                let mut e = vec![0i64; self.cols];
                e[c] = 1;
                rows.push(e);
            }
        }
        let full = Self::from_rows(self.order, &rows).expect("consistent row lengths");
        debug_assert!(full.is_invertible());
        full
    }

    /// Iterator over every `rows × cols` matrix over `Z_d`, in lexicographic
    /// entry order (row-major, entry 0 fastest… last entry slowest).
    pub fn enumerate_all(
        rows: usize,
        cols: usize,
        order: FieldOrder,
    ) -> impl Iterator<Item = PrimeFieldMatrix> {
        let total = (rows * cols) as u32;
        let d = order.order() as u128;
        let space = d.checked_pow(total).expect("enumeration space overflows");
        (0..space).map(move |idx| {
            let mut m = PrimeFieldMatrix::zeros(rows, cols, order);
            let mut rem = idx;
            for i in 0..rows {
                for j in 0..cols {
                    m.set(i, j, (rem % d) as u8);
                    rem /= d;
                }
            }
            m
        })
    }

    /// Iterator over all invertible `n × n` matrices over `Z_d`, by
    /// filtering the full enumeration; errors when the space exceeds
    /// `budget` candidates.
    pub fn enumerate_invertible(
        n: usize,
        order: FieldOrder,
        budget: u128,
    ) -> Result<impl Iterator<Item = PrimeFieldMatrix>, FieldError> {
        let d = order.order() as u128;
        let space = d
            .checked_pow((n * n) as u32)
            .ok_or(FieldError::EnumerationTooLarge {
                space: u128::MAX,
                budget,
            })?;
        if space > budget {
            return Err(FieldError::EnumerationTooLarge { space, budget });
        }
        Ok(Self::enumerate_all(n, n, order).filter(|m| m.is_invertible()))
    }

    /// A uniformly random matrix.
    pub fn random(rows: usize, cols: usize, order: FieldOrder, rng: &mut impl Rng) -> Self {
        Self::from_fn(rows, cols, order, |_, _| {
            rng.gen_range(0..order.order()) as u8
        })
    }

    /// A uniformly random invertible matrix, by rejection sampling.
    pub fn random_invertible(n: usize, order: FieldOrder, rng: &mut impl Rng) -> Self {
        loop {
            let m = Self::random(n, n, order, rng);
            if m.is_invertible() {
                return m;
            }
        }
    }

    /// A uniformly random alternating matrix: zero diagonal, lower triangle
    /// the negated mirror of a random upper triangle.
    pub fn random_alternating(n: usize, order: FieldOrder, rng: &mut impl Rng) -> Self {
        let upper = Self::from_fn(n, n, order, |i, j| {
            if i < j {
                rng.gen_range(0..order.order()) as u8
            } else {
                0
            }
        });
        let m = upper.sub(&upper.transpose());
        debug_assert!(m.is_alternating());
        m
    }
}

fn kernel_from_reduction(
    red: &RowReduction,
    cols: usize,
    order: FieldOrder,
) -> PrimeFieldMatrix {
    // One basis vector per free column: set that free variable to 1 and read
    // the pivot variables off the reduced rows (negated).
    let pivots = &red.pivot_cols;
    let free_cols: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    let mut kernel = PrimeFieldMatrix::zeros(cols, free_cols.len(), order);
    for (k, &fc) in free_cols.iter().enumerate() {
        kernel.set(fc, k, 1);
        for (r, &pc) in pivots.iter().enumerate() {
            let v = red.reduced.get(r, fc);
            if v != 0 {
                kernel.set(pc, k, order.neg(v));
            }
        }
    }
    kernel
}

impl std::fmt::Display for PrimeFieldMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for i in 0..self.rows {
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
