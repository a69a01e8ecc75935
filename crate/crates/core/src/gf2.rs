//! Exact linear algebra over the two-element field.
//!
//! Bit-packed vectors and row-major matrices with word-level XOR, AND and
//! popcount. Everything downstream (validation, enumerators, code search)
//! reduces to these primitives, so the inner loops here are the ones that
//! matter for performance.
//!
//! All values are immutable after construction from the caller's point of
//! view and safe to share across threads. Row reduction always picks the
//! leftmost available pivot, so bases and solutions are reproducible
//! across runs.

use std::fmt;

use thiserror::Error;

/// Errors raised by span enumeration.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum Gf2Error {
    /// The requested span has more generators than the configured limit
    /// allows (2^rank visits would be needed).
    #[error("span rank {rank} exceeds enumeration limit {limit}")]
    LimitExceeded { rank: usize, limit: usize },
}

/// Default cap on the rank of spans that may be exhaustively enumerated.
pub const SPAN_LIMIT: usize = 28;

const WORD_BITS: usize = 64;

fn word_count(len: usize) -> usize {
    len.div_ceil(WORD_BITS)
}

/// A vector over F2, bit-packed into 64-bit words.
///
/// Bit `i` lives at `words[i / 64]`, position `i % 64`. Bits past `len`
/// are kept zero so that equality, hashing and popcount work on whole
/// words.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    /// Zero vector of the given length.
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; word_count(len)],
        }
    }

    /// Builds a vector from an iterator of bits.
    pub fn from_bits<I: IntoIterator<Item = bool>>(len: usize, bits: I) -> Self {
        let mut v = Self::zeros(len);
        for (i, b) in bits.into_iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    /// Builds a vector with ones exactly at the given indices.
    pub fn from_indices<I: IntoIterator<Item = usize>>(len: usize, indices: I) -> Self {
        let mut v = Self::zeros(len);
        for i in indices {
            v.set(i, true);
        }
        v
    }

    /// Parses a string of `0`/`1` characters; single spaces are allowed
    /// between digits.
    pub fn parse(s: &str) -> Option<Self> {
        let bits: Vec<bool> = s
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '0' => Some(false),
                '1' => Some(true),
                _ => None,
            })
            .collect::<Option<_>>()?;
        Some(Self::from_bits(bits.len(), bits))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// # Panics
    /// Panics if `i >= len`.
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range (len={})", self.len);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    /// # Panics
    /// Panics if `i >= len`.
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range (len={})", self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range (len={})", self.len);
        self.words[i / WORD_BITS] ^= 1u64 << (i % WORD_BITS);
    }

    /// Hamming weight.
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// XOR-assign (addition over F2).
    ///
    /// # Panics
    /// Panics if lengths differ.
    pub fn xor_assign(&mut self, other: &Self) {
        assert_eq!(self.len, other.len, "xor length mismatch");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &Self) -> Self {
        let mut r = self.clone();
        r.xor_assign(other);
        r
    }

    /// |u · v|: the size of the common support.
    pub fn and_weight(&self, other: &Self) -> usize {
        assert_eq!(self.len, other.len, "and length mismatch");
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// Inner product over F2: parity of the common support.
    pub fn inner(&self, other: &Self) -> bool {
        self.and_weight(other) % 2 == 1
    }

    /// Index of the lowest set bit, if any.
    pub fn first_one(&self) -> Option<usize> {
        for (wi, &w) in self.words.iter().enumerate() {
            if w != 0 {
                return Some(wi * WORD_BITS + w.trailing_zeros() as usize);
            }
        }
        None
    }

    /// Iterator over set bit indices in ascending order.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let base = wi * WORD_BITS;
            OnesIter { word: w, base }
        })
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }

    /// Lexicographic comparison over bits in index order (bit 0 first,
    /// 0 sorts before 1). Used for deterministic tie-breaking.
    pub fn lex_cmp(&self, other: &Self) -> std::cmp::Ordering {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter().zip(&other.words) {
            if a != b {
                let diff = a ^ b;
                let bit = diff.trailing_zeros();
                let a_bit = (a >> bit) & 1;
                return a_bit.cmp(&((b >> bit) & 1));
            }
        }
        std::cmp::Ordering::Equal
    }
}

struct OnesIter {
    word: u64,
    base: usize,
}

impl Iterator for OnesIter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.word == 0 {
            return None;
        }
        let bit = self.word.trailing_zeros() as usize;
        self.word &= self.word - 1;
        Some(self.base + bit)
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            write!(f, "{}", u8::from(self.get(i)))?;
        }
        Ok(())
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// A binary matrix stored as bit-packed rows of equal length.
#[derive(Clone, PartialEq, Eq)]
pub struct BitMatrix {
    rows: Vec<BitVec>,
    cols: usize,
}

impl BitMatrix {
    /// Matrix with no rows and the given column count.
    pub fn empty(cols: usize) -> Self {
        Self { rows: Vec::new(), cols }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows: (0..rows).map(|_| BitVec::zeros(cols)).collect(),
            cols,
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.rows[i].set(i, true);
        }
        m
    }

    /// # Panics
    /// Panics if rows have unequal lengths.
    pub fn from_rows(rows: Vec<BitVec>) -> Self {
        let cols = rows.first().map_or(0, BitVec::len);
        for r in &rows {
            assert_eq!(r.len(), cols, "rows must share a common length");
        }
        Self { rows, cols }
    }

    /// Builds from nested bit literals; handy in tests.
    pub fn from_bit_rows(rows: &[&[u8]]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| BitVec::from_bits(r.len(), r.iter().map(|&b| b != 0)))
                .collect(),
        )
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn col_count(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &BitVec {
        &self.rows[i]
    }

    pub fn rows(&self) -> impl Iterator<Item = &BitVec> {
        self.rows.iter()
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].get(c)
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        self.rows[r].set(c, value);
    }

    /// # Panics
    /// Panics if the row length does not match (unless the matrix is
    /// still empty with zero columns).
    pub fn push_row(&mut self, row: BitVec) {
        if self.rows.is_empty() && self.cols == 0 {
            self.cols = row.len();
        }
        assert_eq!(row.len(), self.cols, "row length mismatch");
        self.rows.push(row);
    }

    /// Column `c` extracted as a vector of length `row_count`.
    pub fn column(&self, c: usize) -> BitVec {
        BitVec::from_bits(self.rows.len(), self.rows.iter().map(|r| r.get(c)))
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.cols, self.rows.len());
        for (i, row) in self.rows.iter().enumerate() {
            for j in row.ones() {
                t.rows[j].set(i, true);
            }
        }
        t
    }

    /// Stacks `self` atop `other`.
    pub fn vstack(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!(self.cols, other.cols, "column count mismatch");
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().cloned());
        BitMatrix { rows, cols: self.cols }
    }

    /// Matrix-vector product `M v` over F2.
    pub fn mul_vec(&self, v: &BitVec) -> BitVec {
        assert_eq!(v.len(), self.cols, "dimension mismatch");
        BitVec::from_bits(self.rows.len(), self.rows.iter().map(|r| r.inner(v)))
    }

    /// Rank over F2.
    pub fn rank(&self) -> usize {
        Echelon::reduce(self.clone()).rank()
    }

    /// Basis of `{v : M v = 0}` as matrix rows; row count is
    /// `cols - rank`.
    pub fn nullspace(&self) -> BitMatrix {
        let ech = Echelon::reduce(self.clone());
        let mut is_pivot = vec![false; self.cols];
        for &p in &ech.pivot_cols {
            is_pivot[p] = true;
        }
        let mut basis = Vec::with_capacity(self.cols - ech.pivot_cols.len());
        for free in 0..self.cols {
            if is_pivot[free] {
                continue;
            }
            // Back-substitute with this free variable set to 1. Rows are in
            // reduced echelon form, so each pivot variable reads straight
            // off its row.
            let mut v = BitVec::zeros(self.cols);
            v.set(free, true);
            for (ri, &pc) in ech.pivot_cols.iter().enumerate() {
                if ech.matrix.rows[ri].get(free) {
                    v.set(pc, true);
                }
            }
            basis.push(v);
        }
        BitMatrix {
            rows: basis,
            cols: self.cols,
        }
    }

    /// True if `v` lies in the row span.
    pub fn span_contains(&self, v: &BitVec) -> bool {
        assert_eq!(v.len(), self.cols);
        let r0 = self.rank();
        let mut aug = self.clone();
        aug.push_row(v.clone());
        aug.rank() == r0
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix({}x{})", self.rows.len(), self.cols)?;
        for r in &self.rows {
            writeln!(f, "  {r:?}")?;
        }
        Ok(())
    }
}

/// Reduced row echelon form with the pivot columns that produced it.
///
/// Pivot selection is deterministic (leftmost nonzero column at each
/// step), so two reductions of equal matrices agree bit for bit.
pub struct Echelon {
    pub matrix: BitMatrix,
    pub pivot_cols: Vec<usize>,
}

impl Echelon {
    pub fn reduce(mut m: BitMatrix) -> Self {
        let rows = m.rows.len();
        let cols = m.cols;
        let mut pivot_cols = Vec::new();
        let mut next_row = 0;
        for col in 0..cols {
            if next_row == rows {
                break;
            }
            let Some(pivot) = (next_row..rows).find(|&r| m.rows[r].get(col)) else {
                continue;
            };
            m.rows.swap(next_row, pivot);
            let pivot_row = m.rows[next_row].clone();
            for (r, row) in m.rows.iter_mut().enumerate() {
                if r != next_row && row.get(col) {
                    row.xor_assign(&pivot_row);
                }
            }
            pivot_cols.push(col);
            next_row += 1;
        }
        Self { matrix: m, pivot_cols }
    }

    pub fn rank(&self) -> usize {
        self.pivot_cols.len()
    }

    /// The nonzero rows, which form a canonical basis of the row space.
    pub fn basis(&self) -> BitMatrix {
        BitMatrix {
            rows: self.matrix.rows[..self.pivot_cols.len()].to_vec(),
            cols: self.matrix.cols,
        }
    }
}

/// Complete solution set of a linear system `A x = b` over F2:
/// `particular` plus any sum of `nullspace_basis` rows.
#[derive(Clone, Debug)]
pub struct AffineSolution {
    pub particular: BitVec,
    pub nullspace_basis: BitMatrix,
}

impl AffineSolution {
    /// Number of solutions is `2^dimension`.
    pub fn dimension(&self) -> usize {
        self.nullspace_basis.row_count()
    }

    /// The member selected by one coefficient bit per basis vector.
    pub fn member(&self, coeffs: &BitVec) -> BitVec {
        assert_eq!(coeffs.len(), self.dimension());
        let mut v = self.particular.clone();
        for i in coeffs.ones() {
            v.xor_assign(self.nullspace_basis.row(i));
        }
        v
    }
}

/// Solves `A x = b` over F2. Returns `None` when `b` is outside the
/// column-reachable space (an infeasible system, not a fault).
///
/// # Panics
/// Panics if `b` does not have one entry per row of `A`.
pub fn solve_affine(a: &BitMatrix, b: &BitVec) -> Option<AffineSolution> {
    assert_eq!(
        a.row_count(),
        b.len(),
        "right-hand side length must equal the row count"
    );
    let cols = a.col_count();
    // Eliminate on [A | b].
    let mut aug = BitMatrix::empty(cols + 1);
    for (i, row) in a.rows().enumerate() {
        let mut r = BitVec::zeros(cols + 1);
        for j in row.ones() {
            r.set(j, true);
        }
        r.set(cols, b.get(i));
        aug.push_row(r);
    }
    let ech = Echelon::reduce(aug);
    if ech.pivot_cols.last() == Some(&cols) {
        return None; // a row reads 0...0 | 1
    }
    let mut particular = BitVec::zeros(cols);
    for (ri, &pc) in ech.pivot_cols.iter().enumerate() {
        if ech.matrix.rows[ri].get(cols) {
            particular.set(pc, true);
        }
    }
    Some(AffineSolution {
        particular,
        nullspace_basis: a.nullspace(),
    })
}

/// Visits every vector in the row span of `generators` exactly once.
///
/// The visit order is a Gray-code walk over an independent basis, so each
/// step XORs a single basis row. Returns the number of vectors visited,
/// which is `2^rank`.
pub fn span_enumerate<F: FnMut(&BitVec)>(
    generators: &BitMatrix,
    limit: usize,
    mut visit: F,
) -> Result<u64, Gf2Error> {
    let basis = Echelon::reduce(generators.clone()).basis();
    let r = basis.row_count();
    if r > limit {
        return Err(Gf2Error::LimitExceeded { rank: r, limit });
    }
    let mut current = BitVec::zeros(generators.col_count());
    visit(&current);
    let total: u64 = 1 << r;
    for i in 1..total {
        // Gray code: step i flips basis row trailing_zeros(i).
        let flip = i.trailing_zeros() as usize;
        current.xor_assign(basis.row(flip));
        visit(&current);
    }
    Ok(total)
}

/// Matrix text format: one row per line of `0`/`1` characters (single
/// spaces allowed), `#` starts a comment, and an optional blank line
/// separates the odd-weight block from the even-weight block. Returns
/// the parsed rows; block structure is recomputed from row parities by
/// the callers that need it.
pub fn parse_matrix_text(text: &str) -> Result<BitMatrix, String> {
    let mut rows: Vec<BitVec> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue; // blank separator or comment-only line
        }
        let row = BitVec::parse(line)
            .ok_or_else(|| format!("line {}: expected only '0'/'1' characters", lineno + 1))?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(format!(
                    "line {}: row length {} differs from {}",
                    lineno + 1,
                    row.len(),
                    first.len()
                ));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err("no matrix rows found".into());
    }
    Ok(BitMatrix::from_rows(rows))
}

/// Renders rows in the text format, inserting a blank line after the
/// first `k` rows when both blocks are nonempty.
pub fn format_matrix_text(m: &BitMatrix, k: usize) -> String {
    let mut out = String::new();
    for (i, row) in m.rows().enumerate() {
        if i == k && i > 0 && i < m.row_count() {
            out.push('\n');
        }
        out.push_str(&row.to_string());
        out.push('\n');
    }
    out
}
