//! Triorthogonal matrices: validation, structural identities, and the
//! built-in code families.
//!
//! A binary matrix is triorthogonal when every pair and every triple of
//! rows shares a common support of even size. Odd-weight rows must come
//! first; they carry the logical qubits of the induced stabilizer code.

use serde::Serialize;
use thiserror::Error;

use crate::gf2::{BitMatrix, BitVec, Echelon};

#[derive(Debug, Error)]
pub enum OrthoError {
    #[error("matrix is not triorthogonal: {pair_violations} pair and {triple_violations} triple violations")]
    NotTriorthogonal {
        pair_violations: usize,
        triple_violations: usize,
    },
    #[error("odd-weight rows must precede even-weight rows (row {index} breaks the order)")]
    OddRowsNotLeading { index: usize },
    #[error("the block family is defined for even k only (got {k})")]
    OddK { k: usize },
    #[error("unknown builtin matrix name {name:?}")]
    UnknownName { name: String },
    #[error("matrix has no rows")]
    EmptyMatrix,
}

/// Diagnostic result of a triorthogonality check.
///
/// Row and column indices are 0-based; violation lists are sorted
/// lexicographically.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub is_triorthogonal: bool,
    pub pair_violations: Vec<(usize, usize)>,
    pub triple_violations: Vec<(usize, usize, usize)>,
    pub odd_rows: Vec<usize>,
    pub even_rows: Vec<usize>,
    /// Columns that vanish on every even-weight row.
    pub zero_columns_in_g0: Vec<usize>,
}

/// Exhaustively checks all row pairs and triples of `m` for even overlap
/// and classifies rows by weight parity.
pub fn validate(m: &BitMatrix) -> ValidationReport {
    let rows = m.row_count();
    let mut pair_violations = Vec::new();
    let mut triple_violations = Vec::new();
    for a in 0..rows {
        for b in (a + 1)..rows {
            if m.row(a).and_weight(m.row(b)) % 2 != 0 {
                pair_violations.push((a, b));
            }
            let ab: Vec<u64> = m
                .row(a)
                .words()
                .iter()
                .zip(m.row(b).words())
                .map(|(x, y)| x & y)
                .collect();
            for c in (b + 1)..rows {
                let overlap: u32 = ab
                    .iter()
                    .zip(m.row(c).words())
                    .map(|(x, y)| (x & y).count_ones())
                    .sum();
                if overlap % 2 != 0 {
                    triple_violations.push((a, b, c));
                }
            }
        }
    }
    let mut odd_rows = Vec::new();
    let mut even_rows = Vec::new();
    for r in 0..rows {
        if m.row(r).weight() % 2 == 1 {
            odd_rows.push(r);
        } else {
            even_rows.push(r);
        }
    }
    let zero_columns_in_g0 = (0..m.col_count())
        .filter(|&c| even_rows.iter().all(|&r| !m.get(r, c)))
        .collect();
    ValidationReport {
        is_triorthogonal: pair_violations.is_empty() && triple_violations.is_empty(),
        pair_violations,
        triple_violations,
        odd_rows,
        even_rows,
        zero_columns_in_g0,
    }
}

/// A validated triorthogonal matrix with its `k` odd-weight rows first.
#[derive(Debug, Clone)]
pub struct TriorthogonalMatrix {
    matrix: BitMatrix,
    k: usize,
}

impl TriorthogonalMatrix {
    /// Validates `matrix` and checks that odd-weight rows form a prefix.
    pub fn new(matrix: BitMatrix) -> Result<Self, OrthoError> {
        if matrix.row_count() == 0 {
            return Err(OrthoError::EmptyMatrix);
        }
        let report = validate(&matrix);
        if !report.is_triorthogonal {
            return Err(OrthoError::NotTriorthogonal {
                pair_violations: report.pair_violations.len(),
                triple_violations: report.triple_violations.len(),
            });
        }
        let k = report.odd_rows.len();
        // Odd rows must be exactly 0..k.
        if let Some(&index) = report.odd_rows.iter().find(|&&r| r >= k) {
            return Err(OrthoError::OddRowsNotLeading { index });
        }
        Ok(Self { matrix, k })
    }

    pub fn matrix(&self) -> &BitMatrix {
        &self.matrix
    }

    /// Number of odd-weight (logical) rows.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of columns (physical qubits).
    pub fn n(&self) -> usize {
        self.matrix.col_count()
    }

    /// Total row count.
    pub fn m(&self) -> usize {
        self.matrix.row_count()
    }

    /// The even-weight block (rows k..m).
    pub fn g0(&self) -> BitMatrix {
        BitMatrix::from_rows(self.matrix.rows().skip(self.k).cloned().collect())
            .with_cols(self.n())
    }

    /// The odd-weight block (rows 0..k).
    pub fn g1(&self) -> BitMatrix {
        BitMatrix::from_rows(self.matrix.rows().take(self.k).cloned().collect())
            .with_cols(self.n())
    }

    /// Odd-weight row `a` (0-based, `a < k`).
    pub fn logical_row(&self, a: usize) -> &BitVec {
        assert!(a < self.k, "logical row index out of range");
        self.matrix.row(a)
    }

    pub fn text(&self) -> String {
        crate::gf2::format_matrix_text(&self.matrix, self.k)
    }
}

impl BitMatrix {
    /// Fixes the column count of a possibly row-less matrix.
    fn with_cols(mut self, cols: usize) -> BitMatrix {
        if self.row_count() == 0 {
            self = BitMatrix::empty(cols);
        }
        self
    }
}

/// Pass/fail record for the four span identities every triorthogonal
/// matrix satisfies: G1 has full rank, span(G0) meets span(G1) only in 0,
/// span(G0) equals span(G) ∩ span(G)^⊥, and dim(G0^⊥) = k + dim(G^⊥).
#[derive(Debug, Clone, Serialize)]
pub struct StructuralReport {
    pub g1_full_rank: bool,
    pub trivial_intersection: bool,
    pub g0_is_self_dual_part: bool,
    pub dual_dimension_identity: bool,
}

impl StructuralReport {
    pub fn all_pass(&self) -> bool {
        self.g1_full_rank
            && self.trivial_intersection
            && self.g0_is_self_dual_part
            && self.dual_dimension_identity
    }
}

/// Verifies the span identities on a validated matrix.
pub fn structural_check(g: &TriorthogonalMatrix) -> StructuralReport {
    let g0 = g.g0();
    let g1 = g.g1();
    let full = g.matrix();
    let k = g.k();
    let n = g.n();

    let rank_g0 = g0.rank();
    let rank_g1 = g1.rank();
    let rank_g = full.rank();

    let g1_full_rank = rank_g1 == k;
    let trivial_intersection = rank_g0 + rank_g1 == rank_g;

    // span(G) ∩ span(G)^perp: solve (G R^T) c = 0 over the row basis R.
    let basis = Echelon::reduce(full.clone()).basis();
    let mut inner_products = BitMatrix::empty(basis.row_count());
    for row in full.rows() {
        inner_products.push_row(BitVec::from_bits(
            basis.row_count(),
            basis.rows().map(|b| row.inner(b)),
        ));
    }
    let coeffs = inner_products.nullspace();
    let mut intersection = BitMatrix::empty(n);
    for c in coeffs.rows() {
        let mut v = BitVec::zeros(n);
        for i in c.ones() {
            v.xor_assign(basis.row(i));
        }
        intersection.push_row(v);
    }
    let g0_is_self_dual_part = rank_g0 == intersection.rank()
        && g0.vstack(&intersection).rank() == rank_g0;

    let dual_dimension_identity = (n - rank_g0) == k + (n - rank_g);

    StructuralReport {
        g1_full_rank,
        trivial_intersection,
        g0_is_self_dual_part,
        dual_dimension_identity,
    }
}

/// Necessary conditions for the induced protocol to be useful (distance
/// at least 2): the even block needs 3 or more rows and no zero column.
#[derive(Debug, Clone, Serialize)]
pub struct UsefulnessReport {
    pub g0_rows_ok: bool,
    pub no_zero_column_in_g0: bool,
}

pub fn usefulness_check(g: &TriorthogonalMatrix) -> UsefulnessReport {
    let report = validate(g.matrix());
    UsefulnessReport {
        g0_rows_ok: g.m() - g.k() >= 3,
        no_zero_column_in_g0: report.zero_columns_in_g0.is_empty(),
    }
}

// Block pieces of the rate-1/3 family. L fills the shared four columns of
// every odd row pair, M separates the pair members, and S1/S2 make up the
// three even rows.
const L_ROWS: [[u8; 4]; 2] = [[1, 1, 1, 1], [1, 1, 1, 1]];
const M_ROWS: [[u8; 6]; 2] = [[1, 1, 1, 0, 0, 0], [0, 0, 0, 1, 1, 1]];
const S1_ROWS: [[u8; 4]; 3] = [[0, 1, 0, 1], [0, 0, 1, 1], [1, 1, 1, 1]];
const S2_ROWS: [[u8; 6]; 3] = [
    [1, 0, 1, 1, 0, 1],
    [0, 1, 1, 0, 1, 1],
    [0, 0, 0, 0, 0, 0],
];

/// Builds the `(k+3) x (3k+8)` member of the rate-k/(3k+8) family.
///
/// Columns follow the block display left to right: a zero block of width
/// 4 over the odd rows (S1 underneath), the L block of width 4, then k/2
/// groups of width 6 holding M on the diagonal row pair and S2 at the
/// bottom. `k` must be even; `k = 0` degenerates to the 3x8 matrix
/// `[S1 S1]`.
pub fn generate_gk(k: usize) -> Result<TriorthogonalMatrix, OrthoError> {
    if k % 2 != 0 {
        return Err(OrthoError::OddK { k });
    }
    let pairs = k / 2;
    let n = 3 * k + 8;
    let mut rows: Vec<BitVec> = Vec::with_capacity(k + 3);
    for pair in 0..pairs {
        for sub in 0..2 {
            let mut row = BitVec::zeros(n);
            for (j, &bit) in L_ROWS[sub].iter().enumerate() {
                if bit == 1 {
                    row.set(4 + j, true);
                }
            }
            for (j, &bit) in M_ROWS[sub].iter().enumerate() {
                if bit == 1 {
                    row.set(8 + 6 * pair + j, true);
                }
            }
            rows.push(row);
        }
    }
    for sub in 0..3 {
        let mut row = BitVec::zeros(n);
        for (j, &bit) in S1_ROWS[sub].iter().enumerate() {
            if bit == 1 {
                row.set(j, true);
                row.set(4 + j, true);
            }
        }
        for group in 0..pairs {
            for (j, &bit) in S2_ROWS[sub].iter().enumerate() {
                if bit == 1 {
                    row.set(8 + 6 * group + j, true);
                }
            }
        }
        rows.push(row);
    }
    TriorthogonalMatrix::new(BitMatrix::from_rows(rows))
}

// The 13x49 even-weight block of the 49-qubit distance-5 code. Every
// codeword weight is divisible by 8 (a triply-even code), which makes the
// transversal phase correction trivial.
const BH49_G0: [&str; 13] = [
    "1111111111111110101010101010101010101010101010101",
    "0000000000000000000111100110011000011001100110011",
    "0000000000000001100000011001100110000000000000000",
    "0000000000000000000000000000000001111000000001111",
    "0000000000000000011110000000000000000111100000000",
    "0000000000000000000001111000011110000000000000000",
    "0000000000000000000000000111111110000000000000000",
    "0000000000000000000000000000000001111111100000000",
    "0000000000000000000000000000000000000000011111111",
    "1010101010101010000000000000000000000000000000000",
    "0110011001100110000000000000000000000000000000000",
    "0001111000011110000000000000000000000000000000000",
    "0000000111111110000000000000000000000000000000000",
];

fn bh49() -> TriorthogonalMatrix {
    let mut rows = vec![BitVec::from_bits(49, (0..49).map(|_| true))];
    for line in BH49_G0 {
        let row = BitVec::parse(line).expect("valid row literal");
        assert_eq!(row.len(), 49);
        rows.push(row);
    }
    TriorthogonalMatrix::new(BitMatrix::from_rows(rows)).expect("49-qubit matrix is triorthogonal")
}

fn rm15() -> TriorthogonalMatrix {
    let mut rows = vec![BitVec::from_bits(15, (0..15).map(|_| true))];
    for plane in 0..4 {
        rows.push(BitVec::from_bits(15, (1..=15u32).map(|j| (j >> plane) & 1 == 1)));
    }
    TriorthogonalMatrix::new(BitMatrix::from_rows(rows)).expect("15-qubit matrix is triorthogonal")
}

/// Returns a built-in matrix: `"BH49"` (the 14x49 distance-5 code),
/// `"RM15"` (the 5x15 punctured Reed-Muller code), or `"G{k}"` for even
/// `k` (alias for [`generate_gk`]).
pub fn builtin(name: &str) -> Result<TriorthogonalMatrix, OrthoError> {
    match name {
        "BH49" => Ok(bh49()),
        "RM15" => Ok(rm15()),
        _ => {
            if let Some(rest) = name.strip_prefix('G') {
                if let Ok(k) = rest.parse::<usize>() {
                    if k % 2 == 0 {
                        return generate_gk(k);
                    }
                }
            }
            Err(OrthoError::UnknownName { name: name.into() })
        }
    }
}
