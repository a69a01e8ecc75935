//! Search for triorthogonal matrices by solving a linear system over F2.
//!
//! A candidate matrix with `m` rows is described by one binary variable
//! `N_x` per nonzero column pattern `x` (repeated columns never help, so
//! counts stay binary). Pair and triple overlap parities, row-weight
//! parities, and the no-zero-column-in-the-even-block condition are all
//! linear in `N`, so the full solution set is an affine subspace and a
//! minimum-column matrix is a minimum-weight member of it.

use thiserror::Error;

use crate::gf2::{solve_affine, AffineSolution, BitMatrix, BitVec};
use crate::ortho::{OrthoError, TriorthogonalMatrix};
use crate::rng::SplitMix64;

/// Hard cap on the row count; the variable count is `2^m - 1`.
pub const MAX_ROWS: usize = 22;

/// Exhaustive minimum-weight sweeps enumerate `2^dim` solutions.
pub const EXHAUSTIVE_DIM_LIMIT: usize = 26;

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("a useful matrix needs at least 3 even-weight rows: m - k >= 3 (got m = {m}, k = {k})")]
    TooFewEvenRows { m: usize, k: usize },
    #[error("row count {m} exceeds the supported maximum {MAX_ROWS}")]
    TooManyRows { m: usize },
    #[error("the system has no solution")]
    Infeasible,
    #[error("solution space dimension {dim} exceeds the exhaustive limit {EXHAUSTIVE_DIM_LIMIT}")]
    NullspaceTooLarge { dim: usize },
    #[error("the only solution is the zero vector")]
    NoNonzeroSolution,
    #[error("materialized matrix failed validation: {0}")]
    ValidationFailed(#[from] OrthoError),
    #[error("solution has no columns")]
    NoColumns,
}

/// Binary indicator of which column patterns appear in the matrix.
///
/// Bit `x - 1` holds `N_x` for the pattern whose integer value is `x`
/// (row `a` of the column is bit `a - 1` of `x`); the all-zero pattern is
/// excluded outright.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnCountVector {
    m: usize,
    bits: BitVec,
}

impl ColumnCountVector {
    pub fn from_bits(m: usize, bits: BitVec) -> Self {
        assert_eq!(bits.len(), (1usize << m) - 1);
        Self { m, bits }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of columns of the matrix this vector describes.
    pub fn weight(&self) -> usize {
        self.bits.weight()
    }

    pub fn bits(&self) -> &BitVec {
        &self.bits
    }

    /// Present column patterns as integers, ascending.
    pub fn patterns(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.ones().map(|i| i + 1)
    }
}

/// The constraint system for matrices with `m` rows, `k` of them odd.
///
/// Row order: all pairs (lexicographic), all triples, the m weight
/// constraints, then the unit rows excluding patterns supported on the
/// odd block alone.
#[derive(Debug, Clone)]
pub struct TriorthoSystem {
    pub m: usize,
    pub k: usize,
    pub matrix: BitMatrix,
    pub rhs: BitVec,
}

impl TriorthoSystem {
    pub fn variables(&self) -> usize {
        (1 << self.m) - 1
    }

    pub fn constraints(&self) -> usize {
        self.matrix.row_count()
    }

    /// True when `n` satisfies every constraint.
    pub fn is_solution(&self, n: &ColumnCountVector) -> bool {
        self.matrix.mul_vec(n.bits()) == self.rhs
    }
}

/// Builds the constraint system. Requires `m - k >= 3` (fewer even rows
/// force a zero column in the even block) and `m <= MAX_ROWS`.
pub fn build_system(m: usize, k: usize) -> Result<TriorthoSystem, SearchError> {
    if k > m || m - k < 3 {
        return Err(SearchError::TooFewEvenRows { m, k });
    }
    if m > MAX_ROWS {
        return Err(SearchError::TooManyRows { m });
    }
    let vars = (1usize << m) - 1;
    let mut rows: Vec<BitVec> = Vec::new();
    let mut rhs: Vec<bool> = Vec::new();

    let overlap_row = |mask: usize| {
        let mut row = BitVec::zeros(vars);
        for x in 1..=vars {
            if x & mask == mask {
                row.set(x - 1, true);
            }
        }
        row
    };

    for a in 0..m {
        for b in (a + 1)..m {
            rows.push(overlap_row((1 << a) | (1 << b)));
            rhs.push(false);
        }
    }
    for a in 0..m {
        for b in (a + 1)..m {
            for c in (b + 1)..m {
                rows.push(overlap_row((1 << a) | (1 << b) | (1 << c)));
                rhs.push(false);
            }
        }
    }
    for a in 0..m {
        rows.push(overlap_row(1 << a));
        rhs.push(a < k);
    }
    // Patterns supported entirely on the odd block would be zero columns
    // of the even block; pin them to zero.
    for x in 1..(1usize << k) {
        let mut row = BitVec::zeros(vars);
        row.set(x - 1, true);
        rows.push(row);
        rhs.push(false);
    }

    Ok(TriorthoSystem {
        m,
        k,
        matrix: BitMatrix::from_rows(rows),
        rhs: BitVec::from_bits(rhs.len(), rhs),
    })
}

/// Full solution set, or `Infeasible`.
pub fn solve(system: &TriorthoSystem) -> Result<AffineSolution, SearchError> {
    solve_affine(&system.matrix, &system.rhs).ok_or(SearchError::Infeasible)
}

/// How to look for a minimum-weight solution.
#[derive(Debug, Clone, Copy)]
pub enum Strategy {
    /// Enumerate the whole affine coset; certifies minimality.
    Exhaustive,
    /// Seeded random restarts with greedy descent along nullspace moves.
    Randomized { budget: u64, seed: u64 },
}

#[derive(Debug, Clone)]
pub struct MinWeightOutcome {
    pub solution: ColumnCountVector,
    pub weight: usize,
    /// True when the sweep proved no lighter nonzero solution exists.
    pub certified_minimal: bool,
}

/// Minimum-Hamming-weight nonzero solution of the system.
///
/// Ties break lexicographically on the bit sequence of `N`, so results
/// are deterministic for a given strategy and seed.
pub fn min_weight_solution(
    system: &TriorthoSystem,
    strategy: Strategy,
) -> Result<MinWeightOutcome, SearchError> {
    let affine = solve(system)?;
    let vars = system.variables();
    match strategy {
        Strategy::Exhaustive => {
            let dim = affine.dimension();
            if dim > EXHAUSTIVE_DIM_LIMIT {
                return Err(SearchError::NullspaceTooLarge { dim });
            }
            let mut current = affine.particular.clone();
            let mut best: Option<BitVec> = None;
            let consider = |v: &BitVec, best: &mut Option<BitVec>| {
                if v.is_zero() {
                    return;
                }
                let replace = match best {
                    Some(b) => {
                        let (wv, wb) = (v.weight(), b.weight());
                        wv < wb
                            || (wv == wb && v.lex_cmp(b) == std::cmp::Ordering::Less)
                    }
                    None => true,
                };
                if replace {
                    *best = Some(v.clone());
                }
            };
            consider(&current, &mut best);
            let total: u64 = 1 << dim;
            for i in 1..total {
                let flip = i.trailing_zeros() as usize;
                current.xor_assign(affine.nullspace_basis.row(flip));
                consider(&current, &mut best);
            }
            let best = best.ok_or(SearchError::NoNonzeroSolution)?;
            Ok(MinWeightOutcome {
                weight: best.weight(),
                solution: ColumnCountVector::from_bits(system.m, best),
                certified_minimal: true,
            })
        }
        Strategy::Randomized { budget, seed } => {
            let dim = affine.dimension();
            let mut rng = SplitMix64::new(seed);
            let mut best: Option<BitVec> = None;
            let mut spent: u64 = 0;
            while spent < budget {
                // random coset member
                let mut current = affine.particular.clone();
                for i in 0..dim {
                    if rng.next_u64() & 1 == 1 {
                        current.xor_assign(affine.nullspace_basis.row(i));
                    }
                }
                spent += 1;
                // greedy descent: apply any nullspace move that lowers
                // the weight, until none does
                loop {
                    let mut improved = false;
                    for i in 0..dim {
                        if spent >= budget {
                            break;
                        }
                        let mut candidate = current.clone();
                        candidate.xor_assign(affine.nullspace_basis.row(i));
                        spent += 1;
                        if !candidate.is_zero() && candidate.weight() < current.weight() {
                            current = candidate;
                            improved = true;
                        }
                    }
                    if !improved || spent >= budget {
                        break;
                    }
                }
                if !current.is_zero() {
                    let replace = match &best {
                        Some(b) => {
                            let (wc, wb) = (current.weight(), b.weight());
                            wc < wb
                                || (wc == wb
                                    && current.lex_cmp(b) == std::cmp::Ordering::Less)
                        }
                        None => true,
                    };
                    if replace {
                        best = Some(current.clone());
                    }
                }
            }
            let best = best.ok_or(SearchError::NoNonzeroSolution)?;
            debug_assert_eq!(best.len(), vars);
            Ok(MinWeightOutcome {
                weight: best.weight(),
                solution: ColumnCountVector::from_bits(system.m, best),
                certified_minimal: false,
            })
        }
    }
}

/// Writes out the matrix described by `n`: one column per set bit, in
/// ascending pattern order, odd rows first by construction. The result
/// must validate as triorthogonal with exactly `k` odd rows.
pub fn materialize(
    n: &ColumnCountVector,
    k: usize,
) -> Result<TriorthogonalMatrix, SearchError> {
    let cols: Vec<usize> = n.patterns().collect();
    if cols.is_empty() {
        return Err(SearchError::NoColumns);
    }
    let m = n.m();
    let rows: Vec<BitVec> = (0..m)
        .map(|a| BitVec::from_bits(cols.len(), cols.iter().map(|&x| (x >> a) & 1 == 1)))
        .collect();
    let g = TriorthogonalMatrix::new(BitMatrix::from_rows(rows))?;
    if g.k() != k {
        return Err(SearchError::ValidationFailed(OrthoError::OddRowsNotLeading {
            index: g.k().min(k),
        }));
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::distance_z;
    use crate::ortho::generate_gk;

    #[test]
    fn census_for_5_2() {
        let sys = build_system(5, 2).unwrap();
        assert_eq!(sys.variables(), 31);
        // 10 pairs + 10 triples + 5 weights + 3 exclusions
        assert_eq!(sys.constraints(), 28);
    }

    #[test]
    fn build_rejects_too_few_even_rows() {
        assert!(matches!(
            build_system(4, 2),
            Err(SearchError::TooFewEvenRows { m: 4, k: 2 })
        ));
        assert!(matches!(build_system(3, 1), Err(SearchError::TooFewEvenRows { .. })));
        assert!(matches!(build_system(2, 5), Err(SearchError::TooFewEvenRows { .. })));
    }

    #[test]
    fn build_rejects_oversized_m() {
        assert!(matches!(
            build_system(23, 2),
            Err(SearchError::TooManyRows { m: 23 })
        ));
    }

    #[test]
    fn homogeneous_system_solves_to_zero() {
        let sys = build_system(3, 0).unwrap();
        assert!(sys.rhs.is_zero());
        let sol = solve(&sys).unwrap();
        assert!(sol.particular.is_zero());
        // At (3, 0) the parity constraints pin every variable, so the
        // zero matrix is the only solution.
        assert!(matches!(
            min_weight_solution(&sys, Strategy::Exhaustive),
            Err(SearchError::NoNonzeroSolution)
        ));
    }

    #[test]
    fn six_rows_three_odd_is_feasible() {
        let sys = build_system(6, 3).unwrap();
        let out = min_weight_solution(&sys, Strategy::Exhaustive).unwrap();
        let g = materialize(&out.solution, 3).unwrap();
        assert_eq!(g.m(), 6);
        assert_eq!(g.k(), 3);
        assert_eq!(g.n(), out.weight);
    }

    fn encode_matrix_columns(g: &TriorthogonalMatrix) -> ColumnCountVector {
        let m = g.m();
        let mut bits = BitVec::zeros((1 << m) - 1);
        for j in 0..g.n() {
            let mut x = 0usize;
            for a in 0..m {
                if g.matrix().get(a, j) {
                    x |= 1 << a;
                }
            }
            assert!(x > 0, "zero column");
            assert!(!bits.get(x - 1), "repeated column");
            bits.set(x - 1, true);
        }
        ColumnCountVector::from_bits(m, bits)
    }

    #[test]
    fn known_5x14_matrix_satisfies_the_system() {
        let g = TriorthogonalMatrix::new(BitMatrix::from_bit_rows(&[
            &[1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0],
            &[0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1, 1],
            &[1, 0, 1, 0, 1, 0, 1, 1, 0, 1, 0, 1, 0, 1],
            &[0, 1, 1, 0, 0, 1, 1, 0, 1, 1, 0, 0, 1, 1],
            &[0, 0, 0, 1, 1, 1, 1, 0, 0, 0, 1, 1, 1, 1],
        ]))
        .unwrap();
        let sys = build_system(5, 2).unwrap();
        let n = encode_matrix_columns(&g);
        assert!(sys.is_solution(&n));
    }

    #[test]
    fn family_matrix_satisfies_its_system() {
        let g = generate_gk(4).unwrap();
        let sys = build_system(7, 4).unwrap();
        let n = encode_matrix_columns(&g);
        assert!(sys.is_solution(&n));
    }

    #[test]
    fn exhaustive_minimum_for_5_2_is_14() {
        let sys = build_system(5, 2).unwrap();
        let out = min_weight_solution(&sys, Strategy::Exhaustive).unwrap();
        assert_eq!(out.weight, 14);
        assert!(out.certified_minimal);
        let g = materialize(&out.solution, 2).unwrap();
        assert_eq!(g.k(), 2);
        assert_eq!(g.n(), 14);
        assert_eq!(distance_z(&g).unwrap(), 2);
    }

    #[test]
    fn randomized_is_reproducible_and_valid() {
        let sys = build_system(6, 2).unwrap();
        let s = Strategy::Randomized { budget: 3_000, seed: 1234 };
        let a = min_weight_solution(&sys, s).unwrap();
        let b = min_weight_solution(&sys, s).unwrap();
        assert_eq!(a.solution, b.solution);
        assert!(!a.certified_minimal);
        let g = materialize(&a.solution, 2).unwrap();
        assert_eq!(g.k(), 2);
    }

    #[test]
    fn randomized_reaches_exhaustive_minimum_on_small_system() {
        let sys = build_system(5, 2).unwrap();
        let exhaustive = min_weight_solution(&sys, Strategy::Exhaustive).unwrap();
        let randomized = min_weight_solution(
            &sys,
            Strategy::Randomized { budget: 20_000, seed: 42 },
        )
        .unwrap();
        assert_eq!(randomized.weight, exhaustive.weight);
    }

    #[test]
    fn materialize_rejects_empty_solution() {
        let n = ColumnCountVector::from_bits(5, BitVec::zeros(31));
        assert!(matches!(materialize(&n, 2), Err(SearchError::NoColumns)));
    }

    #[test]
    fn random_solutions_materialize_to_valid_matrices() {
        let mut rng = SplitMix64::new(0xDEC0DE);
        let mut produced = 0u32;
        let mut attempts = 0u32;
        while produced < 200 && attempts < 2000 {
            attempts += 1;
            let m = 5 + (rng.next_u64() % 4) as usize; // 5..=8
            let max_k = m - 3;
            let k = 1 + (rng.next_u64() % max_k as u64) as usize;
            let Ok(sys) = build_system(m, k) else { continue };
            let Ok(affine) = solve(&sys) else { continue };
            let mut candidate = affine.particular.clone();
            for i in 0..affine.dimension() {
                if rng.next_u64() & 1 == 1 {
                    candidate.xor_assign(affine.nullspace_basis.row(i));
                }
            }
            if candidate.is_zero() {
                continue;
            }
            let n = ColumnCountVector::from_bits(m, candidate);
            assert!(sys.is_solution(&n), "m={m} k={k}");
            let g = materialize(&n, k).expect("materialized solution must validate");
            assert_eq!(g.k(), k, "m={m}");
            produced += 1;
        }
        assert_eq!(produced, 200, "not enough feasible samples");
    }
}
