//! The diagonal Clifford correction completing the transversal T gate.
//!
//! Applying T to every qubit of an encoded plus state picks up the phase
//! `exp(iπ|f|/4)` on each codeword `f`. On a triorthogonal matrix the
//! cubic part of that phase vanishes and the rest is a quadratic form in
//! the bits of `f`, so a layer of S and controlled-Z gates cancels it,
//! leaving exactly one π/4 phase per logical qubit. This module computes
//! the gate exponents (`lambda_p` mod 4 for S-type, `lambda_pq` mod 2 for
//! CZ-type) from a decoding matrix and checks the resulting mod-8 phase
//! identity by brute force over the codeword space — the formula and the
//! verifier are independent routes.
//!
//! No quantum state is ever represented: for diagonal operators the
//! phase arithmetic over Z8 is the whole story.

use serde::Serialize;
use thiserror::Error;

use crate::gf2::{BitMatrix, BitVec, Echelon};
use crate::ortho::TriorthogonalMatrix;
use crate::rng::SplitMix64;

#[derive(Debug, Error)]
pub enum CliffordError {
    #[error("matrix rows are linearly dependent; reduce to a basis first")]
    DependentRows,
    #[error("exhaustive verification is limited to 24 rows (got {m})")]
    ExhaustiveTooLarge { m: usize },
    #[error("verification supports at most 64 rows (got {m})")]
    TooManyRows { m: usize },
}

/// A right inverse of the matrix transpose: `B G^T = I`, so
/// `x_a = Σ_p B_ap f_p` recovers the coefficients of a codeword.
#[derive(Debug, Clone)]
pub struct DecodingMatrix {
    pub b: BitMatrix,
}

/// Canonical decoding matrix, derived from the reduced echelon form of
/// `[G | I]`: deterministic for a given matrix.
pub fn decoding_matrix(g: &TriorthogonalMatrix) -> Result<DecodingMatrix, CliffordError> {
    decoding_matrix_unchecked(g.matrix())
}

/// Same construction on a raw matrix (diagnostics and negative controls).
pub fn decoding_matrix_unchecked(matrix: &BitMatrix) -> Result<DecodingMatrix, CliffordError> {
    let m = matrix.row_count();
    let n = matrix.col_count();
    let mut aug = BitMatrix::empty(n + m);
    for (i, row) in matrix.rows().enumerate() {
        let mut r = BitVec::zeros(n + m);
        for j in row.ones() {
            r.set(j, true);
        }
        r.set(n + i, true);
        aug.push_row(r);
    }
    let ech = Echelon::reduce(aug);
    let pivots: Vec<usize> = ech
        .pivot_cols
        .iter()
        .copied()
        .take_while(|&c| c < n)
        .collect();
    if pivots.len() < m {
        return Err(CliffordError::DependentRows);
    }
    // Echelon rows read [T·G | T]; placing T's columns at the pivot
    // positions of T·G yields B with B G^T = I.
    let mut b = BitMatrix::zeros(m, n);
    for (j, &pc) in pivots.iter().enumerate() {
        for a in 0..m {
            if ech.matrix.row(j).get(n + a) {
                b.set(a, pc, true);
            }
        }
    }
    debug_assert!((0..m).all(|a| {
        (0..m).all(|r| b.row(a).inner(matrix.row(r)) == (a == r))
    }));
    Ok(DecodingMatrix { b })
}

/// Gate exponents of the correction: `lambda_p` counts inverse-S
/// applications on qubit `p` (mod 4), `lambda_pq` controlled-Z
/// applications on the pair `p < q` (mod 2).
#[derive(Debug, Clone)]
pub struct CliffordCorrection {
    n: usize,
    lambda_p: Vec<u8>,
    /// Row `p` holds bits `q > p` with `lambda_pq = 1`.
    lambda_upper: Vec<BitVec>,
}

impl CliffordCorrection {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            lambda_p: vec![0; n],
            lambda_upper: (0..n).map(|_| BitVec::zeros(n)).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lambda_p(&self) -> &[u8] {
        &self.lambda_p
    }

    /// `lambda_pq` for an unordered pair.
    pub fn lambda_pq(&self, p: usize, q: usize) -> bool {
        assert!(p != q, "pair indices must differ");
        let (p, q) = if p < q { (p, q) } else { (q, p) };
        self.lambda_upper[p].get(q)
    }

    pub fn is_zero(&self) -> bool {
        self.lambda_p.iter().all(|&l| l == 0)
            && self.lambda_upper.iter().all(BitVec::is_zero)
    }

    /// Adds 1 (mod 4) to one S exponent; for fault-injection checks.
    pub fn bump_lambda_p(&mut self, p: usize) {
        self.lambda_p[p] = (self.lambda_p[p] + 1) % 4;
    }

    /// Flips one CZ exponent; for fault-injection checks.
    pub fn flip_lambda_pq(&mut self, p: usize, q: usize) {
        assert!(p != q, "pair indices must differ");
        let (p, q) = if p < q { (p, q) } else { (q, p) };
        self.lambda_upper[p].flip(q);
    }
}

/// Integer halves of row weights and pairwise overlaps: `|g^a|` equals
/// `2·gamma_a` plus one for the odd rows, and `|g^a · g^b| = 2·gamma_ab`.
/// These drive the quadratic phase form the correction cancels.
#[derive(Debug, Clone)]
pub struct PhaseLedger {
    pub gamma_a: Vec<u64>,
    /// `gamma_ab[a][b - a - 1]` for row pairs `a < b`.
    pub gamma_ab: Vec<Vec<u64>>,
}

impl PhaseLedger {
    pub fn new(matrix: &BitMatrix, k: usize) -> Self {
        let m = matrix.row_count();
        let gamma_a = (0..m)
            .map(|a| {
                let w = matrix.row(a).weight() as u64;
                (w - u64::from(a < k)) / 2
            })
            .collect();
        let gamma_ab = (0..m)
            .map(|a| {
                ((a + 1)..m)
                    .map(|b| matrix.row(a).and_weight(matrix.row(b)) as u64 / 2)
                    .collect()
            })
            .collect();
        Self { gamma_a, gamma_ab }
    }

    pub fn gamma_ab(&self, a: usize, b: usize) -> u64 {
        assert!(a != b, "pair indices must differ");
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        self.gamma_ab[a][b - a - 1]
    }

    /// Checks the reconstruction identities against the matrix rows;
    /// exact for any matrix satisfying the pair condition.
    pub fn reconstructs(&self, matrix: &BitMatrix, k: usize) -> bool {
        let m = matrix.row_count();
        (0..m).all(|a| {
            matrix.row(a).weight() as u64 == 2 * self.gamma_a[a] + u64::from(a < k)
        }) && (0..m).all(|a| {
            ((a + 1)..m).all(|b| {
                matrix.row(a).and_weight(matrix.row(b)) as u64 == 2 * self.gamma_ab(a, b)
            })
        })
    }
}

/// Nonzero gate exponents of a correction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GateCounts {
    pub s_gates: usize,
    pub cz_gates: usize,
}

pub fn gate_counts(c: &CliffordCorrection) -> GateCounts {
    GateCounts {
        s_gates: c.lambda_p.iter().filter(|&&l| l != 0).count(),
        cz_gates: c.lambda_upper.iter().map(BitVec::weight).sum(),
    }
}

/// Computes the correction with the canonical decoding matrix.
pub fn correction(g: &TriorthogonalMatrix) -> Result<CliffordCorrection, CliffordError> {
    let b = decoding_matrix(g)?;
    Ok(correction_with_decoder(g, &b))
}

/// Computes the correction from a caller-supplied decoding matrix (any
/// `B` with `B G^T = I` works; the verifier accepts them all).
pub fn correction_with_decoder(
    g: &TriorthogonalMatrix,
    decoder: &DecodingMatrix,
) -> CliffordCorrection {
    build_correction(g.matrix(), g.k(), &decoder.b)
}

/// Correction for a raw matrix that may violate triorthogonality; used
/// by negative controls to show the verifier catching the obstruction.
pub fn correction_unchecked(
    matrix: &BitMatrix,
    k: usize,
) -> Result<CliffordCorrection, CliffordError> {
    let b = decoding_matrix_unchecked(matrix)?;
    Ok(build_correction(matrix, k, &b.b))
}

fn build_correction(matrix: &BitMatrix, k: usize, b: &BitMatrix) -> CliffordCorrection {
    let m = matrix.row_count();
    let n = matrix.col_count();
    assert!(m <= 64, "correction supports at most 64 rows");

    let ledger = PhaseLedger::new(matrix, k);
    let gamma_mod4: Vec<u64> = ledger.gamma_a.iter().map(|g| g % 4).collect();
    let mut gamma_odd_mask = 0u64;
    for (a, g) in ledger.gamma_a.iter().enumerate() {
        if g % 2 == 1 {
            gamma_odd_mask |= 1 << a;
        }
    }
    // gamma_ab parity, upper-triangular bitmask per row
    let mut gam_upper = vec![0u64; m];
    for a in 0..m {
        for bb in (a + 1)..m {
            if ledger.gamma_ab(a, bb) % 2 == 1 {
                gam_upper[a] |= 1 << bb;
            }
        }
    }
    // Column masks of B over the row index.
    let bcol: Vec<u64> = (0..n)
        .map(|p| {
            let mut mask = 0u64;
            for a in 0..m {
                if b.get(a, p) {
                    mask |= 1 << a;
                }
            }
            mask
        })
        .collect();

    let pair_parity_within = |mask: u64| -> u64 {
        let mut parity = 0u64;
        let mut rest = mask;
        while rest != 0 {
            let a = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            parity ^= (gam_upper[a] & mask).count_ones() as u64 & 1;
        }
        parity
    };

    let lambda_p: Vec<u8> = (0..n)
        .map(|p| {
            let mask = bcol[p];
            let mut s1 = 0u64;
            let mut rest = mask;
            while rest != 0 {
                let a = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                s1 += gamma_mod4[a];
            }
            // Λ_p = Σ Γ_a - 2 Σ Γ_ab over the mask; -2 ≡ 2 (mod 4).
            (((s1 % 4) + 2 * pair_parity_within(mask)) % 4) as u8
        })
        .collect();

    let cross_parity = |mp: u64, mq: u64| -> u64 {
        let mut parity = 0u64;
        let mut rest = mp;
        while rest != 0 {
            let a = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            parity ^= (gam_upper[a] & mq).count_ones() as u64 & 1;
        }
        let mut rest = mq;
        while rest != 0 {
            let a = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            parity ^= (gam_upper[a] & mp).count_ones() as u64 & 1;
        }
        parity
    };

    let mut lambda_upper: Vec<BitVec> = (0..n).map(|_| BitVec::zeros(n)).collect();
    for p in 0..n {
        for q in (p + 1)..n {
            let diag = (bcol[p] & bcol[q] & gamma_odd_mask).count_ones() as u64 & 1;
            if diag ^ cross_parity(bcol[p], bcol[q]) == 1 {
                lambda_upper[p].set(q, true);
            }
        }
    }

    CliffordCorrection {
        n,
        lambda_p,
        lambda_upper,
    }
}

/// Verification strategy for the phase identity.
#[derive(Debug, Clone, Copy)]
pub enum VerifyMode {
    /// Every coefficient vector x in F2^m; requires m <= 24.
    Exhaustive,
    /// Seeded uniform draws over x.
    Sampled { seed: u64, trials: u64 },
}

/// A coefficient vector where the phase identity fails, with both sides
/// of the mod-8 congruence.
#[derive(Debug, Clone, Serialize)]
pub struct PhaseCounterexample {
    pub x: String,
    pub lhs: u8,
    pub rhs: u8,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyOutcome {
    pub ok: bool,
    pub checked: u64,
    pub violations: u64,
    /// Lexicographically smallest failing x over the full pass.
    pub counterexample: Option<PhaseCounterexample>,
}

/// Checks the mod-8 phase identity
/// `|f| - 2·Σ_p Λ_p f_p + 4·Σ_{p<q} Λ_pq f_p f_q ≡ Σ_{a≤k} x_a (mod 8)`
/// for codewords `f = Σ_a x_a g^a`.
pub fn verify_phase_identity(
    g: &TriorthogonalMatrix,
    c: &CliffordCorrection,
    mode: VerifyMode,
) -> Result<VerifyOutcome, CliffordError> {
    verify_phase_identity_unchecked(g.matrix(), g.k(), c, mode)
}

pub fn verify_phase_identity_unchecked(
    matrix: &BitMatrix,
    k: usize,
    c: &CliffordCorrection,
    mode: VerifyMode,
) -> Result<VerifyOutcome, CliffordError> {
    let m = matrix.row_count();
    if m > 64 {
        return Err(CliffordError::TooManyRows { m });
    }
    let n = matrix.col_count();
    assert_eq!(c.n(), n, "correction length mismatch");
    let k_mask: u64 = if k == 64 { u64::MAX } else { (1u64 << k) - 1 };
    let trivial = c.is_zero();

    let check = |f: &BitVec, x: u64| -> Option<(u8, u8)> {
        let weight = f.weight() as i64;
        let (s1, s2) = if trivial {
            (0i64, 0i64)
        } else {
            let mut s1 = 0u64;
            let mut s2 = 0u64;
            for p in f.ones() {
                s1 += u64::from(c.lambda_p[p]);
                s2 += c.lambda_upper[p].and_weight(f) as u64;
            }
            (s1 as i64, (s2 & 1) as i64)
        };
        let lhs = (weight - 2 * s1 + 4 * s2).rem_euclid(8) as u8;
        let rhs = ((x & k_mask).count_ones() % 8) as u8;
        (lhs != rhs).then_some((lhs, rhs))
    };

    let mut violations = 0u64;
    let mut best: Option<(BitVec, u8, u8)> = None;
    let mut checked = 0u64;

    let record = |x: u64, lhs: u8, rhs: u8, m: usize, best: &mut Option<(BitVec, u8, u8)>| {
        let xv = BitVec::from_bits(m, (0..m).map(|a| (x >> a) & 1 == 1));
        let replace = match best {
            Some((cur, _, _)) => xv.lex_cmp(cur) == std::cmp::Ordering::Less,
            None => true,
        };
        if replace {
            *best = Some((xv, lhs, rhs));
        }
    };

    match mode {
        VerifyMode::Exhaustive => {
            if m > 24 {
                return Err(CliffordError::ExhaustiveTooLarge { m });
            }
            let total: u64 = 1 << m;
            let mut f = BitVec::zeros(n);
            // Gray-code walk over x; one row XOR per step.
            let mut gray_prev = 0u64;
            for i in 0..total {
                let gray = i ^ (i >> 1);
                let delta = gray ^ gray_prev;
                if delta != 0 {
                    f.xor_assign(matrix.row(delta.trailing_zeros() as usize));
                }
                gray_prev = gray;
                checked += 1;
                if let Some((lhs, rhs)) = check(&f, gray) {
                    violations += 1;
                    record(gray, lhs, rhs, m, &mut best);
                }
            }
        }
        VerifyMode::Sampled { seed, trials } => {
            let mut rng = SplitMix64::new(seed);
            let x_mask: u64 = if m == 64 { u64::MAX } else { (1u64 << m) - 1 };
            for _ in 0..trials {
                let x = rng.next_u64() & x_mask;
                let mut f = BitVec::zeros(n);
                let mut rest = x;
                while rest != 0 {
                    let a = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    f.xor_assign(matrix.row(a));
                }
                checked += 1;
                if let Some((lhs, rhs)) = check(&f, x) {
                    violations += 1;
                    record(x, lhs, rhs, m, &mut best);
                }
            }
        }
    }

    Ok(VerifyOutcome {
        ok: violations == 0,
        checked,
        violations,
        counterexample: best.map(|(x, lhs, rhs)| PhaseCounterexample {
            x: x.to_string(),
            lhs,
            rhs,
        }),
    })
}
