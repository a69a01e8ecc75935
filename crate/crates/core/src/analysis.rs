//! Error analysis of the stabilizer code induced by a triorthogonal
//! matrix.
//!
//! Weight enumerators and the MacWilliams transform are computed in exact
//! integer arithmetic, and power series in exact rationals; floating
//! point enters only when a rate is finally evaluated at a concrete error
//! probability. The two routes to the success probability (direct
//! summation over the dual space versus the MacWilliams form over the
//! even block) stay independent so they can check each other.
//!
//! Notation follows the usual convention: `G0` is the even-weight block
//! whose rows generate the X-type stabilizers, the `k` odd-weight rows
//! carry the logical qubits, and rates are functions of the input error
//! probability `p` with `z = 1 - 2p`.

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::gf2::{span_enumerate, BitMatrix, BitVec, Gf2Error, SPAN_LIMIT};
use crate::ortho::TriorthogonalMatrix;
use crate::RationalPoly;

/// Default budget for the increasing-weight distance search, counted in
/// full-weight candidate supports.
pub const DISTANCE_BUDGET: u64 = 100_000_000;

/// Absolute bisection tolerance for threshold localization.
pub const THRESHOLD_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Span(#[from] Gf2Error),
    #[error("coset representative already lies in the span")]
    FInSpan,
    #[error("distance search exceeded its budget of {budget} candidates")]
    BudgetExceeded { budget: u64 },
    #[error("no threshold: the output error rate never improves on the input")]
    NoThreshold,
    #[error("inconsistent enumerator input: {0}")]
    InconsistentInput(String),
    #[error("matrix has no odd-weight rows, so no logical distance exists")]
    NoLogicalQubits,
}

/// Exact weight distribution of a binary code: `coeffs[w]` counts the
/// codewords of weight `w`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WeightEnumerator {
    length: usize,
    coeffs: Vec<u128>,
}

impl WeightEnumerator {
    pub fn new(length: usize, coeffs: Vec<u128>) -> Self {
        assert_eq!(coeffs.len(), length + 1);
        Self { length, coeffs }
    }

    /// Builds from a sparse list of `(weight, count)` terms.
    pub fn from_terms(length: usize, terms: &[(usize, u128)]) -> Self {
        let mut coeffs = vec![0u128; length + 1];
        for &(w, c) in terms {
            coeffs[w] += c;
        }
        Self { length, coeffs }
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn coeff(&self, w: usize) -> u128 {
        self.coeffs.get(w).copied().unwrap_or(0)
    }

    pub fn coeffs(&self) -> &[u128] {
        &self.coeffs
    }

    /// Total number of codewords, `W(1)`.
    pub fn total(&self) -> u128 {
        self.coeffs.iter().sum()
    }

    /// Nonzero terms as `(weight, count)` in ascending weight.
    pub fn terms(&self) -> impl Iterator<Item = (usize, u128)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(w, &c)| (w, c))
    }

    /// Renders as `1 + 32x^8 + 442x^16 + ...`.
    pub fn to_polynomial_string(&self) -> String {
        let mut parts = Vec::new();
        for (w, c) in self.terms() {
            parts.push(match (w, c) {
                (0, c) => format!("{c}"),
                (w, 1) => format!("x^{w}"),
                (w, c) => format!("{c}x^{w}"),
            });
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

/// Exact weight distribution of the span of `generators`.
pub fn enumerator(generators: &BitMatrix) -> Result<WeightEnumerator, AnalysisError> {
    enumerator_with_limit(generators, SPAN_LIMIT)
}

pub fn enumerator_with_limit(
    generators: &BitMatrix,
    limit: usize,
) -> Result<WeightEnumerator, AnalysisError> {
    let n = generators.col_count();
    let mut coeffs = vec![0u128; n + 1];
    span_enumerate(generators, limit, |v| coeffs[v.weight()] += 1)?;
    Ok(WeightEnumerator { length: n, coeffs })
}

/// Weight distribution of `span(g0) ∪ (f + span(g0))`.
///
/// `f` must lie outside the span; the result counts `2^(rank+1)`
/// codewords.
pub fn coset_enumerator(
    g0: &BitMatrix,
    f: &BitVec,
) -> Result<WeightEnumerator, AnalysisError> {
    let (union, _) = coset_split(g0, f, SPAN_LIMIT)?;
    Ok(union)
}

/// Same enumeration split into the union and the coset-only part; the
/// ratio forms want the two pieces separately.
fn coset_split(
    g0: &BitMatrix,
    f: &BitVec,
    limit: usize,
) -> Result<(WeightEnumerator, WeightEnumerator), AnalysisError> {
    if g0.span_contains(f) {
        return Err(AnalysisError::FInSpan);
    }
    let n = g0.col_count();
    let mut union = vec![0u128; n + 1];
    let mut coset = vec![0u128; n + 1];
    span_enumerate(g0, limit.saturating_sub(1), |g| {
        union[g.weight()] += 1;
        let w = g.xor(f).weight();
        union[w] += 1;
        coset[w] += 1;
    })?;
    Ok((
        WeightEnumerator { length: n, coeffs: union },
        WeightEnumerator { length: n, coeffs: coset },
    ))
}

/// MacWilliams transform: the dual code's enumerator
/// `W⊥(x) = (1+x)^n W((1-x)/(1+x)) / code_size`, computed exactly via
/// Krawtchouk sums.
pub fn macwilliams(
    w: &WeightEnumerator,
    n: usize,
    code_size: u128,
) -> Result<WeightEnumerator, AnalysisError> {
    if w.length() != n {
        return Err(AnalysisError::InconsistentInput(format!(
            "enumerator length {} does not match n = {n}",
            w.length()
        )));
    }
    if w.total() != code_size {
        return Err(AnalysisError::InconsistentInput(format!(
            "coefficients sum to {} but code_size = {code_size}",
            w.total()
        )));
    }
    if code_size == 0 || !code_size.is_power_of_two() {
        return Err(AnalysisError::InconsistentInput(format!(
            "code size {code_size} is not a power of two"
        )));
    }
    let size = BigInt::from(code_size);
    let mut dual = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let mut acc = BigInt::zero();
        for (weight, count) in w.terms() {
            // Krawtchouk K_j(weight) = sum_i (-1)^i C(weight,i) C(n-weight,j-i)
            let mut k = BigInt::zero();
            for i in 0..=j.min(weight) {
                if j - i > n - weight {
                    continue;
                }
                let term = binomial(BigInt::from(weight), BigInt::from(i))
                    * binomial(BigInt::from(n - weight), BigInt::from(j - i));
                if i % 2 == 0 {
                    k += term;
                } else {
                    k -= term;
                }
            }
            acc += BigInt::from(count) * k;
        }
        if acc.is_negative() || !(&acc % &size).is_zero() {
            return Err(AnalysisError::InconsistentInput(format!(
                "transform produced a non-integral coefficient at weight {j}"
            )));
        }
        let coeff = (acc / &size)
            .to_u128()
            .ok_or_else(|| {
                AnalysisError::InconsistentInput("dual coefficient overflows u128".into())
            })?;
        dual.push(coeff);
    }
    Ok(WeightEnumerator { length: n, coeffs: dual })
}

/// Truncation order of the per-variant series kept for small-p rate
/// evaluation.
const RATE_SERIES_ORDER: usize = 24;

/// Below this output error the direct enumerator ratio loses most of its
/// digits to cancellation and the series expansion takes over.
const DIRECT_EVAL_FLOOR: f64 = 1e-8;

/// Precomputed enumerator data for fast pointwise rate evaluation.
///
/// The per-qubit coset enumerators are deduplicated: symmetric families
/// share a single variant, so the worst-case rate costs one ratio
/// evaluation instead of k. Each variant also carries the exact Taylor
/// expansion of its error rate; the ratio form cancels to order p^d, so
/// direct f64 evaluation is hopeless once q falls below the floor and
/// the series is used instead.
#[derive(Debug, Clone)]
pub struct Rates {
    n: usize,
    k: usize,
    g0_size: u128,
    g0_terms: Vec<(usize, u128)>,
    variants: Vec<RateVariant>,
    /// Index into `variants` for each logical qubit.
    per_qubit: Vec<usize>,
}

#[derive(Debug, Clone)]
struct RateVariant {
    coset_terms: Vec<(usize, u128)>,
    /// Numerator terms `b_w - coset_w` of `q = Σ diff_w z^w / (2B)`,
    /// exact and signed.
    diff_terms: Vec<(usize, i128)>,
    /// f64 image of the exact q series, ascending powers of p.
    series: Vec<f64>,
}

impl Rates {
    pub fn new(g: &TriorthogonalMatrix) -> Result<Self, AnalysisError> {
        let g0 = g.g0();
        let g0_enum = enumerator(&g0)?;
        let g0_terms: Vec<(usize, u128)> = g0_enum.terms().collect();
        let mut variants: Vec<RateVariant> = Vec::new();
        let mut per_qubit = Vec::with_capacity(g.k());
        for a in 0..g.k() {
            let (_, coset) = coset_split(&g0, g.logical_row(a), SPAN_LIMIT)?;
            let coset_terms: Vec<(usize, u128)> = coset.terms().collect();
            let idx = match variants
                .iter()
                .position(|v| v.coset_terms == coset_terms)
            {
                Some(i) => i,
                None => {
                    let mut diff: Vec<(usize, i128)> = Vec::new();
                    for w in 0..=g.n() {
                        let d = g0_enum.coeff(w) as i128 - coset.coeff(w) as i128;
                        if d != 0 {
                            diff.push((w, d));
                        }
                    }
                    let series = q_series_from_terms(&g0_terms, &coset_terms, RATE_SERIES_ORDER)
                        .expect("even block is nonempty");
                    let series_f64 = (0..=RATE_SERIES_ORDER)
                        .map(|i| series.coeff(i).to_f64().unwrap_or(0.0))
                        .collect();
                    variants.push(RateVariant {
                        coset_terms,
                        diff_terms: diff,
                        series: series_f64,
                    });
                    variants.len() - 1
                }
            };
            per_qubit.push(idx);
        }
        Ok(Self {
            n: g.n(),
            k: g.k(),
            g0_size: g0_enum.total(),
            g0_terms,
            variants,
            per_qubit,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    fn eval_terms(terms: &[(usize, u128)], z: f64) -> f64 {
        terms
            .iter()
            .map(|&(w, c)| c as f64 * z.powi(w as i32))
            .sum()
    }

    /// `P_s(p) = (1/|G0|) Σ_w b_w (1-2p)^w`.
    pub fn success_probability(&self, p: f64) -> f64 {
        let z = 1.0 - 2.0 * p;
        Self::eval_terms(&self.g0_terms, z) / self.g0_size as f64
    }

    fn variant_error(&self, variant: &RateVariant, b: f64, p: f64) -> f64 {
        if p == 0.0 {
            return 0.0;
        }
        let z = 1.0 - 2.0 * p;
        let numerator: f64 = variant
            .diff_terms
            .iter()
            .map(|&(w, c)| c as f64 * z.powi(w as i32))
            .sum();
        let direct = numerator / (2.0 * b);
        if direct.abs() >= DIRECT_EVAL_FLOOR {
            return direct;
        }
        // Horner on the f64 image of the exact series; q below the floor
        // implies p is deep inside the series' convergence region.
        let mut acc = 0.0;
        for c in variant.series.iter().rev() {
            acc = acc * p + c;
        }
        acc.max(0.0)
    }

    /// Output error rate on logical qubit `a` (0-based).
    pub fn output_error(&self, a: usize, p: f64) -> f64 {
        let z = 1.0 - 2.0 * p;
        let b = Self::eval_terms(&self.g0_terms, z);
        self.variant_error(&self.variants[self.per_qubit[a]], b, p)
    }

    /// Worst-case output error rate over all logical qubits.
    ///
    /// # Panics
    /// Panics when the matrix has no logical qubits.
    pub fn output_error_max(&self, p: f64) -> f64 {
        assert!(self.k >= 1, "worst-case rate needs at least one logical qubit");
        let z = 1.0 - 2.0 * p;
        let b = Self::eval_terms(&self.g0_terms, z);
        self.variants
            .iter()
            .map(|v| self.variant_error(v, b, p))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// True when every logical qubit shares one coset enumerator.
    pub fn is_symmetric(&self) -> bool {
        self.variants.len() <= 1
    }
}

/// `P_s` via the MacWilliams form over the even block.
///
/// # Panics
/// Panics if `p` is outside `[0, 1/2]`.
pub fn success_probability(g: &TriorthogonalMatrix, p: f64) -> Result<f64, AnalysisError> {
    assert!((0.0..=0.5).contains(&p), "p must lie in [0, 1/2]");
    Ok(Rates::new(g)?.success_probability(p))
}

/// Output error rate on logical qubit `a` (0-based), exact ratio of
/// enumerator evaluations.
///
/// # Panics
/// Panics if `a >= k` or `p` is outside `[0, 1/2]`.
pub fn output_error(g: &TriorthogonalMatrix, a: usize, p: f64) -> Result<f64, AnalysisError> {
    assert!((0.0..=0.5).contains(&p), "p must lie in [0, 1/2]");
    assert!(a < g.k(), "logical qubit index out of range");
    Ok(Rates::new(g)?.output_error(a, p))
}

/// Worst-case output error rate `q(p) = max_a q_a(p)`.
pub fn output_error_max(g: &TriorthogonalMatrix, p: f64) -> Result<f64, AnalysisError> {
    assert!((0.0..=0.5).contains(&p), "p must lie in [0, 1/2]");
    if g.k() == 0 {
        return Err(AnalysisError::NoLogicalQubits);
    }
    Ok(Rates::new(g)?.output_error_max(p))
}

/// Acceptance and per-qubit output error rates at one input error rate.
#[derive(Debug, Clone, Serialize)]
pub struct RateReport {
    pub p: f64,
    pub success_probability: f64,
    pub q_per_qubit: Vec<f64>,
    pub q_max: f64,
}

pub fn rate_report(g: &TriorthogonalMatrix, p: f64) -> Result<RateReport, AnalysisError> {
    assert!((0.0..=0.5).contains(&p), "p must lie in [0, 1/2]");
    let rates = Rates::new(g)?;
    let q_per_qubit: Vec<f64> = (0..g.k()).map(|a| rates.output_error(a, p)).collect();
    let q_max = q_per_qubit.iter().copied().fold(0.0, f64::max);
    Ok(RateReport {
        p,
        success_probability: rates.success_probability(p),
        q_per_qubit,
        q_max,
    })
}

fn big_rat(n: u128) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Exact dual-form success probability at a rational `p`.
pub fn success_probability_exact(
    g: &TriorthogonalMatrix,
    p: &BigRational,
) -> Result<BigRational, AnalysisError> {
    let g0_enum = enumerator(&g.g0())?;
    let z: BigRational = BigRational::one() - BigRational::from_integer(BigInt::from(2)) * p;
    let mut acc = BigRational::zero();
    for (w, c) in g0_enum.terms() {
        acc += big_rat(c) * z.pow(w as i32);
    }
    Ok(acc / big_rat(g0_enum.total()))
}

/// Exact primal-form success probability: direct summation of
/// `(1-p)^(n-w) p^w` over the dual space of the even block, enumerated
/// from its nullspace basis. Independent of the MacWilliams route.
pub fn success_probability_primal_exact(
    g: &TriorthogonalMatrix,
    p: &BigRational,
) -> Result<BigRational, AnalysisError> {
    let dual_basis = g.g0().nullspace();
    let dual_enum = enumerator(&dual_basis)?;
    let n = g.n();
    let one_minus_p: BigRational = BigRational::one() - p;
    let mut acc = BigRational::zero();
    for (w, c) in dual_enum.terms() {
        acc += big_rat(c) * one_minus_p.pow((n - w) as i32) * p.pow(w as i32);
    }
    Ok(acc)
}

/// Exact output error rate on qubit `a` at a rational `p`.
pub fn output_error_exact(
    g: &TriorthogonalMatrix,
    a: usize,
    p: &BigRational,
) -> Result<BigRational, AnalysisError> {
    assert!(a < g.k(), "logical qubit index out of range");
    let g0 = g.g0();
    let g0_enum = enumerator(&g0)?;
    let (_, coset) = coset_split(&g0, g.logical_row(a), SPAN_LIMIT)?;
    let z: BigRational = BigRational::one() - BigRational::from_integer(BigInt::from(2)) * p;
    let eval = |e: &WeightEnumerator| -> BigRational {
        e.terms().map(|(w, c)| big_rat(c) * z.pow(w as i32)).sum()
    };
    let b = eval(&g0_enum);
    let coset_val = eval(&coset);
    Ok((b.clone() - coset_val) / (BigRational::from_integer(BigInt::from(2)) * b))
}

/// `(1-2p)^w` as an exact truncated power series in `p`.
fn z_power_series(w: usize, order: usize) -> RationalPoly {
    let mut coeffs = Vec::with_capacity(order + 1);
    for j in 0..=order.min(w) {
        let mut c = binomial(BigInt::from(w), BigInt::from(j));
        c *= BigInt::from(-2i32).pow(j as u32);
        coeffs.push(BigRational::from_integer(c));
    }
    RationalPoly::from_coeffs(coeffs)
}

fn terms_series(terms: &[(usize, u128)], order: usize) -> RationalPoly {
    let mut acc = RationalPoly::zero();
    for &(w, c) in terms {
        acc = acc.add(&z_power_series(w, order).scale(&big_rat(c)));
    }
    acc
}

fn q_series_from_terms(
    g0_terms: &[(usize, u128)],
    coset_terms: &[(usize, u128)],
    order: usize,
) -> Option<RationalPoly> {
    let b = terms_series(g0_terms, order);
    let a_c = terms_series(coset_terms, order);
    let numerator = b.sub(&a_c);
    let denominator = b.scale(&BigRational::from_integer(BigInt::from(2)));
    numerator.series_div(&denominator, order)
}

/// Exact Taylor coefficients of `q_a(p)` about `p = 0`, through degree
/// `order`, by series division of the enumerator ratio.
pub fn q_series(
    g: &TriorthogonalMatrix,
    a: usize,
    order: usize,
) -> Result<RationalPoly, AnalysisError> {
    assert!(order >= 1, "order must be at least 1");
    assert!(a < g.k(), "logical qubit index out of range");
    let g0 = g.g0();
    let g0_enum = enumerator(&g0)?;
    let (_, coset) = coset_split(&g0, g.logical_row(a), SPAN_LIMIT)?;
    q_series_from_terms(
        &g0_enum.terms().collect::<Vec<_>>(),
        &coset.terms().collect::<Vec<_>>(),
        order,
    )
    .ok_or_else(|| AnalysisError::InconsistentInput("empty even block".into()))
}

/// Exact Taylor series of `P_s(p)` through degree `order`.
pub fn ps_series(g: &TriorthogonalMatrix, order: usize) -> Result<RationalPoly, AnalysisError> {
    let g0_enum = enumerator(&g.g0())?;
    let b = terms_series(&g0_enum.terms().collect::<Vec<_>>(), order);
    Ok(b.scale(&BigRational::new(BigInt::one(), BigInt::from(g0_enum.total()))))
}

/// Minimum-weight logical Z operator together with its support.
#[derive(Debug, Clone)]
pub struct DistanceWitness {
    pub distance: usize,
    pub witness: BitVec,
    /// Full-weight candidate supports examined before the witness.
    pub candidates_scanned: u64,
}

/// Z-distance: the minimum weight over vectors orthogonal to the even
/// block but not to the whole matrix, found by increasing-weight search
/// over candidate supports in colexicographic order.
pub fn distance_z(g: &TriorthogonalMatrix) -> Result<usize, AnalysisError> {
    distance_z_with_witness(g, DISTANCE_BUDGET).map(|w| w.distance)
}

pub fn distance_z_with_witness(
    g: &TriorthogonalMatrix,
    budget: u64,
) -> Result<DistanceWitness, AnalysisError> {
    if g.k() == 0 {
        return Err(AnalysisError::NoLogicalQubits);
    }
    let n = g.n();
    let m = g.m();
    let k = g.k();
    assert!(m <= 64, "distance search supports at most 64 rows");
    let g0_rows = m - k;
    // Per-column syndrome masks: low bits report the even-block rows,
    // high bits the odd rows. A support is a logical operator when its
    // XOR has a clean even-block part and a nonzero odd part.
    let cols: Vec<u64> = (0..n)
        .map(|j| {
            let mut mask = 0u64;
            for (i, row) in g.matrix().rows().skip(k).enumerate() {
                if row.get(j) {
                    mask |= 1 << i;
                }
            }
            for (a, row) in g.matrix().rows().take(k).enumerate() {
                if row.get(j) {
                    mask |= 1 << (g0_rows + a);
                }
            }
            mask
        })
        .collect();
    let g0_mask: u64 = if g0_rows == 0 { 0 } else { (1u64 << g0_rows) - 1 };

    struct Search<'a> {
        cols: &'a [u64],
        g0_mask: u64,
        budget: u64,
        scanned: u64,
        support: Vec<usize>,
    }

    enum Outcome {
        Found,
        Exhausted,
        OverBudget,
    }

    impl Search<'_> {
        // Chooses `remaining` more columns below `max_exclusive`, largest
        // index first so completed supports appear in colex order.
        fn descend(&mut self, remaining: usize, max_exclusive: usize, acc: u64) -> Outcome {
            if remaining == 0 {
                self.scanned += 1;
                if acc & self.g0_mask == 0 && acc >> self.g0_mask.count_ones() != 0 {
                    return Outcome::Found;
                }
                if self.scanned >= self.budget {
                    return Outcome::OverBudget;
                }
                return Outcome::Exhausted;
            }
            for j in (remaining - 1)..max_exclusive {
                self.support.push(j);
                match self.descend(remaining - 1, j, acc ^ self.cols[j]) {
                    Outcome::Exhausted => {
                        self.support.pop();
                    }
                    other => return other,
                }
            }
            Outcome::Exhausted
        }
    }

    let mut search = Search {
        cols: &cols,
        g0_mask,
        budget,
        scanned: 0,
        support: Vec::new(),
    };
    for w in 1..=n {
        match search.descend(w, n, 0) {
            Outcome::Found => {
                return Ok(DistanceWitness {
                    distance: w,
                    witness: BitVec::from_indices(n, search.support.iter().copied()),
                    candidates_scanned: search.scanned,
                });
            }
            Outcome::OverBudget => {
                return Err(AnalysisError::BudgetExceeded { budget });
            }
            Outcome::Exhausted => {}
        }
    }
    // Unreachable for k >= 1: any odd row is itself a witness.
    Err(AnalysisError::NoLogicalQubits)
}

/// Counts weight-2 logical Z operators acting nontrivially on qubit `a`:
/// column pairs equal on the even block and differing on row `a`.
pub fn weight2_logical_count(g: &TriorthogonalMatrix, a: usize) -> usize {
    assert!(a < g.k(), "logical qubit index out of range");
    let g0 = g.g0();
    let row_a = g.logical_row(a);
    let n = g.n();
    let g0_cols: Vec<BitVec> = (0..n).map(|j| g0.column(j)).collect();
    let mut count = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            if g0_cols[i] == g0_cols[j] && (row_a.get(i) != row_a.get(j)) {
                count += 1;
            }
        }
    }
    count
}

/// Largest input error rate below which one round strictly improves:
/// bisection on `q_max(p) - p` over `(0, 1/2)` after a coarse sign scan.
pub fn threshold(g: &TriorthogonalMatrix) -> Result<f64, AnalysisError> {
    let rates = Rates::new(g)?;
    if rates.k() == 0 {
        return Err(AnalysisError::NoLogicalQubits);
    }
    threshold_from_rates(|p| rates.output_error_max(p))
}

/// Threshold from an arbitrary worst-case rate function.
pub fn threshold_from_rates<F: Fn(f64) -> f64>(q_max: F) -> Result<f64, AnalysisError> {
    let h = |p: f64| q_max(p) - p;
    // The improvement region starts at 0+; probe small p first.
    let mut lo = None;
    for exp in (2..=9).rev() {
        let p = 10f64.powi(-exp);
        if h(p) < 0.0 {
            lo = Some(p);
            break;
        }
    }
    let Some(mut lo) = lo else {
        return Err(AnalysisError::NoThreshold);
    };
    const GRID: usize = 4096;
    let mut hi = None;
    for i in 1..=GRID {
        let p = 0.5 * i as f64 / GRID as f64;
        if p <= lo {
            continue;
        }
        if h(p) >= 0.0 {
            hi = Some(p);
            break;
        }
        lo = p;
    }
    let Some(mut hi) = hi else {
        // q stays below p on the whole interval.
        return Ok(0.5);
    };
    while hi - lo > THRESHOLD_TOLERANCE * 1e-2 {
        let mid = 0.5 * (lo + hi);
        if h(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The spaces attached to a triorthogonal matrix: dual bases, dimensions,
/// and the Z-distance of the induced code.
#[derive(Debug, Clone)]
pub struct CodeView {
    pub matrix: TriorthogonalMatrix,
    /// Basis of the dual of the full row span.
    pub g_dual: BitMatrix,
    /// Basis of the dual of the even block's span.
    pub g0_dual: BitMatrix,
    pub distance: usize,
}

impl CodeView {
    pub fn new(g: &TriorthogonalMatrix) -> Result<Self, AnalysisError> {
        let g_dual = {
            let rows: Vec<BitVec> = g.matrix().rows().cloned().collect();
            BitMatrix::from_rows(rows).nullspace()
        };
        let g0_dual = g.g0().nullspace();
        let distance = distance_z(g)?;
        Ok(Self {
            matrix: g.clone(),
            g_dual,
            g0_dual,
            distance,
        })
    }

    /// Every even-block row must be orthogonal to every row of the full
    /// matrix (the stabilizers commute).
    pub fn stabilizers_commute(&self) -> bool {
        let g0 = self.matrix.g0();
        let stabilizers: Vec<&BitVec> = g0.rows().collect();
        stabilizers
            .iter()
            .all(|s| self.matrix.matrix().rows().all(|r| !s.inner(r)))
    }

    /// `dim(G0^⊥) = k + dim(G^⊥)` must hold.
    pub fn dual_dimensions_consistent(&self) -> bool {
        self.g0_dual.row_count() == self.matrix.k() + self.g_dual.row_count()
    }
}
