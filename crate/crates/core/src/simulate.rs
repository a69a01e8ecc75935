//! Monte Carlo oracle for the distillation subroutine.
//!
//! The classical error model: each of the `n` input magic states carries
//! an independent Z error with probability `p`; the subroutine accepts
//! when the error vector `f` has trivial syndrome against the even block
//! (X-type stabilizers), and an accepted run leaves logical qubit `a`
//! flipped exactly when the inner product of `f` with odd row `a` is 1.
//! Clifford operations themselves are treated as perfect throughout.
//!
//! Randomness is counter-based: the stream for shot `i` is keyed by
//! `(seed, i)`, so splitting the shot range across threads reproduces
//! the serial counts bit for bit.

use serde::Serialize;

use crate::gf2::BitVec;
use crate::ortho::TriorthogonalMatrix;
use crate::rng::SplitMix64;

/// Below this error probability, bits are sampled by geometric skipping
/// instead of one draw per qubit.
const GEOMETRIC_THRESHOLD: f64 = 0.05;

/// Outcome counts of a simulation run, with binomial standard errors.
#[derive(Debug, Clone, Serialize)]
pub struct SimulationResult {
    pub shots: u64,
    pub accepted: u64,
    pub p_s_hat: f64,
    pub p_s_se: f64,
    /// Per-logical-qubit error frequency among accepted shots.
    pub q_hat: Vec<f64>,
    pub q_se: Vec<f64>,
    pub per_qubit_errors: Vec<u64>,
    pub seed: u64,
}

/// Which subroutine layout the resource count describes. The two
/// variants produce identical output statistics, so the simulator itself
/// is variant-free.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Variant {
    /// Encode-then-measure: n ancillas, n + m - k Pauli measurements.
    Main,
    /// Measurement-only: no extra qubits, n - k Pauli measurements.
    MeasureOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ResourceProfile {
    pub variant: Variant,
    pub extra_qubits: usize,
    pub pauli_measurements: usize,
}

pub fn resources(g: &TriorthogonalMatrix, variant: Variant) -> ResourceProfile {
    let (n, m, k) = (g.n(), g.m(), g.k());
    match variant {
        Variant::Main => ResourceProfile {
            variant,
            extra_qubits: n,
            pauli_measurements: n + m - k,
        },
        Variant::MeasureOnly => ResourceProfile {
            variant,
            extra_qubits: 0,
            pauli_measurements: n - k,
        },
    }
}

struct ShotContext {
    n: usize,
    p: f64,
    seed: u64,
    g0_words: Vec<Vec<u64>>,
    g1_words: Vec<Vec<u64>>,
}

impl ShotContext {
    fn new(g: &TriorthogonalMatrix, p: f64, seed: u64) -> Self {
        Self {
            n: g.n(),
            p,
            seed,
            g0_words: g.g0().rows().map(|r| r.words().to_vec()).collect(),
            g1_words: g.g1().rows().map(|r| r.words().to_vec()).collect(),
        }
    }

    fn sample_error(&self, rng: &mut SplitMix64, f: &mut [u64]) {
        f.fill(0);
        if self.p <= 0.0 {
            return;
        }
        if self.p < GEOMETRIC_THRESHOLD {
            // Geometric skipping: jump straight to the next error site.
            let log_keep = (1.0 - self.p).ln();
            let mut pos = 0usize;
            loop {
                let u = 1.0 - rng.next_f64(); // (0, 1]
                let skip = (u.ln() / log_keep).floor();
                if skip >= (self.n - pos) as f64 {
                    break;
                }
                pos += skip as usize;
                f[pos / 64] |= 1u64 << (pos % 64);
                pos += 1;
                if pos >= self.n {
                    break;
                }
            }
        } else {
            for j in 0..self.n {
                if rng.next_f64() < self.p {
                    f[j / 64] |= 1u64 << (j % 64);
                }
            }
        }
    }

    /// Runs shots [begin, end); returns (accepted, per-qubit error counts).
    fn run_range(&self, begin: u64, end: u64) -> (u64, Vec<u64>) {
        let words = self.n.div_ceil(64);
        let mut f = vec![0u64; words];
        let mut accepted = 0u64;
        let mut per_qubit = vec![0u64; self.g1_words.len()];
        'shots: for shot in begin..end {
            let mut rng = SplitMix64::keyed(self.seed, shot);
            self.sample_error(&mut rng, &mut f);
            for row in &self.g0_words {
                let parity: u32 = row
                    .iter()
                    .zip(f.iter())
                    .map(|(a, b)| (a & b).count_ones())
                    .sum();
                if parity % 2 == 1 {
                    continue 'shots;
                }
            }
            accepted += 1;
            for (a, row) in self.g1_words.iter().enumerate() {
                let parity: u32 = row
                    .iter()
                    .zip(f.iter())
                    .map(|(a, b)| (a & b).count_ones())
                    .sum();
                if parity % 2 == 1 {
                    per_qubit[a] += 1;
                }
            }
        }
        (accepted, per_qubit)
    }
}

/// Simulates `shots` runs of the subroutine on error rate `p`.
pub fn simulate(g: &TriorthogonalMatrix, p: f64, shots: u64, seed: u64) -> SimulationResult {
    simulate_with_threads(g, p, shots, seed, 1)
}

/// Shot-parallel simulation; the shot partition does not affect counts.
///
/// # Panics
/// Panics if `p` is outside `[0, 1]`, `shots` is zero, or `threads` is
/// zero.
pub fn simulate_with_threads(
    g: &TriorthogonalMatrix,
    p: f64,
    shots: u64,
    seed: u64,
    threads: usize,
) -> SimulationResult {
    assert!((0.0..=1.0).contains(&p), "p must lie in [0, 1]");
    assert!(shots >= 1, "at least one shot is required");
    assert!(threads >= 1, "at least one thread is required");
    let ctx = ShotContext::new(g, p, seed);
    let threads = threads.min(shots as usize).max(1);

    let (accepted, per_qubit) = if threads == 1 {
        ctx.run_range(0, shots)
    } else {
        let chunk = shots.div_ceil(threads as u64);
        let parts: Vec<(u64, Vec<u64>)> = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..threads as u64)
                .map(|t| {
                    let begin = t * chunk;
                    let end = ((t + 1) * chunk).min(shots);
                    let ctx = &ctx;
                    scope.spawn(move || ctx.run_range(begin, end))
                })
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        });
        let mut accepted = 0u64;
        let mut per_qubit = vec![0u64; g.k()];
        for (a, pq) in parts {
            accepted += a;
            for (total, part) in per_qubit.iter_mut().zip(pq) {
                *total += part;
            }
        }
        (accepted, per_qubit)
    };

    let p_s_hat = accepted as f64 / shots as f64;
    let p_s_se = (p_s_hat * (1.0 - p_s_hat) / shots as f64).sqrt();
    let (q_hat, q_se): (Vec<f64>, Vec<f64>) = per_qubit
        .iter()
        .map(|&errors| {
            if accepted == 0 {
                (0.0, 0.0)
            } else {
                let q = errors as f64 / accepted as f64;
                (q, (q * (1.0 - q) / accepted as f64).sqrt())
            }
        })
        .unzip();

    SimulationResult {
        shots,
        accepted,
        p_s_hat,
        p_s_se,
        q_hat,
        q_se,
        per_qubit_errors: per_qubit,
        seed,
    }
}

/// Test hook: the sampled error vector for one shot.
#[doc(hidden)]
pub fn sample_shot_error(g: &TriorthogonalMatrix, p: f64, seed: u64, shot: u64) -> BitVec {
    let ctx = ShotContext::new(g, p, seed);
    let mut f = vec![0u64; g.n().div_ceil(64)];
    let mut rng = SplitMix64::keyed(seed, shot);
    ctx.sample_error(&mut rng, &mut f);
    BitVec::from_bits(g.n(), (0..g.n()).map(|j| (f[j / 64] >> (j % 64)) & 1 == 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis;
    use crate::ortho::{builtin, generate_gk};

    #[test]
    fn zero_error_rate_accepts_everything() {
        let g = generate_gk(2).unwrap();
        let r = simulate(&g, 0.0, 1000, 7);
        assert_eq!(r.accepted, 1000);
        assert_eq!(r.p_s_hat, 1.0);
        assert!(r.q_hat.iter().all(|&q| q == 0.0));
    }

    #[test]
    fn full_error_rate_is_deterministic() {
        // p = 1 makes f the all-ones vector: even stabilizer rows always
        // accept, and every odd row reads a logical flip.
        let g = generate_gk(2).unwrap();
        let r = simulate(&g, 1.0, 500, 3);
        assert_eq!(r.accepted, 500);
        assert!(r.q_hat.iter().all(|&q| q == 1.0));
    }

    #[test]
    fn identical_seeds_reproduce_counts() {
        let g = generate_gk(4).unwrap();
        let a = simulate(&g, 0.02, 20_000, 99);
        let b = simulate(&g, 0.02, 20_000, 99);
        assert_eq!(a.accepted, b.accepted);
        assert_eq!(a.per_qubit_errors, b.per_qubit_errors);
        let c = simulate(&g, 0.02, 20_000, 100);
        assert_ne!(
            (a.accepted, &a.per_qubit_errors),
            (c.accepted, &c.per_qubit_errors)
        );
    }

    #[test]
    fn thread_partition_does_not_change_counts() {
        let g = generate_gk(2).unwrap();
        let serial = simulate(&g, 0.03, 30_000, 5);
        for threads in [2, 3, 7] {
            let parallel = simulate_with_threads(&g, 0.03, 30_000, 5, threads);
            assert_eq!(parallel.accepted, serial.accepted, "threads={threads}");
            assert_eq!(parallel.per_qubit_errors, serial.per_qubit_errors);
        }
    }

    #[test]
    fn geometric_and_per_bit_sampling_match_the_binomial_mean() {
        let g = builtin("BH49").unwrap();
        // One p on each side of the sampler switch.
        for (p, seed) in [(0.04, 11u64), (0.06, 12u64)] {
            let shots = 40_000u64;
            let mut total_bits = 0u64;
            for shot in 0..shots {
                total_bits += sample_shot_error(&g, p, seed, shot).weight() as u64;
            }
            let mean = total_bits as f64 / shots as f64;
            let expect = 49.0 * p;
            let se = (49.0 * p * (1.0 - p) / shots as f64).sqrt();
            assert!(
                (mean - expect).abs() < 5.0 * se,
                "p={p}: mean {mean} vs {expect} (se {se})"
            );
        }
    }

    #[test]
    fn agreement_with_analytic_rates() {
        // 4-standard-error agreement for both sampler regimes.
        for (name, p) in [("G2", 0.01), ("G4", 0.05), ("RM15", 0.02)] {
            let g = builtin(name).unwrap();
            let shots = 400_000;
            let r = simulate(&g, p, shots, 2024);
            let exact_ps = analysis::success_probability(&g, p).unwrap();
            assert!(
                (r.p_s_hat - exact_ps).abs() < 4.0 * r.p_s_se.max(1e-9),
                "{name}: P_s {} vs {exact_ps} (se {})",
                r.p_s_hat,
                r.p_s_se
            );
            for a in 0..g.k() {
                let exact_q = analysis::output_error(&g, a, p).unwrap();
                assert!(
                    (r.q_hat[a] - exact_q).abs() < 4.0 * r.q_se[a].max(1e-9),
                    "{name} qubit {a}: q {} vs {exact_q} (se {})",
                    r.q_hat[a],
                    r.q_se[a]
                );
            }
        }
    }

    #[test]
    fn agreement_quantile_across_seeded_repetitions() {
        // Over a grid of codes and error rates, at least 95% of seeded
        // repetitions must land within 4 standard errors of the exact
        // rates. Standard errors are taken around the true values so the
        // check stays meaningful when zero logical errors are observed.
        let shots = 200_000u64;
        let reps = 20u64;
        for name in ["G2", "G4", "RM15"] {
            let g = builtin(name).unwrap();
            for p in [0.05, 0.01, 0.001] {
                let exact_ps = analysis::success_probability(&g, p).unwrap();
                let exact_q: Vec<f64> = (0..g.k())
                    .map(|a| analysis::output_error(&g, a, p).unwrap())
                    .collect();
                let mut within = 0;
                for rep in 0..reps {
                    let r = simulate(&g, p, shots, 7000 + rep);
                    let ps_se = (exact_ps * (1.0 - exact_ps) / shots as f64).sqrt();
                    let mut ok = (r.p_s_hat - exact_ps).abs() < 4.0 * ps_se;
                    for a in 0..g.k() {
                        let q_se =
                            (exact_q[a] * (1.0 - exact_q[a]) / r.accepted as f64).sqrt();
                        ok &= (r.q_hat[a] - exact_q[a]).abs() < 4.0 * q_se;
                    }
                    if ok {
                        within += 1;
                    }
                }
                assert!(
                    within * 100 >= reps * 95,
                    "{name} at p={p}: only {within}/{reps} repetitions within 4 SE"
                );
            }
        }
    }

    #[test]
    fn resource_profiles() {
        let g2 = generate_gk(2).unwrap();
        assert_eq!(
            resources(&g2, Variant::Main),
            ResourceProfile {
                variant: Variant::Main,
                extra_qubits: 14,
                pauli_measurements: 17
            }
        );
        assert_eq!(
            resources(&g2, Variant::MeasureOnly),
            ResourceProfile {
                variant: Variant::MeasureOnly,
                extra_qubits: 0,
                pauli_measurements: 12
            }
        );
        let bh = builtin("BH49").unwrap();
        assert_eq!(resources(&bh, Variant::MeasureOnly).pauli_measurements, 48);
        assert_eq!(resources(&bh, Variant::Main).pauli_measurements, 49 + 14 - 1);
    }
}
