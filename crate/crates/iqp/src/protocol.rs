//! The two-party sampling game: challenge generation with an obfuscated
//! quadratic-residue core, the prover's sampling step, the verifier's
//! hypothesis test, and the distribution-gap utilities that size it.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::codes::{LinearCode, QrError};
use crate::f2la::{BitMatrix, BitVec};
use crate::fmath;
use crate::xprog::{Distribution, XProgram, XprogError};

/// Fraction of samples orthogonal to the secret under honest quantum play
/// with the default angle: cos²(π/8) = (2+√2)/4.
pub const QUANTUM_RATE: f64 = 0.8535533905932737;

/// The same fraction achievable by the best published classical strategy
/// against quadratic-residue challenges.
pub const CLASSICAL_RATE: f64 = 0.75;

/// Default accept threshold: the midpoint of the two rates, equalizing the
/// two one-sided error exponents.
pub const DEFAULT_THRESHOLD: f64 = 0.8017766952966369;

/// Default minimum number of post-filter samples for a conclusive verdict.
pub const DEFAULT_MIN_SAMPLES: usize = 500;

/// Published half of a challenge: the obfuscated program matrix in canonical
/// column-echelon form (full column rank, no zero columns) and the angle.
#[derive(Clone, Debug)]
pub struct Challenge {
    public_matrix: BitMatrix,
    q: u64,
    theta: f64,
}

impl Challenge {
    pub fn from_parts(public_matrix: BitMatrix, q: u64, theta: f64) -> Self {
        let (canonical, _) = public_matrix.column_echelon();
        assert_eq!(
            canonical, public_matrix,
            "public matrix must be in canonical column-echelon form"
        );
        Challenge {
            public_matrix,
            q,
            theta,
        }
    }

    pub fn public_matrix(&self) -> &BitMatrix {
        &self.public_matrix
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn program(&self) -> XProgram {
        XProgram::new(self.public_matrix.clone(), self.theta)
    }
}

/// Retained half of a challenge: the secret direction, which published rows
/// came from the hidden code, and the generation inputs.
#[derive(Clone, Debug)]
pub struct Secret {
    s: BitVec,
    causal_rows: Vec<usize>,
    seed: u64,
    q: u64,
}

impl Secret {
    pub fn from_parts(s: BitVec, causal_rows: Vec<usize>, seed: u64, q: u64) -> Self {
        Secret {
            s,
            causal_rows,
            seed,
            q,
        }
    }

    pub fn s(&self) -> &BitVec {
        &self.s
    }

    pub fn causal_rows(&self) -> &[usize] {
        &self.causal_rows
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn q(&self) -> u64 {
        self.q
    }
}

/// Verifier verdict. Inconclusive means too few samples survived filtering.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    Reject,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Accept => "accept",
            Verdict::Reject => "reject",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// Outcome of one verification: the filtered sample set actually tested,
/// the verdict, and the test statistics.
#[derive(Debug, Clone)]
pub struct Transcript {
    /// Samples surviving the filter (zero strings and repeats removed).
    pub samples: Vec<BitVec>,
    pub verdict: Verdict,
    pub total_samples: usize,
    pub zero_dropped: usize,
    pub duplicates_dropped: usize,
    pub orthogonal: usize,
    /// Orthogonal fraction among filtered samples (0 when none survive).
    pub fraction: f64,
    pub threshold: f64,
    pub min_samples: usize,
    /// One-sided tail bound for seeing a fraction this low under honest
    /// quantum play.
    pub p_quantum: f64,
    /// One-sided tail bound for seeing a fraction this high from the best
    /// published classical strategy.
    pub p_classical: f64,
}

/// Generates a challenge/secret pair.
///
/// Recipe: take the q×(q+1)/2 quadratic-residue generator, append the
/// all-ones column, append `extra_rows` random rows carrying 0 in that
/// column, shuffle all rows, and publish the canonical column-echelon
/// reduction. The appended column survives as the causal-row indicator in
/// the reduced column space, so the secret is recovered by one linear solve
/// (unique because the published matrix has full column rank).
pub fn gen_challenge(q: u64, extra_rows: usize, seed: u64) -> Result<(Challenge, Secret), QrError> {
    let code = LinearCode::quadratic_residue(q)?;
    let g = code.generator();
    let qn = q as usize;
    let half = qn.div_ceil(2);
    let total_rows = qn + extra_rows;
    let mut full = BitMatrix::zeros(total_rows, half + 1);
    for r in 0..qn {
        for c in 0..half {
            if g.get(r, c) {
                full.set(r, c, true);
            }
        }
        full.set(r, half, true);
    }
    let mut rng = crate::rng::stream(seed, "protocol.extra-rows");
    for r in qn..total_rows {
        for c in 0..half {
            if rng.gen::<bool>() {
                full.set(r, c, true);
            }
        }
    }
    let mut perm: Vec<usize> = (0..total_rows).collect();
    let mut shuffle_rng = crate::rng::stream(seed, "protocol.shuffle");
    perm.shuffle(&mut shuffle_rng);
    let shuffled = full.take_rows(&perm);
    let causal_rows: Vec<usize> = (0..total_rows).filter(|&i| perm[i] < qn).collect();
    let (public_matrix, _) = shuffled.column_echelon();
    let indicator = BitVec::from_fn(total_rows, |i| perm[i] < qn);
    let s = public_matrix
        .solve(&indicator)
        .expect("causal indicator is the appended column, hence in the column space");
    let challenge = Challenge {
        public_matrix,
        q,
        theta: core::f64::consts::FRAC_PI_8,
    };
    let secret = Secret {
        s,
        causal_rows,
        seed,
        q,
    };
    Ok((challenge, secret))
}

/// Honest prover: samples the challenge program `count` times.
pub fn prove(challenge: &Challenge, count: usize, seed: u64) -> Result<Vec<BitVec>, XprogError> {
    challenge.program().sample(count, seed)
}

/// Verifier hypothesis test.
///
/// Drops all-zero samples, deduplicates exact repeats (first occurrence
/// kept), measures the fraction orthogonal to the secret among the
/// survivors, and accepts iff that fraction reaches `threshold` with at
/// least `min_samples` survivors. Both tail probabilities are Hoeffding
/// bounds exp(−2m·gap²).
pub fn verify(
    samples: &[BitVec],
    secret: &Secret,
    threshold: f64,
    min_samples: usize,
) -> Transcript {
    let n = secret.s.len();
    let mut seen = BTreeSet::new();
    let mut filtered = Vec::new();
    let mut zero_dropped = 0usize;
    let mut duplicates_dropped = 0usize;
    for sample in samples {
        assert_eq!(sample.len(), n, "sample width mismatch");
        if sample.is_zero() {
            zero_dropped += 1;
        } else if seen.insert(sample.clone()) {
            filtered.push(sample.clone());
        } else {
            duplicates_dropped += 1;
        }
    }
    let m = filtered.len();
    let orthogonal = filtered.iter().filter(|x| !x.dot(&secret.s)).count();
    let fraction = if m == 0 {
        0.0
    } else {
        orthogonal as f64 / m as f64
    };
    let hoeffding = |gap: f64| {
        if m == 0 || gap <= 0.0 {
            1.0
        } else {
            fmath::exp(-2.0 * m as f64 * gap * gap)
        }
    };
    let p_quantum = hoeffding(QUANTUM_RATE - fraction);
    let p_classical = hoeffding(fraction - CLASSICAL_RATE);
    let verdict = if m < min_samples {
        Verdict::Inconclusive
    } else if fraction >= threshold {
        Verdict::Accept
    } else {
        Verdict::Reject
    };
    Transcript {
        samples: filtered,
        verdict,
        total_samples: samples.len(),
        zero_dropped,
        duplicates_dropped,
        orthogonal,
        fraction,
        threshold,
        min_samples,
        p_quantum,
        p_classical,
    }
}

/// ℓ_p size of the pointwise difference of two distributions on one domain;
/// `p` may be `f64::INFINITY` for the max norm. At p=1 this equals twice the
/// largest probability gap over events.
pub fn stat_distance(a: &Distribution, b: &Distribution, p: f64) -> f64 {
    assert_eq!(a.qubits(), b.qubits(), "domain mismatch");
    assert!(p >= 1.0, "p must be at least 1");
    let diffs = a.probs().iter().zip(b.probs()).map(|(x, y)| (x - y).abs());
    if p.is_infinite() {
        diffs.fold(0.0, f64::max)
    } else if p == 1.0 {
        diffs.sum()
    } else {
        fmath::powf(diffs.map(|d| fmath::powf(d, p)).sum::<f64>(), 1.0 / p)
    }
}

/// Largest |log ratio| over the common support; infinite when the supports
/// differ at all.
pub fn mult_gap(a: &Distribution, b: &Distribution) -> f64 {
    assert_eq!(a.qubits(), b.qubits(), "domain mismatch");
    let mut worst = 0.0f64;
    for (&x, &y) in a.probs().iter().zip(b.probs()) {
        match (x > 0.0, y > 0.0) {
            (false, false) => {}
            (true, true) => worst = worst.max(fmath::abs(fmath::ln(x / y))),
            _ => return f64::INFINITY,
        }
    }
    worst
}

/// Guaranteed bias magnitude after a k-wide majority vote over independent
/// ±1 readings of bias `b`: 1 − 2·exp(−k·b²/2). Negative (vacuous) for
/// small k·b².
pub fn amplify_bound(b: f64, k: u32) -> f64 {
    assert!((-1.0..=1.0).contains(&b), "bias must lie in [−1, 1]");
    assert_eq!(k % 2, 1, "majority vote needs odd k");
    1.0 - 2.0 * fmath::exp(-(k as f64) * b * b / 2.0)
}

/// Smallest sample count N with exp(−2N(gap/2)²) ≤ max_error.
pub fn plan_samples(gap: f64, max_error: f64) -> usize {
    assert!(gap > 0.0 && gap < 1.0, "gap must lie in (0,1)");
    assert!(max_error > 0.0, "error bound must be positive");
    if max_error >= 1.0 {
        return 0;
    }
    let rate = 2.0 * (gap / 2.0) * (gap / 2.0);
    let mut n = fmath::ceil(fmath::ln(1.0 / max_error) / rate) as usize;
    while n > 0 && fmath::exp(-(rate * (n - 1) as f64)) <= max_error {
        n -= 1;
    }
    while fmath::exp(-(rate * n as f64)) > max_error {
        n += 1;
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_constants_are_consistent() {
        let c = fmath::cos(core::f64::consts::FRAC_PI_8);
        assert!((QUANTUM_RATE - c * c).abs() < 1e-15);
        assert_eq!(DEFAULT_THRESHOLD, (QUANTUM_RATE + CLASSICAL_RATE) / 2.0);
    }

    #[test]
    fn challenge_shape_for_q7() {
        let (challenge, secret) = gen_challenge(7, 7, 42).unwrap();
        assert_eq!(challenge.public_matrix().rows(), 14);
        assert!(challenge.public_matrix().cols() <= 5);
        assert_eq!(secret.causal_rows().len(), 7);
        assert_eq!(challenge.q(), 7);
        assert_eq!(challenge.theta(), core::f64::consts::FRAC_PI_8);
    }

    #[test]
    fn secret_satisfies_row_membership() {
        for (q, seed) in [(7u64, 1u64), (7, 2), (23, 3), (31, 4)] {
            let (challenge, secret) = gen_challenge(q, q as usize, seed).unwrap();
            let m = challenge.public_matrix();
            let causal: BTreeSet<usize> = secret.causal_rows().iter().copied().collect();
            for r in 0..m.rows() {
                assert_eq!(
                    m.row_vec(r).dot(secret.s()),
                    causal.contains(&r),
                    "q={q} seed={seed} row {r}"
                );
            }
        }
    }

    #[test]
    fn no_obfuscation_is_degenerate_but_legal() {
        let (challenge, secret) = gen_challenge(7, 0, 9).unwrap();
        assert_eq!(challenge.public_matrix().rows(), 7);
        let causal: BTreeSet<usize> = secret.causal_rows().iter().copied().collect();
        assert_eq!(causal.len(), 7);
        for r in 0..7 {
            assert!(challenge.public_matrix().row_vec(r).dot(secret.s()));
        }
    }

    #[test]
    fn large_modulus_generates() {
        let (challenge, secret) = gen_challenge(487, 487, 5).unwrap();
        assert_eq!(challenge.public_matrix().rows(), 974);
        assert!(challenge.public_matrix().cols() <= 245);
        assert_eq!(secret.causal_rows().len(), 487);
        // spot-check the membership invariant on a few rows
        let causal: BTreeSet<usize> = secret.causal_rows().iter().copied().collect();
        for r in (0..974).step_by(97) {
            assert_eq!(
                challenge.public_matrix().row_vec(r).dot(secret.s()),
                causal.contains(&r)
            );
        }
    }

    #[test]
    fn generation_is_seed_deterministic() {
        let (c1, s1) = gen_challenge(7, 7, 77).unwrap();
        let (c2, s2) = gen_challenge(7, 7, 77).unwrap();
        assert_eq!(c1.public_matrix(), c2.public_matrix());
        assert_eq!(s1.s(), s2.s());
        assert_eq!(s1.causal_rows(), s2.causal_rows());
    }

    #[test]
    fn prove_reports_infeasible_size() {
        let (challenge, _) = gen_challenge(487, 487, 5).unwrap();
        assert!(matches!(
            prove(&challenge, 1, 0),
            Err(XprogError::TooManyQubits { .. })
        ));
    }

    #[test]
    fn verify_filters_and_is_order_invariant() {
        let (_, secret) = gen_challenge(7, 7, 42).unwrap();
        let n = secret.s().len();
        let mut samples = Vec::new();
        samples.push(BitVec::zeros(n));
        for i in 1u64..40 {
            samples.push(BitVec::from_u64(i % 20, n)); // duplicates beyond 20
        }
        let t = verify(&samples, &secret, DEFAULT_THRESHOLD, 10);
        assert_eq!(t.total_samples, 40);
        assert_eq!(t.zero_dropped, 1 + 1); // explicit zero + i=20 ≡ 0
        assert_eq!(t.samples.len(), 19);
        assert_eq!(t.duplicates_dropped, 40 - 2 - 19);
        let mut reversed: Vec<BitVec> = samples.iter().rev().cloned().collect();
        let t2 = verify(&reversed, &secret, DEFAULT_THRESHOLD, 10);
        assert_eq!(t.fraction, t2.fraction);
        assert_eq!(t.verdict, t2.verdict);
        reversed.sort();
        let t3 = verify(&reversed, &secret, DEFAULT_THRESHOLD, 10);
        assert_eq!(t.orthogonal, t3.orthogonal);
    }

    #[test]
    fn verify_all_zero_is_inconclusive() {
        let (_, secret) = gen_challenge(7, 7, 42).unwrap();
        let samples = alloc::vec![BitVec::zeros(secret.s().len()); 100];
        let t = verify(&samples, &secret, DEFAULT_THRESHOLD, DEFAULT_MIN_SAMPLES);
        assert_eq!(t.verdict, Verdict::Inconclusive);
        assert_eq!(t.samples.len(), 0);
        assert_eq!(t.p_quantum, 1.0);
        assert_eq!(t.p_classical, 1.0);
    }

    #[test]
    fn stat_distance_basics() {
        let p = Distribution::new(alloc::vec![1.0, 0.0]).unwrap();
        let q = Distribution::new(alloc::vec![0.0, 1.0]).unwrap();
        assert_eq!(stat_distance(&p, &p, 1.0), 0.0);
        assert!((stat_distance(&p, &q, 1.0) - 2.0).abs() < 1e-15);
        assert!((stat_distance(&p, &q, f64::INFINITY) - 1.0).abs() < 1e-15);
        assert!((stat_distance(&p, &q, 2.0) - core::f64::consts::SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn mult_gap_basics() {
        let p = Distribution::new(alloc::vec![0.5, 0.5]).unwrap();
        let q = Distribution::new(alloc::vec![0.25, 0.75]).unwrap();
        let r = Distribution::new(alloc::vec![1.0, 0.0]).unwrap();
        assert_eq!(mult_gap(&p, &p), 0.0);
        assert!((mult_gap(&p, &q) - fmath::ln(2.0)).abs() < 1e-12);
        assert!(mult_gap(&p, &r).is_infinite());
    }

    #[test]
    fn amplify_bound_formula() {
        let b1 = amplify_bound(1.0, 1);
        assert!((b1 - (1.0 - 2.0 * fmath::exp(-0.5))).abs() < 1e-15);
        assert!(amplify_bound(0.0, 3) < 0.0);
    }

    #[test]
    fn sample_planning() {
        assert_eq!(plan_samples(0.1036, 1e-9), 3862);
        assert_eq!(plan_samples(0.5, 1.0), 0);
        let n = plan_samples(0.2, 1e-6);
        let n_half = plan_samples(0.1, 1e-6);
        let ratio = n_half as f64 / n as f64;
        assert!((3.9..4.1).contains(&ratio), "ratio {ratio}");
    }
}
