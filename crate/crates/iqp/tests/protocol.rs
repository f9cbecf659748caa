use iqp::attack;
use iqp::f2la::random_invertible;
use iqp::protocol::{
    amplify_bound, gen_challenge, mult_gap, plan_samples, prove, stat_distance, verify, Verdict,
    CLASSICAL_RATE, DEFAULT_THRESHOLD, QUANTUM_RATE,
};
use iqp::xprog::Distribution;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

#[test]
fn challenge_membership_invariant_many_instances() {
    let mut trial = 0u64;
    for q in [7u64, 23, 31] {
        for extra in [0usize, 3, q as usize, 2 * q as usize] {
            for seed in 0..4 {
                trial += 1;
                let (challenge, secret) = gen_challenge(q, extra, 1000 * trial + seed).unwrap();
                let m = challenge.public_matrix();
                assert_eq!(m.rows(), q as usize + extra);
                assert_eq!(m.rank(), m.cols(), "public matrix must have full column rank");
                let causal: std::collections::BTreeSet<usize> =
                    secret.causal_rows().iter().copied().collect();
                assert_eq!(causal.len(), q as usize);
                for r in 0..m.rows() {
                    assert_eq!(
                        m.row_vec(r).dot(secret.s()),
                        causal.contains(&r),
                        "q={q} extra={extra} seed={seed} row {r}"
                    );
                }
            }
        }
    }
    assert_eq!(trial, 48);
}

#[test]
fn public_matrix_is_canonical_and_scramble_invariant() {
    for seed in 0..20 {
        let (challenge, _) = gen_challenge(23, 11, seed).unwrap();
        let m = challenge.public_matrix();
        let (again, _) = m.column_echelon();
        assert_eq!(&again, m, "canonical form must be idempotent");
        let a = random_invertible(m.cols(), 900 + seed);
        let scrambled = m.mul(&a);
        let (recovered, _) = scrambled.column_echelon();
        assert_eq!(&recovered, m, "column scrambling must not change the form");
    }
}

#[test]
fn honest_prover_is_accepted() {
    for seed in 0..10u64 {
        let (challenge, secret) = gen_challenge(31, 31, 50 + seed).unwrap();
        let samples = prove(&challenge, 2000, 7000 + seed).unwrap();
        let t = verify(&samples, &secret, DEFAULT_THRESHOLD, 500);
        assert_eq!(
            t.verdict,
            Verdict::Accept,
            "seed {seed}: fraction {} over {} filtered",
            t.fraction,
            t.samples.len()
        );
        assert!(t.fraction > DEFAULT_THRESHOLD);
        assert!(t.p_classical < 1e-10, "p_classical {}", t.p_classical);
        assert!(t.p_quantum > 1e-3, "p_quantum {}", t.p_quantum);
    }
}

#[test]
fn spoofing_attack_is_rejected() {
    for seed in 0..10u64 {
        let (challenge, secret) = gen_challenge(31, 31, 80 + seed).unwrap();
        let samples = attack::y_sample(&challenge.program(), 2000, 9000 + seed);
        let t = verify(&samples, &secret, DEFAULT_THRESHOLD, 500);
        assert_eq!(
            t.verdict,
            Verdict::Reject,
            "seed {seed}: fraction {} over {} filtered",
            t.fraction,
            t.samples.len()
        );
        assert!(t.p_quantum < 1e-10, "p_quantum {}", t.p_quantum);
        assert!(t.p_classical > 1e-6, "p_classical {}", t.p_classical);
    }
}

#[test]
fn small_instances_stay_inconclusive_with_default_floor() {
    // A q=7 challenge lives on at most 5 qubits: at most 31 distinct nonzero
    // samples can ever survive the filter, so the default floor cannot be met.
    let (challenge, secret) = gen_challenge(7, 7, 1).unwrap();
    assert!(challenge.public_matrix().cols() <= 5);
    let samples = prove(&challenge, 5000, 2).unwrap();
    let t = verify(&samples, &secret, DEFAULT_THRESHOLD, 500);
    assert_eq!(t.verdict, Verdict::Inconclusive);
    assert!(t.samples.len() <= 31);
}

fn random_distribution(outcomes: usize, seed: u64) -> Distribution {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let raw: Vec<f64> = (0..outcomes).map(|_| rng.gen::<f64>() + 1e-3).collect();
    let total: f64 = raw.iter().sum();
    Distribution::new(raw.into_iter().map(|x| x / total).collect()).unwrap()
}

#[test]
fn l1_distance_matches_event_enumeration() {
    for seed in 0..10 {
        let p = random_distribution(8, seed);
        let q = random_distribution(8, 100 + seed);
        let l1 = stat_distance(&p, &q, 1.0);
        let mut worst_event_gap = 0.0f64;
        for event in 0u32..256 {
            let mut gap = 0.0;
            for x in 0..8 {
                if event >> x & 1 == 1 {
                    gap += p.prob(x) - q.prob(x);
                }
            }
            worst_event_gap = worst_event_gap.max(gap.abs());
        }
        assert!((l1 - 2.0 * worst_event_gap).abs() < 1e-12);
        assert!(stat_distance(&p, &q, f64::INFINITY) <= stat_distance(&p, &q, 2.0));
        assert!(stat_distance(&p, &q, 2.0) <= l1 + 1e-12);
    }
}

fn product(a: &Distribution, b: &Distribution) -> Distribution {
    let mut probs = Vec::with_capacity(a.probs().len() * b.probs().len());
    for &y in b.probs() {
        for &x in a.probs() {
            probs.push(x * y);
        }
    }
    Distribution::new(probs).unwrap()
}

#[test]
fn mult_gap_ignores_common_factors() {
    for seed in 0..10 {
        let p = random_distribution(8, 200 + seed);
        let q = random_distribution(8, 300 + seed);
        let r = random_distribution(4, 400 + seed);
        let direct = mult_gap(&p, &q);
        let lifted = mult_gap(&product(&p, &r), &product(&q, &r));
        assert!((direct - lifted).abs() < 1e-12);
        let swapped = mult_gap(&q, &p);
        assert!((direct - swapped).abs() < 1e-12);
    }
}

#[test]
fn majority_vote_beats_the_amplification_bound() {
    // Exact binomial tail: bias 0.2 means heads probability 0.6.
    let (n, p) = (101u32, 0.6f64);
    let mut pmf = (1.0 - p).powi(n as i32);
    let mut tail = 0.0;
    for j in 0..=n {
        if j >= 51 {
            tail += pmf;
        }
        if j < n {
            pmf *= (n - j) as f64 / (j + 1) as f64 * (p / (1.0 - p));
        }
    }
    let true_bias = 2.0 * tail - 1.0;
    let bound = amplify_bound(0.2, 101);
    assert!((0.73..0.74).contains(&bound), "bound {bound}");
    assert!(true_bias >= bound, "true {true_bias} vs bound {bound}");
    assert!(amplify_bound(0.2, 1) <= 0.2);
}

#[test]
fn planning_matches_the_verifier_gap() {
    assert_eq!(plan_samples(0.1036, 1e-9), 3862);
    let exact_gap = plan_samples(QUANTUM_RATE - CLASSICAL_RATE, 1e-9);
    assert!((3860..=3870).contains(&exact_gap), "got {exact_gap}");
    // The planned count makes the Hoeffding tail at half the gap just close.
    let n = plan_samples(0.2, 1e-6) as f64;
    let tail = (-2.0 * n * 0.01f64).exp();
    assert!(tail <= 1e-6);
    let tail_prev = (-2.0 * (n - 1.0) * 0.01f64).exp();
    assert!(tail_prev > 1e-6);
}
