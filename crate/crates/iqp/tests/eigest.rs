use iqp::eigest::{
    cf_recover, decode, dlog_demo, make_schedule, partition_identity, sample_bits,
    sample_bits_traced, BinaryField, ControlSchedule, DlogError, OracleError, PermutationOracle,
    PhaseSamples, DEFAULT_ETA,
};
use iqp::f2la::BitMatrix;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[test]
fn noiseless_rationals_round_trip() {
    // Odd denominators have unique binary expansions, so the decoder must
    // reproduce the truncation exactly and continued fractions must land.
    let n = 8usize;
    let (t, d) = (2 * n, 6);
    let mut rng = ChaCha12Rng::seed_from_u64(1);
    for trial in 0..1000 {
        let den = 2 * rng.gen_range(1..128u64) + 1; // odd in [3, 255]
        let num = rng.gen_range(0..=den / 2);
        let samples = PhaseSamples::noiseless(t, d, num, den);
        let bits = decode(&samples, t, d, DEFAULT_ETA);
        let (p, q) = cf_recover(&bits, 1 << n);
        let g = gcd(num, den);
        assert_eq!(
            (p, q),
            (num / g, den / g),
            "trial {trial}: {num}/{den} decoded as {p}/{q}"
        );
    }
}

#[test]
fn end_to_end_recovery_rate() {
    let schedule = make_schedule(8, 0.05);
    let mut rng = ChaCha12Rng::seed_from_u64(99);
    let mut successes = 0usize;
    let runs = 200;
    for run in 0..runs {
        let mut table: Vec<u32> = (0..256).collect();
        table.shuffle(&mut rng);
        let oracle = PermutationOracle::table(table).unwrap();
        let (samples, trace) = sample_bits_traced(&oracle, &schedule, 10_000 + run);
        let bits = decode(&samples, schedule.t(), schedule.d(), DEFAULT_ETA);
        let (p, q) = cf_recover(&bits, 1 << 8);
        let folded = trace.kappa.min(trace.q - trace.kappa) % trace.q;
        let g = gcd(folded, trace.q).max(1);
        if (p, q) == (folded / g, trace.q / g) {
            successes += 1;
        }
    }
    assert!(
        successes >= 190,
        "only {successes}/{runs} runs recovered the phase"
    );
}

#[test]
fn sampler_marginals_match_the_phase() {
    let schedule = ControlSchedule::from_parts(6, 3, 2000);
    let table = vec![1u32, 2, 3, 4, 0]; // single 5-cycle
    let oracle = PermutationOracle::table(table).unwrap();
    let (samples, trace) = sample_bits_traced(&oracle, &schedule, 31);
    assert_eq!(trace.q, 5);
    for (alpha, beta) in schedule.pairs() {
        let c = schedule.c(alpha, beta);
        let theory = {
            let r = (c * trace.kappa % trace.q) as f64;
            let s = (std::f64::consts::PI * r / trace.q as f64).sin();
            s * s
        };
        let sigma = (theory * (1.0 - theory) / 2000.0).sqrt().max(1e-3);
        let mu = samples.mu(alpha, beta);
        assert!(
            (mu - theory).abs() < 4.0 * sigma,
            "entry ({alpha},{beta}): mu {mu} vs theory {theory}"
        );
    }
}

#[test]
fn identity_permutation_has_zero_phase() {
    let oracle = PermutationOracle::table((0..16).collect()).unwrap();
    let schedule = ControlSchedule::from_parts(4, 2, 50);
    let (samples, trace) = sample_bits_traced(&oracle, &schedule, 7);
    assert_eq!((trace.q, trace.kappa), (1, 0));
    for (alpha, beta) in schedule.pairs() {
        assert_eq!(samples.mu(alpha, beta), 0.0);
    }
    let bits = decode(&samples, 4, 2, DEFAULT_ETA);
    assert!(bits.is_zero());
}

#[test]
fn two_cycle_marginals_are_exact() {
    let oracle = PermutationOracle::table(vec![1, 0]).unwrap();
    let schedule = ControlSchedule::from_parts(5, 2, 40);
    let mut seen_half = false;
    for seed in 0..20 {
        let (samples, trace) = sample_bits_traced(&oracle, &schedule, seed);
        assert_eq!(trace.q, 2);
        if trace.kappa == 0 {
            continue;
        }
        seen_half = true;
        // φ = 1/2: sin²(πc/2) is 1 for odd c (α=0) and 0 for even c.
        for (alpha, beta) in schedule.pairs() {
            let expect = if alpha == 0 { 1.0 } else { 0.0 };
            assert_eq!(samples.mu(alpha, beta), expect, "entry ({alpha},{beta})");
        }
    }
    assert!(seen_half, "no seed drew the nontrivial phase");
}

#[test]
fn linear_oracle_walks_the_unit_group() {
    let field = BinaryField::new(4).unwrap();
    let oracle = PermutationOracle::linear(field.mult_matrix(2)).unwrap();
    assert_eq!(oracle.points(), 16);
    let schedule = ControlSchedule::from_parts(8, 3, 5);
    let mut seen_full = false;
    for seed in 0..12 {
        let (_, trace) = sample_bits_traced(&oracle, &schedule, seed);
        if trace.start == 0 {
            assert_eq!(trace.q, 1);
        } else {
            assert_eq!(trace.q, 15);
            seen_full = true;
        }
    }
    assert!(seen_full);
    // Orbit agrees with field powers.
    for x in 1..16u64 {
        assert_eq!(oracle.orbit_len(x), 15);
        assert_eq!(oracle.apply(x), field.mul(2, x));
    }
}

#[test]
fn oracle_validation() {
    assert!(matches!(
        PermutationOracle::table(vec![0, 0]),
        Err(OracleError::NotAPermutation)
    ));
    assert!(matches!(
        PermutationOracle::table(vec![1, 2, 0, 5]),
        Err(OracleError::NotAPermutation)
    ));
    assert!(matches!(
        PermutationOracle::table(vec![0; (1 << 20) + 1]),
        Err(OracleError::TooManyPoints { .. })
    ));
    let singular = BitMatrix::zeros(3, 3);
    assert!(matches!(
        PermutationOracle::linear(singular),
        Err(OracleError::NotInvertible)
    ));
    let rect = BitMatrix::identity(3).vstack(&BitMatrix::zeros(1, 3));
    assert!(matches!(
        PermutationOracle::linear(rect),
        Err(OracleError::NotInvertible)
    ));
}

#[test]
fn production_sampler_hides_the_trace() {
    let oracle = PermutationOracle::table(vec![1, 2, 0]).unwrap();
    let schedule = ControlSchedule::from_parts(4, 2, 10);
    let plain = sample_bits(&oracle, &schedule, 5);
    let (traced, _) = sample_bits_traced(&oracle, &schedule, 5);
    for (alpha, beta) in schedule.pairs() {
        assert_eq!(plain.mu(alpha, beta), traced.mu(alpha, beta));
    }
}

#[test]
fn dlog_recovers_every_logarithm_in_f16() {
    let field = BinaryField::new(4).unwrap();
    for s in 0..15u64 {
        let h = field.pow(2, s);
        let report = dlog_demo(4, 2, h, 1000 + s).unwrap();
        assert_eq!(report.s, s, "g^{s}");
        assert!(report.gate_ops > 0);
    }
}

#[test]
fn dlog_monte_carlo_in_f256() {
    let field = BinaryField::new(8).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(17);
    let mut ok = 0;
    for trial in 0..20u64 {
        let s = rng.gen_range(1..255u64);
        let h = field.pow(2, s);
        match dlog_demo(8, 2, h, 555 + trial) {
            Ok(report) => {
                assert_eq!(report.s, s);
                ok += 1;
            }
            Err(DlogError::Exhausted { .. }) => {}
            Err(e) => panic!("unexpected error {e}"),
        }
    }
    assert!(ok >= 18, "only {ok}/20 recovered");
}

#[test]
fn partition_identity_random_battery() {
    let mut rng = ChaCha12Rng::seed_from_u64(3);
    for trial in 0..30 {
        let m = rng.gen_range(1..=12usize);
        let c: Vec<u64> = (0..m).map(|_| rng.gen_range(1..=50u64)).collect();
        let q = c.iter().sum::<u64>().max(1);
        let (lhs, rhs, gap) = partition_identity(&c, q);
        assert!(
            gap < 1e-9,
            "trial {trial}: lhs {lhs} rhs {rhs} differ by {gap}"
        );
    }
    // Modulus independent of the sum works too.
    let (lhs, rhs, gap) = partition_identity(&[3, 5, 7, 11], 13);
    assert!(gap < 1e-9, "lhs {lhs} rhs {rhs}");
}
