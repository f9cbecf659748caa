//! Eigenvalue estimation with a 2^α·3^β control schedule: the bit sampler
//! over permutation orbits, the zooming bit-by-bit decoder, continued-fraction
//! recovery, the discrete-log demonstration over F₂ⁿ, and the modular
//! partition identity the estimator's analysis rests on.

use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::f2la::{transvection_synthesis, BitMatrix, BitVec};
use crate::fmath;
use crate::rng;

/// Default decoder threshold, well inside (sin²(π/8), 1/2).
pub const DEFAULT_ETA: f64 = 0.32;

/// Control schedule: every value 2^α·3^β for α ∈ [0..t], β ∈ [0..d],
/// repeated k times each.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ControlSchedule {
    t: usize,
    d: usize,
    k: usize,
}

impl ControlSchedule {
    pub fn from_parts(t: usize, d: usize, k: usize) -> Self {
        assert!(k >= 1, "need at least one repeat per entry");
        assert!(t <= 40 && d <= 14, "largest control value must fit in u64");
        ControlSchedule { t, d, k }
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Control value 2^α·3^β.
    pub fn c(&self, alpha: usize, beta: usize) -> u64 {
        assert!(alpha <= self.t && beta <= self.d);
        (1u64 << alpha) * 3u64.pow(beta as u32)
    }

    /// Total number of control-register entries m = k(t+1)(d+1).
    pub fn entries(&self) -> usize {
        self.k * (self.t + 1) * (self.d + 1)
    }

    /// All (α, β) pairs in row-major order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..=self.t).flat_map(move |a| (0..=self.d).map(move |b| (a, b)))
    }
}

/// Builds the schedule for estimating a phase with denominator up to 2ⁿ to
/// within failure probability ε: t = 2n bits of precision, d deep enough
/// that 3^d > 2ⁿ, and k = ⌈8·ln((t+1)(d+1)/ε)⌉ repeats.
pub fn make_schedule(n: usize, eps: f64) -> ControlSchedule {
    assert!(n >= 1, "need at least one bit");
    assert!(n <= 20, "control values exceed u64 beyond n=20");
    assert!(eps > 0.0 && eps < 1.0, "failure budget must lie in (0,1)");
    let t = 2 * n;
    let mut d = 0usize;
    while 3u128.pow(d as u32) <= 1u128 << n {
        d += 1;
    }
    let rounds = ((t + 1) * (d + 1)) as f64;
    let k = fmath::ceil(8.0 * fmath::ln(rounds / eps)) as usize;
    ControlSchedule::from_parts(t, d, k.max(1))
}

/// Measured bit averages μ(α, β), one per schedule entry class.
#[derive(Clone, Debug)]
pub struct PhaseSamples {
    t: usize,
    d: usize,
    mu: Vec<f64>,
}

impl PhaseSamples {
    pub fn from_fn(t: usize, d: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut mu = Vec::with_capacity((t + 1) * (d + 1));
        for alpha in 0..=t {
            for beta in 0..=d {
                let v = f(alpha, beta);
                assert!((0.0..=1.0).contains(&v), "averages must lie in [0,1]");
                mu.push(v);
            }
        }
        PhaseSamples { t, d, mu }
    }

    /// Exact averages for the rational phase num/den: μ = sin²(πc·num/den).
    pub fn noiseless(t: usize, d: usize, num: u64, den: u64) -> Self {
        assert!(den >= 1 && num < den, "phase must lie in [0, 1)");
        let sched = ControlSchedule::from_parts(t, d, 1);
        Self::from_fn(t, d, |alpha, beta| {
            let c = sched.c(alpha, beta);
            let r = (c as u128 * num as u128 % den as u128) as f64;
            let s = fmath::sin(core::f64::consts::PI * r / den as f64);
            s * s
        })
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn mu(&self, alpha: usize, beta: usize) -> f64 {
        assert!(alpha <= self.t && beta <= self.d);
        self.mu[alpha * (self.d + 1) + beta]
    }
}

/// What the bit sampler hides from the estimation algorithm: the orbit point
/// it started from, the phase numerator κ, and the orbit length q. Exposed
/// only through the traced sampler for test harnesses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PhaseTrace {
    pub start: u64,
    pub kappa: u64,
    pub q: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleError {
    /// Table exceeds the 2²⁰-point desk-scale bound.
    TooManyPoints { points: usize },
    /// Table entries do not form a bijection.
    NotAPermutation,
    /// Linear map is not square or not invertible.
    NotInvertible,
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::TooManyPoints { points } => {
                write!(f, "permutation table on {points} points exceeds 2^20")
            }
            OracleError::NotAPermutation => write!(f, "table is not a permutation"),
            OracleError::NotInvertible => write!(f, "matrix is not square and invertible"),
        }
    }
}

impl core::error::Error for OracleError {}

/// A permutation the sampler walks: an explicit table, or an invertible
/// linear map on n-bit strings.
#[derive(Clone, Debug)]
pub enum PermutationOracle {
    Table(Vec<u32>),
    Linear(BitMatrix),
}

impl PermutationOracle {
    pub fn table(table: Vec<u32>) -> Result<Self, OracleError> {
        let n = table.len();
        if n > 1 << 20 {
            return Err(OracleError::TooManyPoints { points: n });
        }
        let mut seen = alloc::vec![false; n];
        for &y in &table {
            let y = y as usize;
            if y >= n || seen[y] {
                return Err(OracleError::NotAPermutation);
            }
            seen[y] = true;
        }
        Ok(PermutationOracle::Table(table))
    }

    pub fn linear(m: BitMatrix) -> Result<Self, OracleError> {
        if m.rows() != m.cols() || m.cols() > 20 || m.rank() != m.cols() {
            return Err(OracleError::NotInvertible);
        }
        Ok(PermutationOracle::Linear(m))
    }

    /// Number of points the permutation acts on.
    pub fn points(&self) -> u64 {
        match self {
            PermutationOracle::Table(t) => t.len() as u64,
            PermutationOracle::Linear(m) => 1 << m.cols(),
        }
    }

    pub fn apply(&self, x: u64) -> u64 {
        match self {
            PermutationOracle::Table(t) => u64::from(t[x as usize]),
            PermutationOracle::Linear(m) => {
                m.mul_vec(&BitVec::from_u64(x, m.cols())).to_u64()
            }
        }
    }

    /// Length of the cycle containing x, by plain iteration.
    pub fn orbit_len(&self, x: u64) -> u64 {
        let mut y = self.apply(x);
        let mut len = 1u64;
        while y != x {
            y = self.apply(y);
            len += 1;
        }
        len
    }
}

/// Runs the sampler and also reveals the hidden (start, κ, q) draw. Intended
/// for test harnesses; production estimation goes through [`sample_bits`].
pub fn sample_bits_traced(
    f: &PermutationOracle,
    schedule: &ControlSchedule,
    seed: u64,
) -> (PhaseSamples, PhaseTrace) {
    let mut draw = rng::stream(seed, "eigest.draw");
    let start = draw.gen_range(0..f.points());
    let q = f.orbit_len(start);
    let kappa = draw.gen_range(0..q);
    let samples = phase_bit_averages(schedule, kappa, q, seed, "eigest.bits");
    (samples, PhaseTrace { start, kappa, q })
}

/// Picks a uniform orbit point and phase index, then for every schedule
/// entry c draws k bits that are 1 with probability sin²(πcκ/q) and returns
/// their averages.
pub fn sample_bits(
    f: &PermutationOracle,
    schedule: &ControlSchedule,
    seed: u64,
) -> PhaseSamples {
    sample_bits_traced(f, schedule, seed).0
}

/// Bit averages for a fixed rational phase κ/q, one independent stream per
/// (α, β) entry so entries can be drawn in parallel.
fn phase_bit_averages(
    schedule: &ControlSchedule,
    kappa: u64,
    q: u64,
    seed: u64,
    label: &str,
) -> PhaseSamples {
    let d = schedule.d();
    let k = schedule.k();
    PhaseSamples::from_fn(schedule.t(), d, |alpha, beta| {
        let c = schedule.c(alpha, beta);
        let r = (c as u128 * kappa as u128 % q as u128) as f64;
        let s = fmath::sin(core::f64::consts::PI * r / q as f64);
        let p = s * s;
        let mut stream = rng::stream_indexed(seed, label, (alpha * (d + 1) + beta) as u64);
        let ones = (0..k).filter(|_| stream.gen::<f64>() < p).count();
        ones as f64 / k as f64
    })
}

/// Bit-by-bit phase decoder.
///
/// Walks α from 0 to t, committing one output bit per round from the running
/// hypothesis σ; the inner β loop triples the control value to zoom past
/// inconclusive readings. A reading below η keeps the flipped hypothesis, a
/// reading above 1−η flips it back, and anything between defers to the next
/// zoom level (falling through when all are exhausted). Returns the t+1 bits
/// φ₁…φ_{t+1} of φ = 0.φ₁φ₂… with φ₁ forced to 0, so φ ∈ [0, ½].
pub fn decode(samples: &PhaseSamples, t: usize, d: usize, eta: f64) -> BitVec {
    assert!(t <= samples.t() && d <= samples.d(), "schedule too short");
    assert!(
        eta > 0.14644660940672624 && eta < 0.5,
        "threshold must lie strictly between sin²(π/8) and 1/2"
    );
    let mut bits = BitVec::zeros(t + 1);
    let mut sigma = false;
    for alpha in 0..=t {
        bits.set(alpha, sigma);
        sigma = !sigma;
        for beta in 0..=d {
            sigma = !sigma;
            let mu = samples.mu(alpha, beta);
            if mu < eta {
                break;
            }
            if mu > 1.0 - eta {
                sigma = !sigma;
                break;
            }
        }
    }
    bits
}

/// Best rational approximation to 0.b₁b₂…b_L with denominator at most
/// `max_den`, by the continued-fraction convergents of the estimate and the
/// final semiconvergent. Uniqueness of the answer needs max_den ≤ 2^(L/2).
pub fn cf_recover(estimate: &BitVec, max_den: u64) -> (u64, u64) {
    let l = estimate.len();
    assert!((1..=63).contains(&l), "estimate must hold 1..=63 bits");
    assert!(max_den >= 1, "denominator bound must be positive");
    assert!(max_den <= 1 << 31, "denominator bound exceeds 2^31");
    let mut v = 0u64;
    for i in 0..l {
        if estimate.get(i) {
            v |= 1 << (l - 1 - i);
        }
    }
    let w = 1u64 << l;
    let (mut num, mut den) = (v, w);
    let (mut p_prev, mut q_prev) = (0u64, 1u64);
    let (mut p_cur, mut q_cur) = (1u64, 0u64);
    loop {
        if den == 0 {
            return (p_cur, q_cur);
        }
        let a = num / den;
        let next_q = q_prev + a * q_cur;
        if q_cur > 0 && next_q > max_den {
            let j = (max_den - q_prev) / q_cur;
            let (ps, qs) = (p_prev + j * p_cur, q_prev + j * q_cur);
            let err = |p: u64, q: u64| {
                (v as i128 * q as i128 - p as i128 * w as i128).unsigned_abs()
            };
            return if qs > 0 && err(ps, qs) * (q_cur as u128) < err(p_cur, q_cur) * qs as u128 {
                (ps, qs)
            } else {
                (p_cur, q_cur)
            };
        }
        let next_p = p_prev + a * p_cur;
        (p_prev, q_prev) = (p_cur, q_cur);
        (p_cur, q_cur) = (next_p, next_q);
        (num, den) = (den, num % den);
    }
}

/// The two schedule-wide Chernoff failure bounds at threshold η: the chance
/// of a decisive reading pointing the wrong way, and the chance of an
/// equatorial reading masquerading as decisive.
pub fn error_budget(schedule: &ControlSchedule, eta: f64) -> (f64, f64) {
    let rounds = ((schedule.t() + 1) * (schedule.d() + 1)) as f64;
    let k = schedule.k() as f64;
    let s8 = {
        let s = fmath::sin(core::f64::consts::FRAC_PI_8);
        s * s
    };
    let threshold = rounds * fmath::exp(-2.0 * k * (0.5 - eta) * (0.5 - eta));
    let zoom = rounds * fmath::exp(-2.0 * k * (eta - s8) * (eta - s8));
    (threshold, zoom)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DlogError {
    /// Field bit-width outside 1..=16.
    FieldTooLarge { bits: u32 },
    /// Element is 0, i.e. not in the multiplicative group.
    NotAUnit,
    /// g does not generate the whole multiplicative group.
    NotAGenerator,
    /// No attempt produced a verified logarithm.
    Exhausted { attempts: u32 },
}

impl fmt::Display for DlogError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DlogError::FieldTooLarge { bits } => {
                write!(f, "field bit-width {bits} outside 1..=16")
            }
            DlogError::NotAUnit => write!(f, "0 has no discrete logarithm"),
            DlogError::NotAGenerator => write!(f, "base does not generate the unit group"),
            DlogError::Exhausted { attempts } => {
                write!(f, "no verified logarithm after {attempts} attempts")
            }
        }
    }
}

impl core::error::Error for DlogError {}

/// F₂ⁿ in a fixed polynomial basis; the reduction polynomial is the smallest
/// primitive one, so the element x (bit pattern 10) generates the units.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BinaryField {
    n: u32,
    poly: u64,
}

impl BinaryField {
    pub fn new(n: u32) -> Result<Self, DlogError> {
        if n == 0 || n > 16 {
            return Err(DlogError::FieldTooLarge { bits: n });
        }
        let order = (1u64 << n) - 1;
        let lo = (1u64 << n) | 1;
        let hi = (1u64 << (n + 1)) - 1;
        for cand in (lo..=hi).step_by(2) {
            let field = BinaryField { n, poly: cand };
            // x is primitive exactly when its orbit walks every unit.
            let mut y = field.mul(1, 2);
            let mut len = 1u64;
            while y != 1 && len <= order {
                y = field.mul(y, 2);
                len += 1;
            }
            if y == 1 && len == order {
                return Ok(field);
            }
        }
        unreachable!("a primitive polynomial exists for every n");
    }

    pub fn bits(&self) -> u32 {
        self.n
    }

    pub fn modulus_poly(&self) -> u64 {
        self.poly
    }

    /// Size of the multiplicative group, 2ⁿ − 1.
    pub fn unit_order(&self) -> u64 {
        (1 << self.n) - 1
    }

    pub fn mul(&self, mut a: u64, mut b: u64) -> u64 {
        let mut r = 0;
        while b != 0 {
            if b & 1 == 1 {
                r ^= a;
            }
            b >>= 1;
            a <<= 1;
            if a >> self.n & 1 == 1 {
                a ^= self.poly;
            }
        }
        r
    }

    pub fn pow(&self, a: u64, mut e: u64) -> u64 {
        let mut base = a;
        let mut r = 1u64;
        while e != 0 {
            if e & 1 == 1 {
                r = self.mul(r, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        r
    }

    /// Multiplication by `a` as a linear map on the coefficient vector.
    pub fn mult_matrix(&self, a: u64) -> BitMatrix {
        let n = self.n as usize;
        BitMatrix::from_fn(n, n, |r, c| self.mul(a, 1 << c) >> r & 1 == 1)
    }
}

/// Outcome of a successful discrete-log run.
#[derive(Clone, Copy, Debug)]
pub struct DlogReport {
    pub s: u64,
    /// Attempts consumed, counting the successful one.
    pub attempts: u32,
    /// Row operations to realize every controlled power of g and h in place,
    /// totalled over the whole m-entry control register.
    pub gate_ops: usize,
}

const DLOG_ATTEMPTS: u32 = 5;

/// Recovers s with g^s = h in F₂ⁿ* by estimating the two phases κ/q and
/// κs/q of one shared eigenvector draw, then dividing them mod q. The
/// quantum side is emulated classically: the emulation brute-forces s once
/// to reproduce the bit biases the device would exhibit, and the estimation
/// pipeline never sees it.
pub fn dlog_demo(n: u32, g: u64, h: u64, seed: u64) -> Result<DlogReport, DlogError> {
    let field = BinaryField::new(n)?;
    let q = field.unit_order();
    if g == 0 || h == 0 || g > q || h > q {
        return Err(DlogError::NotAUnit);
    }
    // Order check doubles as the brute-force dlog table for the emulation.
    let mut s_true = None;
    let mut y = 1u64;
    for e in 1..=q {
        y = field.mul(y, g);
        if y == h && s_true.is_none() {
            s_true = Some(e % q);
        }
        if y == 1 {
            if e < q {
                return Err(DlogError::NotAGenerator);
            }
            break;
        }
    }
    let s_true = s_true.expect("a generator reaches every unit");
    let schedule = make_schedule(n as usize, 0.05);
    let gate_ops = control_gate_ops(&field, g, h, &schedule);
    let max_den = 1u64 << n;
    for attempt in 0..DLOG_ATTEMPTS {
        let aseed = rng::derive_indexed(seed, "eigest.dlog.attempt", u64::from(attempt));
        let mut draw = rng::stream(aseed, "eigest.dlog.draw");
        let kappa = draw.gen_range(0..q);
        let mu_g = phase_bit_averages(&schedule, kappa, q, aseed, "eigest.dlog.g");
        let mu_h = phase_bit_averages(
            &schedule,
            (kappa as u128 * s_true as u128 % q as u128) as u64,
            q,
            aseed,
            "eigest.dlog.h",
        );
        let (kn, kd) = cf_recover(
            &decode(&mu_g, schedule.t(), schedule.d(), DEFAULT_ETA),
            max_den,
        );
        if kd != q {
            continue; // κ shared a factor with q, or the decode went astray
        }
        let (yn, yd) = cf_recover(
            &decode(&mu_h, schedule.t(), schedule.d(), DEFAULT_ETA),
            max_den,
        );
        if yd == 0 || q % yd != 0 {
            continue;
        }
        let y0 = yn * (q / yd) % q;
        let inv = match mod_inverse(kn, q) {
            Some(i) => i,
            None => continue,
        };
        for kc in [kn, q - kn] {
            let kinv = if kc == kn { inv } else { q - inv };
            for yc in [y0, (q - y0) % q] {
                let s = (yc as u128 * kinv as u128 % q as u128) as u64;
                if field.pow(g, s) == h {
                    return Ok(DlogReport {
                        s,
                        attempts: attempt + 1,
                        gate_ops,
                    });
                }
            }
        }
    }
    Err(DlogError::Exhausted {
        attempts: DLOG_ATTEMPTS,
    })
}

/// In-place circuit cost of the control register: synthesizes multiplication
/// by g^c and h^c for every scheduled c as row-operation sequences and sums
/// their lengths over all m entries.
fn control_gate_ops(field: &BinaryField, g: u64, h: u64, schedule: &ControlSchedule) -> usize {
    let q = field.unit_order();
    let mut per_class = 0usize;
    for (alpha, beta) in schedule.pairs() {
        let c = schedule.c(alpha, beta) % q;
        for base in [g, h] {
            let m = field.mult_matrix(field.pow(base, c));
            per_class += transvection_synthesis(&m)
                .expect("multiplication by a unit is invertible")
                .len();
        }
    }
    per_class * schedule.k()
}

fn mod_inverse(a: u64, q: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128, q as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let quo = old_r / r;
        (old_r, r) = (r, old_r - quo * r);
        (old_s, s) = (s, old_s - quo * s);
    }
    (old_r == 1).then(|| old_s.rem_euclid(q as i128) as u64)
}

/// Both sides of the modular partition identity for control values `c` and
/// modulus `q`: the average over κ of ∏ cos(2πc_jκ/q), and the probability
/// that a uniform subset of c sums to the same residue as its complement.
/// Returns (lhs, rhs, |lhs − rhs|); the two are equal in exact arithmetic.
pub fn partition_identity(c: &[u64], q: u64) -> (f64, f64, f64) {
    assert!(c.len() <= 20, "subset enumeration bounded at 2^20");
    assert!(q >= 1, "modulus must be positive");
    let mut lhs = 0.0f64;
    for kappa in 0..q {
        let mut prod = 1.0f64;
        for &cj in c {
            let r = (cj as u128 * kappa as u128 % q as u128) as f64;
            prod *= fmath::cos(2.0 * core::f64::consts::PI * r / q as f64);
        }
        lhs += prod;
    }
    lhs /= q as f64;
    let total: u128 = c.iter().map(|&x| x as u128).sum();
    let mut hits = 0u64;
    let mut subset_sum = 0u128;
    let mut prev = 0u64;
    for i in 0..1u64 << c.len() {
        let gray = i ^ (i >> 1);
        if gray != prev {
            let j = (gray ^ prev).trailing_zeros() as usize;
            if gray >> j & 1 == 1 {
                subset_sum += c[j] as u128;
            } else {
                subset_sum -= c[j] as u128;
            }
            prev = gray;
        }
        if (2 * subset_sum) % q as u128 == total % q as u128 {
            hits += 1;
        }
    }
    let rhs = hits as f64 / (1u64 << c.len()) as f64;
    (lhs, rhs, fmath::abs(lhs - rhs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_constants() {
        let s = make_schedule(10, 0.01);
        assert_eq!((s.t(), s.d(), s.k()), (20, 7, 78));
        assert_eq!(s.entries(), 78 * 21 * 8);
        let s = make_schedule(8, 0.05);
        assert_eq!((s.t(), s.d(), s.k()), (16, 6, 63));
        let s = make_schedule(4, 0.05);
        assert_eq!((s.t(), s.d(), s.k()), (8, 3, 53));
        let s = make_schedule(1, 0.5);
        assert_eq!((s.t(), s.d()), (2, 1));
        assert_eq!(s.k(), 20);
        assert_eq!(s.c(2, 1), 12);
    }

    #[test]
    fn decode_noiseless_one_third() {
        for (t, d, max_den) in [(8usize, 4usize, 16), (20, 13, 1024)] {
            let samples = PhaseSamples::noiseless(t, d, 1, 3);
            let bits = decode(&samples, t, d, DEFAULT_ETA);
            assert_eq!(bits.len(), t + 1);
            for i in 0..=t {
                assert_eq!(bits.get(i), i % 2 == 1, "t={t} bit {i}");
            }
            assert_eq!(cf_recover(&bits, max_den), (1, 3));
        }
    }

    #[test]
    fn decode_zero_phase() {
        let samples = PhaseSamples::noiseless(8, 4, 0, 1);
        let bits = decode(&samples, 8, 4, DEFAULT_ETA);
        assert!(bits.is_zero());
        assert_eq!(cf_recover(&bits, 100), (0, 1));
    }

    #[test]
    fn decode_seven_fifteenths() {
        let samples = PhaseSamples::noiseless(20, 13, 7, 15);
        let bits = decode(&samples, 20, 13, DEFAULT_ETA);
        assert_eq!(cf_recover(&bits, 1024), (7, 15));
    }

    #[test]
    fn zoom_depth_rescues_near_quarter_phases() {
        // φ = 9/32 keeps the first reading equatorial; one tripling decides it.
        let samples = PhaseSamples::noiseless(8, 4, 9, 32);
        let value = |bits: &BitVec| {
            let mut v = 0u64;
            for i in 0..bits.len() {
                if bits.get(i) {
                    v |= 1 << (bits.len() - 1 - i);
                }
            }
            (v as f64) / (1u64 << bits.len()) as f64
        };
        let shallow = decode(&samples, 8, 0, DEFAULT_ETA);
        let deep = decode(&samples, 8, 1, DEFAULT_ETA);
        let phi = 9.0 / 32.0;
        // One zoom level recovers the expansion 010010000 exactly.
        for (i, expect) in [false, true, false, false, true, false, false, false, false]
            .into_iter()
            .enumerate()
        {
            assert_eq!(deep.get(i), expect, "bit {i}");
        }
        assert_eq!(cf_recover(&deep, 32), (9, 32));
        assert!((value(&shallow) - phi).abs() > 1.0 / 512.0);
        assert!((value(&deep) - phi).abs() < 1e-12);
    }

    #[test]
    fn cf_is_a_best_approximation() {
        let mut rng = crate::rng::stream(5, "test.eigest.cf");
        for _ in 0..50 {
            let bits = BitVec::random(16, &mut rng);
            let max_den = 1 + rng.gen_range(0..40u64);
            let (p, q) = cf_recover(&bits, max_den);
            assert!(q >= 1 && q <= max_den);
            let mut v = 0u64;
            for i in 0..16 {
                if bits.get(i) {
                    v |= 1 << (15 - i);
                }
            }
            let w = 1u64 << 16;
            let raw = |pp: u64, qq: u64| {
                (v as i128 * qq as i128 - pp as i128 * w as i128).unsigned_abs()
            };
            for den in 1..=max_den {
                let num = ((v as u128 * den as u128 + (w / 2) as u128) / w as u128) as u64;
                assert!(
                    raw(p, q) * den as u128 <= raw(num, den) * q as u128,
                    "{p}/{q} beaten by {num}/{den}"
                );
            }
        }
    }

    #[test]
    fn error_budget_values() {
        let s = ControlSchedule::from_parts(20, 7, 50);
        let (a, b) = error_budget(&s, 0.32);
        assert!((a - 6.5795).abs() < 1e-3, "{a}");
        assert!((b - 8.2638).abs() < 1e-3, "{b}");
        let (va, _) = error_budget(&s, 0.5);
        assert_eq!(va, 168.0);
        let big = ControlSchedule::from_parts(20, 7, 500);
        let (a2, b2) = error_budget(&big, 0.32);
        assert!(a2 < 1e-10 && b2 < 1e-10);
    }

    #[test]
    fn field_construction() {
        let f = BinaryField::new(4).unwrap();
        assert_eq!(f.unit_order(), 15);
        assert_eq!(f.pow(2, 15), 1);
        assert!(f.pow(2, 5) != 1 && f.pow(2, 3) != 1);
        assert_eq!(f.mul(1, 7), 7);
        let m = f.mult_matrix(2);
        assert_eq!(m.rank(), 4);
        // matrix action agrees with field multiplication
        for x in 0..16u64 {
            let via_matrix = m.mul_vec(&BitVec::from_u64(x, 4)).to_u64();
            assert_eq!(via_matrix, f.mul(2, x));
        }
        assert!(matches!(
            BinaryField::new(0),
            Err(DlogError::FieldTooLarge { bits: 0 })
        ));
        assert!(matches!(
            BinaryField::new(17),
            Err(DlogError::FieldTooLarge { bits: 17 })
        ));
    }

    #[test]
    fn dlog_of_the_base_itself() {
        let report = dlog_demo(4, 2, 2, 3).unwrap();
        assert_eq!(report.s, 1);
        assert!(report.attempts <= DLOG_ATTEMPTS);
        assert!(report.gate_ops > 0);
    }

    #[test]
    fn dlog_rejects_bad_inputs() {
        assert!(matches!(dlog_demo(4, 0, 3, 1), Err(DlogError::NotAUnit)));
        let f = BinaryField::new(4).unwrap();
        // An element of order 5 or 3 exists: g = x^3 has order 5.
        let small = f.pow(2, 3);
        assert!(matches!(
            dlog_demo(4, small, 1, 1),
            Err(DlogError::NotAGenerator)
        ));
    }

    #[test]
    fn inverse_arithmetic() {
        assert_eq!(mod_inverse(3, 7), Some(5));
        assert_eq!(mod_inverse(2, 4), None);
        for a in 1..15u64 {
            match mod_inverse(a, 15) {
                Some(i) => assert_eq!(a * i % 15, 1),
                None => assert!(a % 3 == 0 || a % 5 == 0),
            }
        }
    }

    #[test]
    fn partition_identity_small_cases() {
        let (l, r, gap) = partition_identity(&[1, 1], 2);
        assert_eq!((l, r), (1.0, 1.0));
        assert!(gap < 1e-12);
        let (l, r, gap) = partition_identity(&[], 1);
        assert_eq!((l, r), (1.0, 1.0));
        assert!(gap < 1e-12);
        let (l, r, gap) = partition_identity(&[1, 1, 2], 4);
        assert!((l - 0.5).abs() < 1e-12);
        assert_eq!(r, 0.5);
        assert!(gap < 1e-12);
    }
}
