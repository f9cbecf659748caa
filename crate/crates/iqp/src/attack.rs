//! Classical spoofing strategy against π/8-angle challenges: second
//! derivatives of the phase-counting function concentrate on row sums of
//! pairwise intersections, which correlate with the hidden direction.

use alloc::vec::Vec;

use crate::f2la::{BitMatrix, BitVec};
use crate::rng;
use crate::xprog::{XProgram, XprogError, SAMPLE_BLOCK};

/// Signed row-parity count Σ_p (−1)^{p·a} as a residue mod 16.
///
/// At angle π/8 the program's amplitude phase at offset `a` is exactly
/// π/8 times this residue, which is why 16 is the natural modulus.
pub fn f_eval(program: &XProgram, a: &BitVec) -> u8 {
    let m = program.matrix();
    assert_eq!(a.len(), m.cols(), "offset width mismatch");
    let k = m.rows() as i64;
    let hits = (0..m.rows()).filter(|&r| row_parity(m, r, a)).count() as i64;
    (k - 2 * hits).rem_euclid(16) as u8
}

fn row_parity(m: &BitMatrix, r: usize, v: &BitVec) -> bool {
    m.row_words(r)
        .iter()
        .zip(v.words())
        .fold(0u64, |acc, (a, b)| acc ^ (a & b))
        .count_ones()
        & 1
        == 1
}

/// A fixed pair of difference directions used to probe the program's
/// second-order phase structure.
#[derive(Clone, Debug)]
pub struct DerivativeProbe<'a> {
    program: &'a XProgram,
    d: BitVec,
    e: BitVec,
}

impl<'a> DerivativeProbe<'a> {
    pub fn new(program: &'a XProgram, d: BitVec, e: BitVec) -> Self {
        assert_eq!(d.len(), program.qubits(), "direction width mismatch");
        assert_eq!(e.len(), program.qubits(), "direction width mismatch");
        DerivativeProbe { program, d, e }
    }

    pub fn d(&self) -> &BitVec {
        &self.d
    }

    pub fn e(&self) -> &BitVec {
        &self.e
    }

    /// Discrete second difference of the phase residue at `a`:
    /// f(a⊕d⊕e) − f(a⊕d) − f(a⊕e) + f(a), reduced mod 16. Always a
    /// multiple of 4: only rows hit by both `d` and `e` contribute.
    pub fn second_derivative(&self, a: &BitVec) -> u8 {
        let mut ad = a.clone();
        ad.xor_assign(&self.d);
        let mut ae = a.clone();
        ae.xor_assign(&self.e);
        let mut ade = ad.clone();
        ade.xor_assign(&self.e);
        let total = f_eval(self.program, &ade) as i64 - f_eval(self.program, &ad) as i64
            - f_eval(self.program, &ae) as i64
            + f_eval(self.program, a) as i64;
        total.rem_euclid(16) as u8
    }

    /// XOR of all program rows hit by both probe directions. This is the
    /// spoofing sample the probe emits.
    pub fn row_sum(&self) -> BitVec {
        let m = self.program.matrix();
        let mut acc = BitVec::zeros(m.cols());
        for r in 0..m.rows() {
            if row_parity(m, r, &self.d) && row_parity(m, r, &self.e) {
                acc.xor_assign(&m.row_vec(r));
            }
        }
        acc
    }
}

/// Draws `count` spoofing samples: each takes fresh uniform directions
/// (d, e) and emits the probe's row sum. Runs in O(count · rows) — no
/// quantum emulation involved, so challenge size is no obstacle.
///
/// Deterministic in `seed`, in fixed-size blocks, so any prefix and any
/// block-parallel schedule reproduce the same output.
pub fn y_sample(program: &XProgram, count: usize, seed: u64) -> Vec<BitVec> {
    let mut out = Vec::with_capacity(count);
    for block in 0..count.div_ceil(SAMPLE_BLOCK) {
        let in_block = SAMPLE_BLOCK.min(count - block * SAMPLE_BLOCK);
        out.extend(y_sample_block(program, seed, block as u64, in_block));
    }
    out
}

/// One block of [`y_sample`] (at most [`SAMPLE_BLOCK`] samples). Workers may
/// compute disjoint blocks concurrently; concatenating blocks in index order
/// reproduces the sequential output exactly.
pub fn y_sample_block(program: &XProgram, seed: u64, block: u64, len: usize) -> Vec<BitVec> {
    assert!(len <= SAMPLE_BLOCK, "block length above {SAMPLE_BLOCK}");
    let n = program.qubits();
    let mut rng = rng::stream_indexed(seed, "attack.sample", block);
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        let d = BitVec::random(n, &mut rng);
        let e = BitVec::random(n, &mut rng);
        out.push(DerivativeProbe::new(program, d, e).row_sum());
    }
    out
}

/// Rank over GF(2) of the Gram matrix MᵀM.
pub fn gram_rank(m: &BitMatrix) -> usize {
    let t = m.transpose();
    t.mul(m).rank()
}

/// Exact probability that a spoofing sample lands orthogonal to `s`.
///
/// Writing G for the rows of the program hit by `s`, the sample satisfies
/// y·s = dᵀ(GᵀG)e, a bilinear form in the probe directions, so the
/// orthogonal fraction is ½(1 + 2^{−rank(GᵀG)}).
pub fn y_bias_exact(program: &XProgram, s: &BitVec) -> f64 {
    let sub = program.submatrix(s);
    let r = gram_rank(&sub);
    0.5 * (1.0 + crate::fmath::powi(0.5, r as u32))
}

/// Side-by-side biases for one direction: what the quantum device achieves
/// and what the spoofing strategy achieves.
#[derive(Clone, Copy, Debug)]
pub struct UnitBiasReport {
    pub quantum_bias: f64,
    pub classical_bias: f64,
}

impl UnitBiasReport {
    /// Whenever the quantum bias is maximal the classical strategy matches
    /// it; this reports that implication for the measured pair.
    pub fn implication_holds(&self) -> bool {
        self.quantum_bias < 1.0 - 1e-9 || self.classical_bias > 1.0 - 1e-9
    }
}

/// Measures both biases in direction `s`. Errors only when the quantum
/// bias enumeration exceeds its rank bound.
pub fn unit_bias_check(program: &XProgram, s: &BitVec) -> Result<UnitBiasReport, XprogError> {
    Ok(UnitBiasReport {
        quantum_bias: program.bias(s)?,
        classical_bias: y_bias_exact(program, s),
    })
}
