//! X-program semantics: exact output distributions, sampling, directional
//! bias, the measurement-based graph-program emulation, and the post-selected
//! Hadamard gadget.
//!
//! An X-program is a k×n GF(2) matrix `P` together with one angle θ. Row `p`
//! contributes the commuting term exp(iθ X^{⊗p}); the program prepares
//! exp(iθ Σ_p X^{⊗p})|0ⁿ⟩ and measures every qubit in the computational
//! basis. Global phase is ignored throughout.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;
use rand::Rng;

use crate::codes::LinearCode;
use crate::f2la::{BitMatrix, BitVec};
use crate::fmath;

/// Largest qubit count for which the dense probability array is built.
pub const MAX_DENSE_QUBITS: usize = 26;

/// Largest total vertex count for statevector graph-program execution.
pub const MAX_STATEVECTOR_QUBITS: usize = 22;

/// Largest submatrix rank accepted by the bias computation.
pub const MAX_BIAS_RANK: usize = 28;

/// Samples are produced in fixed blocks of this many draws, each block from
/// its own derived stream, so the output is independent of how blocks are
/// distributed over workers.
pub const SAMPLE_BLOCK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XprogError {
    /// Qubit count exceeds [`MAX_DENSE_QUBITS`].
    TooManyQubits { n: usize, max: usize },
    /// Primal + ancilla count exceeds [`MAX_STATEVECTOR_QUBITS`].
    StateTooLarge { qubits: usize, max: usize },
    /// Kept-row submatrix rank exceeds [`MAX_BIAS_RANK`].
    RankTooLarge { rank: usize, max: usize },
}

impl fmt::Display for XprogError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            XprogError::TooManyQubits { n, max } => {
                write!(f, "{n} qubits exceed the dense-distribution bound {max}")
            }
            XprogError::StateTooLarge { qubits, max } => {
                write!(f, "{qubits} vertices exceed the statevector bound {max}")
            }
            XprogError::RankTooLarge { rank, max } => {
                write!(f, "submatrix rank {rank} exceeds the enumeration bound {max}")
            }
        }
    }
}

impl core::error::Error for XprogError {}

/// Error from [`Distribution::new`] on malformed probability arrays.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistributionError {
    LengthNotPowerOfTwo(usize),
    Negative { index: usize, value: f64 },
    NotNormalized { sum: f64 },
}

impl fmt::Display for DistributionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistributionError::LengthNotPowerOfTwo(len) => {
                write!(f, "array length {len} is not a power of two")
            }
            DistributionError::Negative { index, value } => {
                write!(f, "negative probability {value} at index {index}")
            }
            DistributionError::NotNormalized { sum } => {
                write!(f, "probabilities sum to {sum}, not 1")
            }
        }
    }
}

impl core::error::Error for DistributionError {}

/// Exact probability distribution over n-bit strings, indexed with bit j of
/// the array index holding qubit j.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution {
    n: usize,
    probs: Vec<f64>,
}

impl Distribution {
    /// Validates nonnegativity and normalization (within 1e−10), then
    /// rescales so the stored array sums to 1 up to rounding.
    pub fn new(probs: Vec<f64>) -> Result<Self, DistributionError> {
        if probs.is_empty() || !probs.len().is_power_of_two() {
            return Err(DistributionError::LengthNotPowerOfTwo(probs.len()));
        }
        let mut probs = probs;
        for (index, p) in probs.iter_mut().enumerate() {
            if *p < 0.0 {
                if *p < -1e-12 {
                    return Err(DistributionError::Negative { index, value: *p });
                }
                *p = 0.0;
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-10 {
            return Err(DistributionError::NotNormalized { sum });
        }
        for p in probs.iter_mut() {
            *p /= sum;
        }
        let n = probs.len().trailing_zeros() as usize;
        Ok(Distribution { n, probs })
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, x: usize) -> f64 {
        self.probs[x]
    }

    /// Pr(X·sᵀ = 0) read directly off the array.
    pub fn orthogonal_fraction(&self, s: &BitVec) -> f64 {
        assert_eq!(s.len(), self.n, "direction length mismatch");
        let mask = s.to_u64() as usize;
        self.probs
            .iter()
            .enumerate()
            .filter(|(x, _)| (x & mask).count_ones().is_multiple_of(2))
            .map(|(_, p)| p)
            .sum()
    }

    /// Pr(X·sᵀ = 0) for every direction s at once: the Walsh–Hadamard
    /// transform of the array gives Σ_x (−1)^{x·s} p_x, and the orthogonal
    /// fraction is (1 + that)/2.
    pub fn orthogonal_fraction_table(&self) -> Vec<f64> {
        let mut t = self.probs.clone();
        walsh_hadamard(&mut t);
        for v in t.iter_mut() {
            *v = 0.5 * (1.0 + *v);
        }
        t
    }

    /// Rényi-2 entropy −log₂ Σ_x p_x² in bits.
    pub fn collision_entropy(&self) -> f64 {
        let sq: f64 = self.probs.iter().map(|p| p * p).sum();
        -fmath::log2(sq)
    }

    /// Reusable inverse-CDF sampler; shareable across worker threads.
    pub fn sampler(&self) -> Sampler<'_> {
        let mut cdf = Vec::with_capacity(self.probs.len());
        let mut acc = 0.0;
        for &p in &self.probs {
            acc += p;
            cdf.push(acc);
        }
        if let Some(last) = cdf.last_mut() {
            *last = 1.0;
        }
        Sampler { dist: self, cdf }
    }

    /// `count` independent draws, deterministic in `seed` (and independent
    /// of any block-to-worker assignment; see [`SAMPLE_BLOCK`]).
    pub fn sample(&self, count: usize, seed: u64) -> Vec<BitVec> {
        let sampler = self.sampler();
        let mut out = Vec::with_capacity(count);
        let mut block = 0u64;
        while out.len() < count {
            let len = SAMPLE_BLOCK.min(count - out.len());
            out.extend(sampler.block(seed, block, len));
            block += 1;
        }
        out
    }
}

/// Inverse-CDF sampler over a [`Distribution`], one derived stream per block.
pub struct Sampler<'a> {
    dist: &'a Distribution,
    cdf: Vec<f64>,
}

impl Sampler<'_> {
    /// Draws block `block` (at most [`SAMPLE_BLOCK`] samples). Workers may
    /// compute disjoint blocks concurrently; concatenating blocks in index
    /// order reproduces the sequential output exactly.
    pub fn block(&self, seed: u64, block: u64, len: usize) -> Vec<BitVec> {
        assert!(len <= SAMPLE_BLOCK, "block length above {SAMPLE_BLOCK}");
        let mut rng = crate::rng::stream_indexed(seed, "xprog.sample", block);
        let mut out = Vec::with_capacity(len);
        for _ in 0..len {
            let u: f64 = rng.gen();
            let idx = self.cdf.partition_point(|&c| c <= u);
            let idx = idx.min(self.cdf.len() - 1);
            out.push(BitVec::from_u64(idx as u64, self.dist.n));
        }
        out
    }
}

/// In-place Walsh–Hadamard transform (no normalization).
fn walsh_hadamard(a: &mut [f64]) {
    let n = a.len();
    debug_assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        for chunk in a.chunks_mut(2 * h) {
            let (lo, hi) = chunk.split_at_mut(h);
            for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                let (a, b) = (*x, *y);
                *x = a + b;
                *y = a - b;
            }
        }
        h *= 2;
    }
}

/// A commuting X-rotation program: rows of `matrix` select qubit subsets,
/// each rotated by the common angle `theta`.
#[derive(Clone, Debug)]
pub struct XProgram {
    matrix: BitMatrix,
    theta: f64,
}

impl XProgram {
    pub fn new(matrix: BitMatrix, theta: f64) -> Self {
        XProgram { matrix, theta }
    }

    pub fn matrix(&self) -> &BitMatrix {
        &self.matrix
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Number of program rows k.
    pub fn elements(&self) -> usize {
        self.matrix.rows()
    }

    /// Number of qubits n.
    pub fn qubits(&self) -> usize {
        self.matrix.cols()
    }

    /// Exact output distribution |⟨x| exp(iθ Σ_p X^{⊗p}) |0ⁿ⟩|².
    ///
    /// In the Hadamard frame the amplitude is
    /// 2^{−n} Σ_a (−1)^{a·x} exp(iθ(k − 2·wt(P·aᵀ))), so the array is filled
    /// with the phase factors along a Gray-code walk over `a` (one column
    /// XOR per step) and transformed in place.
    pub fn distribution(&self) -> Result<Distribution, XprogError> {
        let n = self.qubits();
        let k = self.elements();
        if n > MAX_DENSE_QUBITS {
            return Err(XprogError::TooManyQubits {
                n,
                max: MAX_DENSE_QUBITS,
            });
        }
        let phases: Vec<Complex64> = (0..=k)
            .map(|w| {
                let angle = self.theta * (k as f64 - 2.0 * w as f64);
                Complex64::new(fmath::cos(angle), fmath::sin(angle))
            })
            .collect();
        let columns: Vec<BitVec> = (0..n).map(|j| self.matrix.column(j)).collect();
        let size = 1usize << n;
        let mut re = vec![0.0f64; size];
        let mut im = vec![0.0f64; size];
        re[0] = phases[0].re;
        im[0] = phases[0].im;
        let mut parity = BitVec::zeros(k);
        for i in 1..size {
            let flip = i.trailing_zeros() as usize;
            parity.xor_assign(&columns[flip]);
            let w = parity.weight();
            let a = i ^ (i >> 1);
            re[a] = phases[w].re;
            im[a] = phases[w].im;
        }
        walsh_hadamard(&mut re);
        walsh_hadamard(&mut im);
        let scale = fmath::powi(0.25, n as u32);
        let probs: Vec<f64> = re
            .iter()
            .zip(&im)
            .map(|(r, i)| (r * r + i * i) * scale)
            .collect();
        Distribution::new(probs).map_err(|_| unreachable!("analytic normalization"))
    }

    /// `count` measurement samples; deterministic in `seed`.
    pub fn sample(&self, count: usize, seed: u64) -> Result<Vec<BitVec>, XprogError> {
        Ok(self.distribution()?.sample(count, seed))
    }

    /// Rows p of the program with p·sᵀ = 1, order preserved.
    pub fn submatrix(&self, s: &BitVec) -> BitMatrix {
        assert_eq!(s.len(), self.qubits(), "direction length mismatch");
        let keep: Vec<usize> = (0..self.matrix.rows())
            .filter(|&r| self.matrix.row_vec(r).dot(s))
            .collect();
        self.matrix.take_rows(&keep)
    }

    /// Pr(X·sᵀ = 0), computed without touching the 2ⁿ-sized array.
    ///
    /// Only the rows with p·sᵀ = 1 matter; with `C` the column span of that
    /// submatrix and `n_s` its row count, the bias equals the mean of
    /// cos²(θ(n_s − 2·wt(c))) over codewords c of `C`. It therefore depends
    /// only on the weight enumerator — a matroid invariant of the program.
    pub fn bias(&self, s: &BitVec) -> Result<f64, XprogError> {
        let sub = self.submatrix(s);
        let code = LinearCode::from_generator(sub);
        if code.rank() > MAX_BIAS_RANK {
            return Err(XprogError::RankTooLarge {
                rank: code.rank(),
                max: MAX_BIAS_RANK,
            });
        }
        let n_s = code.len() as f64;
        let theta = self.theta;
        Ok(code.expect_over_codewords(|w| {
            let c = fmath::cos(theta * (n_s - 2.0 * w as f64));
            c * c
        }))
    }

    /// Measurement-based form: the bipartite graph joining qubit vertices to
    /// one ancilla vertex per program row.
    pub fn graph_program(&self) -> GraphProgram {
        let n = self.qubits();
        let k = self.elements();
        let mut edges = Vec::new();
        for p in 0..k {
            for j in 0..n {
                if self.matrix.get(p, j) {
                    edges.push((j, p));
                }
            }
        }
        GraphProgram {
            primal: n,
            ancilla_angles: vec![self.theta; k],
            edges,
        }
    }

    /// Runs the graph program, applies the classical ancilla→neighbor parity
    /// corrections, and marginalizes the ancilla bits. Equals
    /// [`XProgram::distribution`] up to floating-point rounding.
    pub fn emulate(&self) -> Result<Distribution, XprogError> {
        let n = self.qubits();
        let k = self.elements();
        let joint = self.graph_program().distribution()?;
        // corrections[r] = Pᵀ·r as an n-bit mask (XOR of rows selected by r)
        let row_masks: Vec<usize> = (0..k)
            .map(|p| self.matrix.row_vec(p).to_u64() as usize)
            .collect();
        let mut corrections = vec![0usize; 1 << k];
        for r in 1..corrections.len() {
            corrections[r] = corrections[r & (r - 1)] ^ row_masks[r.trailing_zeros() as usize];
        }
        let mut probs = vec![0.0f64; 1 << n];
        let primal_mask = (1usize << n) - 1;
        for (z, &p) in joint.probs().iter().enumerate() {
            probs[(z & primal_mask) ^ corrections[z >> n]] += p;
        }
        Distribution::new(probs).map_err(|_| unreachable!("marginal of a distribution"))
    }
}

/// Graph program: a graph state on primal + ancilla vertices, primal vertices
/// measured in the Hadamard basis and each ancilla measured in the (Y,Z)
/// plane at its angle.
#[derive(Clone, Debug)]
pub struct GraphProgram {
    primal: usize,
    ancilla_angles: Vec<f64>,
    /// Edges (primal vertex, ancilla index).
    edges: Vec<(usize, usize)>,
}

impl GraphProgram {
    pub fn primal_count(&self) -> usize {
        self.primal
    }

    pub fn ancilla_count(&self) -> usize {
        self.ancilla_angles.len()
    }

    pub fn ancilla_angles(&self) -> &[f64] {
        &self.ancilla_angles
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Joint outcome distribution over primal (low bits) then ancilla (high
    /// bits) measurement results, by dense statevector execution.
    pub fn distribution(&self) -> Result<Distribution, XprogError> {
        let n = self.primal;
        let k = self.ancilla_angles.len();
        let total = n + k;
        if total > MAX_STATEVECTOR_QUBITS {
            return Err(XprogError::StateTooLarge {
                qubits: total,
                max: MAX_STATEVECTOR_QUBITS,
            });
        }
        let size = 1usize << total;
        let amp0 = fmath::powf(0.5, total as f64 / 2.0);
        let mut state = vec![Complex64::new(amp0, 0.0); size];
        // graph-state phases
        for &(j, p) in &self.edges {
            let bj = 1usize << j;
            let bp = 1usize << (n + p);
            for (z, a) in state.iter_mut().enumerate() {
                if z & bj != 0 && z & bp != 0 {
                    *a = -*a;
                }
            }
        }
        // Hadamard-basis measurement on primal vertices: rotate by H
        for j in 0..n {
            butterfly_h(&mut state, 1 << j);
        }
        // (Y,Z)-plane measurement at angle θ: rotate by exp(−iθX)
        for (p, &theta) in self.ancilla_angles.iter().enumerate() {
            butterfly_xrot(&mut state, 1 << (n + p), theta);
        }
        let probs: Vec<f64> = state.iter().map(Complex64::norm_sqr).collect();
        Distribution::new(probs).map_err(|_| unreachable!("unitary preserves norm"))
    }
}

fn butterfly_h(state: &mut [Complex64], bit: usize) {
    let inv_sqrt2 = Complex64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
    for z in 0..state.len() {
        if z & bit == 0 {
            let a = state[z];
            let b = state[z | bit];
            state[z] = (a + b) * inv_sqrt2;
            state[z | bit] = (a - b) * inv_sqrt2;
        }
    }
}

fn butterfly_xrot(state: &mut [Complex64], bit: usize, theta: f64) {
    let c = Complex64::new(fmath::cos(theta), 0.0);
    let mis = Complex64::new(0.0, -fmath::sin(theta));
    for z in 0..state.len() {
        if z & bit == 0 {
            let a = state[z];
            let b = state[z | bit];
            state[z] = c * a + mis * b;
            state[z | bit] = c * b + mis * a;
        }
    }
}

/// Fidelity |⟨Hψ | gadget(ψ)⟩|² of the two-qubit post-selected Hadamard
/// gadget: ancilla prepared |0⟩, H on the ancilla, swap, controlled-Z, H on
/// the ancilla slot, post-select it to |0⟩ and renormalize. Always 1 up to
/// rounding; exercised as an executable identity check.
pub fn hadamard_gadget_fidelity(psi: [Complex64; 2]) -> f64 {
    let norm = psi[0].norm_sqr() + psi[1].norm_sqr();
    assert!((norm - 1.0).abs() < 1e-9, "input state must be normalized");
    // bit 0 = data slot, bit 1 = ancilla slot
    let mut state = [psi[0], psi[1], Complex64::ZERO, Complex64::ZERO];
    h2(&mut state, 2);
    state.swap(1, 2);
    state[3] = -state[3];
    h2(&mut state, 2);
    // post-select ancilla (bit 1) = 0
    let kept = [state[0], state[1]];
    let p0 = kept[0].norm_sqr() + kept[1].norm_sqr();
    assert!(p0 > 0.0, "post-selection cannot fail on normalized input");
    let scale = 1.0 / fmath::sqrt(p0);
    let result = [kept[0] * scale, kept[1] * scale];
    let s = core::f64::consts::FRAC_1_SQRT_2;
    let target = [(psi[0] + psi[1]) * s, (psi[0] - psi[1]) * s];
    let overlap = target[0].conj() * result[0] + target[1].conj() * result[1];
    overlap.norm_sqr()
}

fn h2(state: &mut [Complex64; 4], bit: usize) {
    let s = core::f64::consts::FRAC_1_SQRT_2;
    for z in 0..4 {
        if z & bit == 0 {
            let a = state[z];
            let b = state[z | bit];
            state[z] = (a + b) * s;
            state[z | bit] = (a - b) * s;
        }
    }
}
