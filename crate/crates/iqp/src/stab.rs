//! Pauli/Clifford engine: exact-sign conjugation of Pauli operators through
//! Clifford circuits, stabilizer sampling of X-programs at odd multiples of
//! π/4, the one-clean-qubit parity construction, and the GF(2) clock algebra
//! of graph-state dynamics.
//!
//! A Pauli operator is stored as i^φ · X^x · Z^z with φ ∈ Z₄ and bit masks
//! x, z; all gate rules below are derived for exactly this ordering
//! convention and are cross-checked against dense matrices in the tests.

use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::f2la::{BitMatrix, BitVec};
use crate::xprog::{XProgram, SAMPLE_BLOCK};

/// Pauli operator i^phase · X^{x_mask} · Z^{z_mask}.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliOperator {
    phase: u8,
    x: BitVec,
    z: BitVec,
}

impl PauliOperator {
    pub fn identity(qubits: usize) -> Self {
        PauliOperator {
            phase: 0,
            x: BitVec::zeros(qubits),
            z: BitVec::zeros(qubits),
        }
    }

    pub fn x_on(qubits: usize, q: usize) -> Self {
        let mut p = Self::identity(qubits);
        p.x.set(q, true);
        p
    }

    pub fn z_on(qubits: usize, q: usize) -> Self {
        let mut p = Self::identity(qubits);
        p.z.set(q, true);
        p
    }

    pub fn from_masks(phase: u8, x: BitVec, z: BitVec) -> Self {
        assert_eq!(x.len(), z.len(), "mask length mismatch");
        PauliOperator {
            phase: phase & 3,
            x,
            z,
        }
    }

    pub fn qubits(&self) -> usize {
        self.x.len()
    }

    /// Power of i in front of X^x Z^z.
    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn x_mask(&self) -> &BitVec {
        &self.x
    }

    pub fn z_mask(&self) -> &BitVec {
        &self.z
    }

    /// Group product: i^{φ₁+φ₂} X^{x₁}Z^{z₁}X^{x₂}Z^{z₂}, with the Z₁-past-X₂
    /// reordering contributing (−1)^{z₁·x₂}.
    pub fn mul(&self, other: &PauliOperator) -> PauliOperator {
        assert_eq!(self.qubits(), other.qubits(), "width mismatch");
        let mut x = self.x.clone();
        x.xor_assign(&other.x);
        let mut z = self.z.clone();
        z.xor_assign(&other.z);
        let reorder = if self.z.dot(&other.x) { 2 } else { 0 };
        PauliOperator {
            phase: (self.phase + other.phase + reorder) & 3,
            x,
            z,
        }
    }

    /// Two Paulis commute iff x₁·z₂ + z₁·x₂ = 0 over GF(2).
    pub fn commutes_with(&self, other: &PauliOperator) -> bool {
        !(self.x.dot(&other.z) ^ self.z.dot(&other.x))
    }

    /// True when both masks are empty (operator is i^φ · identity).
    pub fn is_scalar(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }
}

impl fmt::Debug for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "i^{}·X[{}]·Z[{}]", self.phase, self.x, self.z)
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        f.write_str(prefix)?;
        if self.is_scalar() {
            return f.write_str("I");
        }
        let mut first = true;
        for q in 0..self.qubits() {
            let (a, b) = (self.x.get(q), self.z.get(q));
            let letter = match (a, b) {
                (false, false) => continue,
                (true, false) => "X",
                (false, true) => "Z",
                (true, true) => "XZ",
            };
            if !first {
                f.write_str("·")?;
            }
            write!(f, "{letter}{q}")?;
            first = false;
        }
        Ok(())
    }
}

/// One Clifford gate; qubit indices are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CliffordGate {
    H(usize),
    S(usize),
    X(usize),
    Z(usize),
    Cnot(usize, usize),
    Cz(usize, usize),
}

impl CliffordGate {
    fn max_index(&self) -> usize {
        match *self {
            CliffordGate::H(q) | CliffordGate::S(q) | CliffordGate::X(q) | CliffordGate::Z(q) => q,
            CliffordGate::Cnot(a, b) | CliffordGate::Cz(a, b) => a.max(b),
        }
    }
}

/// Ordered gate list on a fixed register width.
#[derive(Debug, Clone)]
pub struct CliffordCircuit {
    qubits: usize,
    gates: Vec<CliffordGate>,
}

impl CliffordCircuit {
    pub fn new(qubits: usize) -> Self {
        CliffordCircuit {
            qubits,
            gates: Vec::new(),
        }
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn gates(&self) -> &[CliffordGate] {
        &self.gates
    }

    pub fn push(&mut self, gate: CliffordGate) {
        assert!(gate.max_index() < self.qubits, "gate index out of range");
        if let CliffordGate::Cnot(a, b) | CliffordGate::Cz(a, b) = gate {
            assert_ne!(a, b, "two-qubit gate needs distinct qubits");
        }
        self.gates.push(gate);
    }

    /// C · P · C†, applying gate rules in temporal order with exact phases.
    pub fn conjugate(&self, p: &PauliOperator) -> PauliOperator {
        assert_eq!(p.qubits(), self.qubits, "width mismatch");
        let mut p = p.clone();
        for gate in &self.gates {
            apply_gate(&mut p, *gate);
        }
        p
    }
}

/// In-place single-gate conjugation U·P·U† in the i^φ X^x Z^z convention.
fn apply_gate(p: &mut PauliOperator, gate: CliffordGate) {
    match gate {
        CliffordGate::H(q) => {
            let (a, b) = (p.x.get(q), p.z.get(q));
            // X↔Z; the (1,1) cell XZ maps to ZX = −XZ
            if a && b {
                p.phase = (p.phase + 2) & 3;
            }
            p.x.set(q, b);
            p.z.set(q, a);
        }
        CliffordGate::S(q) => {
            if p.x.get(q) {
                // X → iXZ, XZ → iX
                p.phase = (p.phase + 1) & 3;
                p.z.set(q, !p.z.get(q));
            }
        }
        CliffordGate::X(q) => {
            if p.z.get(q) {
                p.phase = (p.phase + 2) & 3;
            }
        }
        CliffordGate::Z(q) => {
            if p.x.get(q) {
                p.phase = (p.phase + 2) & 3;
            }
        }
        CliffordGate::Cnot(c, t) => {
            // X_c → X_cX_t, Z_t → Z_cZ_t; sign-free in this convention
            if p.x.get(c) {
                p.x.set(t, !p.x.get(t));
            }
            if p.z.get(t) {
                p.z.set(c, !p.z.get(c));
            }
        }
        CliffordGate::Cz(a, b) => {
            // X_a → X_aZ_b, X_b → Z_aX_b; X_aX_b picks up Z_bX_b = −X_bZ_b
            if p.x.get(a) && p.x.get(b) {
                p.phase = (p.phase + 2) & 3;
            }
            if p.x.get(a) {
                p.z.set(b, !p.z.get(b));
            }
            if p.x.get(b) {
                p.z.set(a, !p.z.get(a));
            }
        }
    }
}

/// Stabilizer state on n qubits: n independent commuting generators.
#[derive(Clone, Debug)]
pub struct StabilizerState {
    gens: Vec<PauliOperator>,
}

impl StabilizerState {
    /// |0ⁿ⟩, stabilized by Z₀ … Z_{n−1}.
    pub fn zero(qubits: usize) -> Self {
        StabilizerState {
            gens: (0..qubits).map(|q| PauliOperator::z_on(qubits, q)).collect(),
        }
    }

    pub fn qubits(&self) -> usize {
        self.gens.len()
    }

    pub fn generators(&self) -> &[PauliOperator] {
        &self.gens
    }

    /// Applies exp(iθ X^{⊗support}) for θ an odd multiple of π/4.
    ///
    /// Commuting generators are untouched; an anticommuting generator S maps
    /// to S·(cos 2θ − i sin 2θ · X^{⊗support}) = i^{±1}·S·X^{⊗support}.
    pub fn rotate_x(&mut self, support: &BitVec, theta: QuarterAngle) {
        let n = self.qubits();
        assert_eq!(support.len(), n, "support length mismatch");
        let x_p = PauliOperator::from_masks(theta.phase_step(), support.clone(), BitVec::zeros(n));
        for g in self.gens.iter_mut() {
            if !g.commutes_with(&x_p) {
                *g = g.mul(&x_p);
            }
        }
    }

    /// Applies one Clifford gate to the state (conjugates every generator).
    pub fn apply(&mut self, gate: CliffordGate) {
        for g in self.gens.iter_mut() {
            apply_gate(g, gate);
        }
    }

    /// Measures every qubit in index order in the computational basis.
    /// Random outcomes consume exactly one RNG bit each.
    pub fn measure_all(&mut self, rng: &mut impl Rng) -> BitVec {
        let n = self.qubits();
        let mut out = BitVec::zeros(n);
        for q in 0..n {
            out.set(q, self.measure(q, rng));
        }
        out
    }

    /// Measures Z on one qubit, updating the state.
    pub fn measure(&mut self, q: usize, rng: &mut impl Rng) -> bool {
        let n = self.qubits();
        if let Some(a) = self.gens.iter().position(|g| g.x_mask().get(q)) {
            // outcome is uniformly random; collapse
            let pivot = self.gens[a].clone();
            for (b, g) in self.gens.iter_mut().enumerate() {
                if b != a && g.x_mask().get(q) {
                    *g = g.mul(&pivot);
                }
            }
            let bit: bool = rng.gen();
            let mut collapsed = PauliOperator::z_on(n, q);
            if bit {
                collapsed.phase = 2;
            }
            self.gens[a] = collapsed;
            bit
        } else {
            // Z_q is in the group: outcome fixed by the sign of the product
            let mut system = BitMatrix::zeros(2 * n, n);
            for (j, g) in self.gens.iter().enumerate() {
                for i in 0..n {
                    system.set(i, j, g.x_mask().get(i));
                    system.set(n + i, j, g.z_mask().get(i));
                }
            }
            let mut target = BitVec::zeros(2 * n);
            target.set(n + q, true);
            let select = system
                .solve(&target)
                .expect("Z_q must lie in the stabilizer group");
            let mut product = PauliOperator::identity(n);
            for j in 0..n {
                if select.get(j) {
                    product = product.mul(&self.gens[j]);
                }
            }
            debug_assert!(product.x_mask().is_zero());
            debug_assert_eq!(product.phase & 1, 0);
            product.phase == 2
        }
    }
}

/// Error for a rotation angle outside the Clifford family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NotCliffordAngle(pub f64);

impl fmt::Display for NotCliffordAngle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "angle {} is not an odd multiple of π/4", self.0)
    }
}

impl core::error::Error for NotCliffordAngle {}

/// Rotation angle class for stabilizer evolution: which odd multiple of π/4
/// (mod 2π) the angle reduces to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuarterAngle {
    /// θ ≡ π/4 or 5π/4: anticommuting generators gain a factor −i·X-part.
    PlusQuarter,
    /// θ ≡ 3π/4 or 7π/4: anticommuting generators gain a factor +i·X-part.
    MinusQuarter,
}

impl QuarterAngle {
    /// Classifies an angle, accepting odd multiples of π/4 within 1e−9.
    pub fn classify(theta: f64) -> Result<Self, NotCliffordAngle> {
        let quarter = theta / core::f64::consts::FRAC_PI_4;
        let rounded = crate::fmath::round(quarter);
        if (quarter - rounded).abs() > 1e-9 {
            return Err(NotCliffordAngle(theta));
        }
        let m = rounded as i64;
        if m & 1 == 0 {
            return Err(NotCliffordAngle(theta));
        }
        Ok(match m.rem_euclid(8) {
            1 | 5 => QuarterAngle::PlusQuarter,
            _ => QuarterAngle::MinusQuarter,
        })
    }

    /// i-power attached to the X-part factor when a generator anticommutes.
    fn phase_step(self) -> u8 {
        match self {
            QuarterAngle::PlusQuarter => 3,
            QuarterAngle::MinusQuarter => 1,
        }
    }
}

/// Exact sampling of an X-program whose angle is an odd multiple of π/4 by
/// stabilizer evolution and tableau measurement. Deterministic in `seed`,
/// independent of block-to-worker assignment (blocks of [`SAMPLE_BLOCK`]).
pub fn pi4_sample(
    program: &XProgram,
    count: usize,
    seed: u64,
) -> Result<Vec<BitVec>, NotCliffordAngle> {
    let angle = QuarterAngle::classify(program.theta())?;
    let mut out = Vec::with_capacity(count);
    let mut block = 0u64;
    while out.len() < count {
        let len = SAMPLE_BLOCK.min(count - out.len());
        out.extend(pi4_sample_block(program, angle, seed, block, len));
        block += 1;
    }
    Ok(out)
}

fn pi4_sample_block(
    program: &XProgram,
    angle: QuarterAngle,
    seed: u64,
    block: u64,
    len: usize,
) -> Vec<BitVec> {
    let mut rng = crate::rng::stream_indexed(seed, "stab.sample", block);
    let n = program.qubits();
    let rows: Vec<BitVec> = (0..program.elements())
        .map(|r| program.matrix().row_vec(r))
        .collect();
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        let mut state = StabilizerState::zero(n);
        for row in &rows {
            state.rotate_x(row, angle);
        }
        out.push(state.measure_all(&mut rng));
    }
    out
}

/// Error building a one-clean-qubit parity circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dqc1Error {
    /// A gate touches a register wire outside 0..width.
    WireOutOfRange { wire: usize, width: usize },
    /// A gate lists the same wire twice.
    SelfTarget { wire: usize },
}

impl fmt::Display for Dqc1Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dqc1Error::WireOutOfRange { wire, width } => {
                write!(f, "wire {wire} outside register width {width}")
            }
            Dqc1Error::SelfTarget { wire } => write!(f, "gate with identical wires {wire}"),
        }
    }
}

impl core::error::Error for Dqc1Error {}

/// Builds the one-clean-qubit circuit whose single-qubit bias decides the
/// parity language: W(x) = U† · X₁ · U with
/// U = H^{⊗w} · C · V(x) · H^{⊗w}, where V(x) fans the input string out from
/// the clean qubit and C is the given CNOT circuit on the register wires
/// (0-based pairs (control, target)).
pub fn dqc1_build(
    cnot_circuit: &[(usize, usize)],
    x: &BitVec,
) -> Result<CliffordCircuit, Dqc1Error> {
    let width = x.len();
    for &(c, t) in cnot_circuit {
        if c >= width || t >= width {
            return Err(Dqc1Error::WireOutOfRange {
                wire: c.max(t),
                width,
            });
        }
        if c == t {
            return Err(Dqc1Error::SelfTarget { wire: c });
        }
    }
    let w = width + 1;
    let mut half = Vec::new();
    for q in 0..w {
        half.push(CliffordGate::H(q));
    }
    for j in 0..width {
        if x.get(j) {
            half.push(CliffordGate::Cnot(0, j + 1));
        }
    }
    for &(c, t) in cnot_circuit {
        half.push(CliffordGate::Cnot(c + 1, t + 1));
    }
    for q in 0..w {
        half.push(CliffordGate::H(q));
    }
    let mut circuit = CliffordCircuit::new(w);
    for &g in &half {
        circuit.push(g);
    }
    circuit.push(CliffordGate::X(1));
    for &g in half.iter().rev() {
        circuit.push(g);
    }
    Ok(circuit)
}

/// Expectation of Z on the clean qubit after running `w_circuit` on the
/// one-clean-qubit state: ±1 when W·Z₀·W† = ±Z₀, otherwise 0.
pub fn dqc1_bias(w_circuit: &CliffordCircuit) -> i8 {
    let z0 = PauliOperator::z_on(w_circuit.qubits(), 0);
    let conj = w_circuit.conjugate(&z0);
    if conj.x_mask() == z0.x_mask() && conj.z_mask() == z0.z_mask() {
        match conj.phase() {
            0 => 1,
            2 => -1,
            _ => 0,
        }
    } else {
        0
    }
}

/// Runs a CNOT circuit classically on a bit string (gates are 0-based
/// (control, target) pairs applied in order).
pub fn cnot_eval(cnot_circuit: &[(usize, usize)], x: &BitVec) -> BitVec {
    let mut b = x.clone();
    for &(c, t) in cnot_circuit {
        if b.get(c) {
            b.set(t, !b.get(t));
        }
    }
    b
}

/// The clock generator in its GF(2) form: the block matrix
/// [[0, I], [I, A]] acting on stacked (x-mask, z-mask) vectors.
pub fn clock_matrix(adjacency: &BitMatrix) -> BitMatrix {
    let n = check_adjacency(adjacency);
    BitMatrix::from_fn(2 * n, 2 * n, |r, c| {
        let (rb, ri) = (r >= n, r % n);
        let (cb, ci) = (c >= n, c % n);
        match (rb, cb) {
            (false, false) => false,
            (false, true) | (true, false) => ri == ci,
            (true, true) => adjacency.get(ri, ci),
        }
    })
}

/// k-th power of the clock matrix via the three-term recurrence
/// S_k = S_{k−2} + A·S_{k−1} (S_{−2} = I, S_{−1} = 0):
/// M^k = [[S_{k−2}, S_{k−1}], [S_{k−1}, S_k]].
pub fn clock_power(adjacency: &BitMatrix, k: usize) -> BitMatrix {
    let n = check_adjacency(adjacency);
    // rolling window (S_{j−2}, S_{j−1}, S_j), starting at j = 0
    let mut older = BitMatrix::identity(n);
    let mut old = BitMatrix::zeros(n, n);
    let mut cur = BitMatrix::identity(n);
    for _ in 0..k {
        let next = {
            let az = adjacency.mul(&cur);
            BitMatrix::from_fn(n, n, |r, c| az.get(r, c) ^ old.get(r, c))
        };
        older = old;
        old = cur;
        cur = next;
    }
    // after the loop: older = S_{k−2}, old = S_{k−1}, cur = S_k
    BitMatrix::from_fn(2 * n, 2 * n, |r, c| {
        let (rb, ri) = (r >= n, r % n);
        let (cb, ci) = (c >= n, c % n);
        match (rb, cb) {
            (false, false) => older.get(ri, ci),
            (false, true) | (true, false) => old.get(ri, ci),
            (true, true) => cur.get(ri, ci),
        }
    })
}

fn check_adjacency(adjacency: &BitMatrix) -> usize {
    let n = adjacency.rows();
    assert_eq!(adjacency.cols(), n, "adjacency must be square");
    for r in 0..n {
        assert!(!adjacency.get(r, r), "adjacency must have zero diagonal");
        for c in 0..r {
            assert_eq!(adjacency.get(r, c), adjacency.get(c, r), "must be symmetric");
        }
    }
    n
}

/// One clock tick as a circuit: a Hadamard on every vertex, then a CZ per
/// graph edge. Conjugation by this circuit realizes [`clock_matrix`] on the
/// (x, z) masks, with exact signs kept on top.
pub fn clock_circuit(adjacency: &BitMatrix) -> CliffordCircuit {
    let n = check_adjacency(adjacency);
    let mut c = CliffordCircuit::new(n);
    for q in 0..n {
        c.push(CliffordGate::H(q));
    }
    for a in 0..n {
        for b in a + 1..n {
            if adjacency.get(a, b) {
                c.push(CliffordGate::Cz(a, b));
            }
        }
    }
    c
}

/// Path-graph adjacency on `vertices` vertices.
pub fn line_adjacency(vertices: usize) -> BitMatrix {
    BitMatrix::from_fn(vertices, vertices, |r, c| r.abs_diff(c) == 1)
}

/// Logical qubit encoding carried by the line-graph clock on N = 3n+2
/// vertices: pair j is (G^{3j}·X₀·G^{−3j}, G^{3j}·Z₀·G^{−3j}) for
/// j = 0 … 2n+1; within a pair the operators anticommute, across pairs
/// they commute.
pub fn logical_encoding(n: usize) -> Vec<(PauliOperator, PauliOperator)> {
    let vertices = 3 * n + 2;
    let g = clock_circuit(&line_adjacency(vertices));
    let mut x = PauliOperator::x_on(vertices, 0);
    let mut z = PauliOperator::z_on(vertices, 0);
    let mut pairs = Vec::with_capacity(2 * n + 2);
    for _ in 0..2 * n + 2 {
        pairs.push((x.clone(), z.clone()));
        for _ in 0..3 {
            x = g.conjugate(&x);
            z = g.conjugate(&z);
        }
    }
    pairs
}
