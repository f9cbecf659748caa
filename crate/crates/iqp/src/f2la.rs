//! Bit-packed vectors and matrices over GF(2).
//!
//! Rows are stored as little-endian runs of 64-bit words; padding bits past
//! the logical length are kept at zero so that word-level XOR, AND and
//! popcount implement the vector operations directly. All operations are
//! pure: they borrow their inputs and allocate fresh outputs.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;

const WORD: usize = 64;

#[inline]
fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD)
}

#[inline]
fn tail_mask(bits: usize) -> u64 {
    let r = bits % WORD;
    if r == 0 {
        !0
    } else {
        (1u64 << r) - 1
    }
}

/// Fixed-length bit vector.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn from_fn(len: usize, mut f: impl FnMut(usize) -> bool) -> Self {
        let mut v = Self::zeros(len);
        for i in 0..len {
            if f(i) {
                v.set(i, true);
            }
        }
        v
    }

    /// Interprets the low `len` bits of `value`, bit `i` at position `i`.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= 64, "from_u64 holds at most 64 bits");
        let mut v = Self::zeros(len);
        if len > 0 {
            v.words[0] = value & tail_mask(len);
        }
        v
    }

    /// Packs positions [0, len) back into a word; requires `len <= 64`.
    pub fn to_u64(&self) -> u64 {
        assert!(self.len <= 64, "to_u64 requires at most 64 bits");
        self.words.first().copied().unwrap_or(0)
    }

    pub fn random(len: usize, rng: &mut impl Rng) -> Self {
        let mut v = Self::zeros(len);
        for w in v.words.iter_mut() {
            *w = rng.gen();
        }
        if let Some(last) = v.words.last_mut() {
            *last &= tail_mask(len);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        self.words[i / WORD] >> (i % WORD) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, bit: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i % WORD);
        if bit {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        assert_eq!(self.len, other.len, "length mismatch");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    /// Parity of the AND of two vectors: the GF(2) inner product.
    pub fn dot(&self, other: &BitVec) -> bool {
        assert_eq!(self.len, other.len, "length mismatch");
        let mut acc = 0u32;
        for (a, b) in self.words.iter().zip(&other.words) {
            acc ^= (a & b).count_ones();
        }
        acc & 1 == 1
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(|i| self.get(i))
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec({self})")
    }
}

/// Error for text that is not a run of `0`/`1` lines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseBitsError {
    pub line: usize,
    pub reason: &'static str,
}

impl fmt::Display for ParseBitsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line + 1, self.reason)
    }
}

impl core::error::Error for ParseBitsError {}

impl FromStr for BitVec {
    type Err = ParseBitsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut v = BitVec::zeros(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => v.set(i, true),
                _ => {
                    return Err(ParseBitsError {
                        line: 0,
                        reason: "expected only '0' and '1'",
                    })
                }
            }
        }
        Ok(v)
    }
}

/// Dense matrix over GF(2), rows packed into words.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    wpr: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let wpr = words_for(cols).max(1);
        BitMatrix {
            rows,
            cols,
            wpr,
            data: vec![0; rows * wpr],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                if f(r, c) {
                    m.set(r, c, true);
                }
            }
        }
        m
    }

    pub fn from_rows(rows: &[BitVec]) -> Self {
        let cols = rows.first().map_or(0, BitVec::len);
        let mut m = Self::zeros(rows.len(), cols);
        for (r, v) in rows.iter().enumerate() {
            assert_eq!(v.len(), cols, "ragged rows");
            m.row_mut(r).copy_from_slice(v.words());
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        assert!(r < self.rows && c < self.cols, "index out of range");
        self.data[r * self.wpr + c / WORD] >> (c % WORD) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, bit: bool) {
        assert!(r < self.rows && c < self.cols, "index out of range");
        let mask = 1u64 << (c % WORD);
        let w = &mut self.data[r * self.wpr + c / WORD];
        if bit {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    pub fn row_words(&self, r: usize) -> &[u64] {
        &self.data[r * self.wpr..(r + 1) * self.wpr]
    }

    fn row_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.data[r * self.wpr..(r + 1) * self.wpr]
    }

    pub fn row_vec(&self, r: usize) -> BitVec {
        BitVec {
            len: self.cols,
            words: self.row_words(r).to_vec(),
        }
    }

    pub fn set_row(&mut self, r: usize, v: &BitVec) {
        assert_eq!(v.len(), self.cols, "length mismatch");
        self.row_mut(r).copy_from_slice(v.words());
    }

    pub fn column(&self, c: usize) -> BitVec {
        BitVec::from_fn(self.rows, |r| self.get(r, c))
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let (a, b) = (a.min(b), a.max(b));
        let (head, tail) = self.data.split_at_mut(b * self.wpr);
        head[a * self.wpr..(a + 1) * self.wpr].swap_with_slice(&mut tail[..self.wpr]);
    }

    /// XORs row `src` into row `dst`.
    pub fn row_xor(&mut self, dst: usize, src: usize) {
        assert_ne!(dst, src, "row_xor with itself");
        let (lo, hi) = (dst.min(src), dst.max(src));
        let (head, tail) = self.data.split_at_mut(hi * self.wpr);
        let lo_slice = &head[lo * self.wpr..(lo + 1) * self.wpr];
        let hi_slice = &mut tail[..self.wpr];
        if dst > src {
            for (d, s) in hi_slice.iter_mut().zip(lo_slice) {
                *d ^= s;
            }
        } else {
            // dst < src: need mutable lo, immutable hi
            let (head2, tail2) = self.data.split_at_mut(src * self.wpr);
            let d = &mut head2[dst * self.wpr..(dst + 1) * self.wpr];
            let s = &tail2[..self.wpr];
            for (dw, sw) in d.iter_mut().zip(s) {
                *dw ^= sw;
            }
        }
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            let words = self.row_words(r);
            for (wi, &w) in words.iter().enumerate() {
                let mut bits = w;
                while bits != 0 {
                    let b = bits.trailing_zeros() as usize;
                    t.set(wi * WORD + b, r, true);
                    bits &= bits - 1;
                }
            }
        }
        t
    }

    /// Matrix product over GF(2).
    pub fn mul(&self, rhs: &BitMatrix) -> BitMatrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch");
        let mut out = BitMatrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for (wi, &w) in self.row_words(r).iter().enumerate() {
                let mut bits = w;
                while bits != 0 {
                    let b = bits.trailing_zeros() as usize;
                    let j = wi * WORD + b;
                    let src = rhs.row_words(j).to_vec();
                    for (d, s) in out.row_mut(r).iter_mut().zip(&src) {
                        *d ^= s;
                    }
                    bits &= bits - 1;
                }
            }
        }
        out
    }

    /// Matrix-vector product: entry `r` is the inner product of row `r` with `v`.
    pub fn mul_vec(&self, v: &BitVec) -> BitVec {
        assert_eq!(self.cols, v.len(), "dimension mismatch");
        BitVec::from_fn(self.rows, |r| {
            let mut acc = 0u32;
            for (a, b) in self.row_words(r).iter().zip(v.words()) {
                acc ^= (a & b).count_ones();
            }
            acc & 1 == 1
        })
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols && *self == BitMatrix::identity(self.rows)
    }

    pub fn append_column(&self, col: &BitVec) -> BitMatrix {
        assert_eq!(col.len(), self.rows, "length mismatch");
        BitMatrix::from_fn(self.rows, self.cols + 1, |r, c| {
            if c < self.cols {
                self.get(r, c)
            } else {
                col.get(r)
            }
        })
    }

    pub fn vstack(&self, below: &BitMatrix) -> BitMatrix {
        assert_eq!(self.cols, below.cols, "column mismatch");
        let mut m = BitMatrix::zeros(self.rows + below.rows, self.cols);
        m.data[..self.data.len()].copy_from_slice(&self.data);
        m.data[self.data.len()..].copy_from_slice(&below.data);
        m
    }

    /// New matrix keeping the listed rows, in the order given.
    pub fn take_rows(&self, idx: &[usize]) -> BitMatrix {
        let mut m = BitMatrix::zeros(idx.len(), self.cols);
        for (r, &i) in idx.iter().enumerate() {
            let src = self.row_words(i).to_vec();
            m.row_mut(r).copy_from_slice(&src);
        }
        m
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(pr) = (r..m.rows).find(|&i| m.get(i, c)) else {
                continue;
            };
            m.swap_rows(pr, r);
            for i in r + 1..m.rows {
                if m.get(i, c) {
                    m.row_xor(i, r);
                }
            }
            r += 1;
        }
        r
    }

    /// Reduced row echelon form together with the executing row operations:
    /// returns `(rref, e, pivots)` with `e * self == rref` and `e` invertible.
    fn rref_tracked(&self) -> (BitMatrix, BitMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut e = BitMatrix::identity(self.rows);
        let mut pivots = Vec::new();
        let mut piv = 0;
        for c in 0..m.cols {
            if piv == m.rows {
                break;
            }
            let Some(pr) = (piv..m.rows).find(|&r| m.get(r, c)) else {
                continue;
            };
            m.swap_rows(pr, piv);
            e.swap_rows(pr, piv);
            for r in 0..m.rows {
                if r != piv && m.get(r, c) {
                    m.row_xor(r, piv);
                    e.row_xor(r, piv);
                }
            }
            pivots.push(c);
            piv += 1;
        }
        (m, e, pivots)
    }

    /// Canonical column echelon reduction: returns `(reduced, a)` where `a`
    /// is invertible, `self * a` equals `reduced` followed by all-zero
    /// columns, and `reduced` (the nonzero part) is the canonical
    /// representative of the column space: zero columns are dropped, pivot
    /// rows strictly increase and take the earliest positions available,
    /// and each pivot row is 1 only in its own column.
    pub fn column_echelon(&self) -> (BitMatrix, BitMatrix) {
        let (rref, e, pivots) = self.transpose().rref_tracked();
        let rank = pivots.len();
        let reduced = BitMatrix::from_fn(self.rows, rank, |r, c| rref.get(c, r));
        (reduced, e.transpose())
    }

    /// One solution of `self * x = b` if any exists (free coordinates zero).
    pub fn solve(&self, b: &BitVec) -> Option<BitVec> {
        assert_eq!(b.len(), self.rows, "length mismatch");
        let aug = self.append_column(b);
        let (rref, _, pivots) = aug.rref_tracked();
        let mut x = BitVec::zeros(self.cols);
        for (row, &pc) in pivots.iter().enumerate() {
            if pc == self.cols {
                // pivot in the augmented column: inconsistent system
                return None;
            }
            if rref.get(row, self.cols) {
                x.set(pc, true);
            }
        }
        Some(x)
    }

    /// Basis of the right kernel: all `x` with `self * x = 0`.
    pub fn kernel_basis(&self) -> Vec<BitVec> {
        let (rref, _, pivots) = self.rref_tracked();
        let mut basis = Vec::new();
        let mut pivot_set = vec![false; self.cols];
        for &p in &pivots {
            pivot_set[p] = true;
        }
        for free in (0..self.cols).filter(|&c| !pivot_set[c]) {
            let mut v = BitVec::zeros(self.cols);
            v.set(free, true);
            for (row, &pc) in pivots.iter().enumerate() {
                if rref.get(row, free) {
                    v.set(pc, true);
                }
            }
            basis.push(v);
        }
        basis
    }
}

impl fmt::Display for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            if r > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{}", self.row_vec(r))?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitMatrix {}x{}:\n{self}", self.rows, self.cols)
    }
}

impl FromStr for BitMatrix {
    type Err = ParseBitsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lines: Vec<&str> = s.lines().collect();
        if lines.is_empty() {
            return Err(ParseBitsError {
                line: 0,
                reason: "no rows",
            });
        }
        let cols = lines[0].len();
        let mut rows = Vec::with_capacity(lines.len());
        for (i, line) in lines.iter().enumerate() {
            if line.len() != cols {
                return Err(ParseBitsError {
                    line: i,
                    reason: "ragged row length",
                });
            }
            let v: BitVec = line.parse().map_err(|e: ParseBitsError| ParseBitsError {
                line: i,
                reason: e.reason,
            })?;
            rows.push(v);
        }
        Ok(BitMatrix::from_rows(&rows))
    }
}

/// One elementary row operation over GF(2).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowOp {
    /// dst ^= src (a transvection; a CNOT on basis states).
    Add { src: usize, dst: usize },
    Swap { a: usize, b: usize },
}

/// Error from [`transvection_synthesis`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthesisError {
    NotSquare { rows: usize, cols: usize },
    Singular,
}

impl fmt::Display for SynthesisError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SynthesisError::NotSquare { rows, cols } => {
                write!(f, "matrix is {rows}x{cols}, expected square")
            }
            SynthesisError::Singular => write!(f, "matrix is singular"),
        }
    }
}

impl core::error::Error for SynthesisError {}

/// Decomposes a square invertible matrix into elementary row operations:
/// applying the returned list in order to the identity matrix (via
/// [`apply_row_ops`]) reproduces the input. Only `Add` operations are
/// emitted, so the list doubles as an in-place CNOT circuit of size O(n^2).
pub fn transvection_synthesis(m: &BitMatrix) -> Result<Vec<RowOp>, SynthesisError> {
    if m.rows() != m.cols() {
        return Err(SynthesisError::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let n = m.rows();
    let mut w = m.clone();
    let mut ops = Vec::new();
    for c in 0..n {
        if !w.get(c, c) {
            let Some(src) = (c + 1..n).find(|&r| w.get(r, c)) else {
                return Err(SynthesisError::Singular);
            };
            w.row_xor(c, src);
            ops.push(RowOp::Add { src, dst: c });
        }
        for r in 0..n {
            if r != c && w.get(r, c) {
                w.row_xor(r, c);
                ops.push(RowOp::Add { src: c, dst: r });
            }
        }
    }
    debug_assert!(w.is_identity());
    ops.reverse();
    Ok(ops)
}

/// Applies row operations in order to a matrix.
pub fn apply_row_ops(m: &mut BitMatrix, ops: &[RowOp]) {
    for op in ops {
        match *op {
            RowOp::Add { src, dst } => m.row_xor(dst, src),
            RowOp::Swap { a, b } => m.swap_rows(a, b),
        }
    }
}

/// Uniformly random matrix from a 64-bit seed.
pub fn random_bitmatrix(rows: usize, cols: usize, seed: u64) -> BitMatrix {
    let mut rng = crate::rng::stream(seed, "f2la.random_bitmatrix");
    let mut m = BitMatrix::zeros(rows, cols);
    let mask = tail_mask(cols);
    for r in 0..rows {
        let row = m.row_mut(r);
        for w in row.iter_mut() {
            *w = rng.gen();
        }
        if let Some(last) = row.last_mut() {
            *last &= mask;
        }
    }
    m
}

/// Uniformly random invertible square matrix (rejection sampling).
pub fn random_invertible(n: usize, seed: u64) -> BitMatrix {
    let mut rng = crate::rng::stream(seed, "f2la.random_invertible");
    loop {
        let mut m = BitMatrix::zeros(n, n);
        let mask = tail_mask(n);
        for r in 0..n {
            let row = m.row_mut(r);
            for w in row.iter_mut() {
                *w = rng.gen();
            }
            if let Some(last) = row.last_mut() {
                *last &= mask;
            }
        }
        if m.rank() == n {
            return m;
        }
    }
}
