//! Binary linear codes presented by generator matrices, and the
//! quadratic-residue family used by the challenge protocol.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use crate::f2la::{BitMatrix, BitVec};

/// A linear code given as the column span of a generator matrix.
///
/// Codewords live in the row-index space: a message `m` (length = number of
/// generator columns) maps to the codeword `G * m`.
#[derive(Clone, Debug)]
pub struct LinearCode {
    generator: BitMatrix,
    rank: usize,
}

/// Error constructing a quadratic-residue code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QrError {
    /// `q` is not prime.
    NotPrime(u64),
    /// `q + 1` is not divisible by 8.
    BadResidueClass(u64),
    /// `q` is too large for dense enumeration downstream.
    TooLarge(u64),
}

impl fmt::Display for QrError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QrError::NotPrime(q) => write!(f, "{q} is not prime"),
            QrError::BadResidueClass(q) => write!(f, "{q} + 1 is not divisible by 8"),
            QrError::TooLarge(q) => write!(f, "{q} exceeds the supported modulus range"),
        }
    }
}

impl core::error::Error for QrError {}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Indicator of the nonzero quadratic residues mod `q`.
fn residue_indicator(q: u64) -> Vec<bool> {
    let mut ind = alloc::vec![false; q as usize];
    for x in 1..q {
        ind[((x * x) % q) as usize] = true;
    }
    ind[0] = false;
    ind
}

impl LinearCode {
    /// Wraps an arbitrary generator matrix; the rank is computed once.
    pub fn from_generator(generator: BitMatrix) -> Self {
        let rank = generator.rank();
        LinearCode { generator, rank }
    }

    /// Quadratic-residue construction for a prime `q` with `8 | q + 1`.
    ///
    /// The generator has `q` rows and `(q + 1) / 2` columns: column `i` is
    /// the indicator of the nonzero quadratic residues mod `q`, cyclically
    /// shifted down by `i`. These first `(q + 1) / 2` shifts are linearly
    /// independent, so the rank equals the column count.
    pub fn quadratic_residue(q: u64) -> Result<Self, QrError> {
        if !is_prime(q) {
            return Err(QrError::NotPrime(q));
        }
        if !(q + 1).is_multiple_of(8) {
            return Err(QrError::BadResidueClass(q));
        }
        if q > (1 << 20) {
            return Err(QrError::TooLarge(q));
        }
        let ind = residue_indicator(q);
        let n = q as usize;
        let k = n.div_ceil(2);
        let generator = BitMatrix::from_fn(n, k, |r, c| ind[(r + n - c) % n]);
        let code = Self::from_generator(generator);
        assert_eq!(code.rank, k, "residue shifts must be independent");
        Ok(code)
    }

    pub fn generator(&self) -> &BitMatrix {
        &self.generator
    }

    /// Code length (number of generator rows).
    pub fn len(&self) -> usize {
        self.generator.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.generator.rows() == 0
    }

    /// Dimension of the code (rank of the generator).
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Codeword for a message vector.
    pub fn encode(&self, message: &BitVec) -> BitVec {
        self.generator.mul_vec(message)
    }

    /// Whether `word` lies in the column span of the generator.
    pub fn contains(&self, word: &BitVec) -> bool {
        self.generator.append_column(word).rank() == self.rank
    }

    /// Exact weight enumerator, counting each codeword once.
    ///
    /// Walks the `2^rank` codewords along a Gray sequence, so consecutive
    /// words differ by one generator column. Practical up to rank ~28.
    pub fn weight_distribution(&self) -> BTreeMap<usize, u64> {
        let (reduced, _) = self.generator.column_echelon();
        let r = reduced.cols();
        assert!(r <= 28, "weight enumeration needs rank <= 28, got {r}");
        let cols: Vec<BitVec> = (0..r).map(|c| reduced.column(c)).collect();
        let mut dist = BTreeMap::new();
        let mut word = BitVec::zeros(self.len());
        *dist.entry(0).or_insert(0u64) += 1;
        let total: u64 = 1 << r;
        for i in 1..total {
            let g_prev = (i - 1) ^ ((i - 1) >> 1);
            let g_cur = i ^ (i >> 1);
            let flip = (g_prev ^ g_cur).trailing_zeros() as usize;
            word.xor_assign(&cols[flip]);
            *dist.entry(word.weight()).or_insert(0) += 1;
        }
        dist
    }

    /// Mean of `f(weight)` over all codewords, via the weight enumerator.
    pub fn expect_over_codewords(&self, mut f: impl FnMut(usize) -> f64) -> f64 {
        let dist = self.weight_distribution();
        let total: f64 = dist.values().map(|&c| c as f64).sum();
        dist.iter().map(|(&w, &c)| c as f64 * f(w)).sum::<f64>() / total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primality() {
        assert!(is_prime(2) && is_prime(7) && is_prime(23) && is_prime(487));
        assert!(!is_prime(1) && !is_prime(9) && !is_prime(91));
    }

    #[test]
    fn qr7_generator_matches_hand_construction() {
        // nonzero residues mod 7: {1, 2, 4}
        let code = LinearCode::quadratic_residue(7).unwrap();
        assert_eq!(code.len(), 7);
        assert_eq!(code.rank(), 4);
        let ind = [false, true, true, false, true, false, false];
        for c in 0..4 {
            for r in 0..7 {
                assert_eq!(code.generator().get(r, c), ind[(r + 7 - c) % 7]);
            }
        }
    }

    #[test]
    fn qr7_weight_distribution() {
        let code = LinearCode::quadratic_residue(7).unwrap();
        let dist = code.weight_distribution();
        let expect: BTreeMap<usize, u64> = [(0, 1), (3, 7), (4, 7), (7, 1)].into_iter().collect();
        assert_eq!(dist, expect);
    }

    #[test]
    fn qr23_rank_and_counts() {
        let code = LinearCode::quadratic_residue(23).unwrap();
        assert_eq!(code.rank(), 12);
        let dist = code.weight_distribution();
        assert_eq!(dist.values().sum::<u64>(), 1 << 12);
        // all weights of this code are 0 or 3 mod 4
        assert!(dist.keys().all(|&w| w % 4 == 0 || w % 4 == 3));
    }

    #[test]
    fn qr31_rank() {
        let code = LinearCode::quadratic_residue(31).unwrap();
        assert_eq!(code.rank(), 16);
    }

    #[test]
    fn rejects_bad_moduli() {
        assert!(matches!(
            LinearCode::quadratic_residue(9),
            Err(QrError::NotPrime(9))
        ));
        assert!(matches!(
            LinearCode::quadratic_residue(11),
            Err(QrError::BadResidueClass(11))
        ));
        assert!(matches!(
            LinearCode::quadratic_residue(13),
            Err(QrError::BadResidueClass(13))
        ));
    }

    #[test]
    fn encode_lands_in_code() {
        let code = LinearCode::quadratic_residue(7).unwrap();
        let mut rng = crate::rng::stream(9, "test.codes");
        for _ in 0..20 {
            let m = BitVec::random(4, &mut rng);
            assert!(code.contains(&code.encode(&m)));
        }
        let mut not_cw = BitVec::zeros(7);
        not_cw.set(0, true); // weight-1 word; min distance is 3
        assert!(!code.contains(&not_cw));
    }

    #[test]
    fn contains_all_ones_word() {
        for q in [7u64, 23, 31] {
            let code = LinearCode::quadratic_residue(q).unwrap();
            let ones = BitVec::from_fn(q as usize, |_| true);
            assert!(code.contains(&ones));
        }
    }
}
