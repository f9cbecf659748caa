//! Deterministic randomness: every public entry point takes one 64-bit seed,
//! and independent internal streams are derived from it by mixing in a purpose
//! label (and an optional block index). The mixing chain is fixed here rather
//! than borrowed from a hasher so that streams are stable across toolchains.

use rand_chacha::ChaCha12Rng;

/// SplitMix64 finalizer.
pub(crate) fn mix(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn derive(seed: u64, label: &str) -> u64 {
    let mut s = mix(seed);
    for &b in label.as_bytes() {
        s = mix(s ^ u64::from(b));
    }
    s
}

pub(crate) fn derive_indexed(seed: u64, label: &str, index: u64) -> u64 {
    mix(derive(seed, label) ^ mix(index))
}

pub(crate) fn stream(seed: u64, label: &str) -> ChaCha12Rng {
    use rand::SeedableRng;
    ChaCha12Rng::seed_from_u64(derive(seed, label))
}

pub(crate) fn stream_indexed(seed: u64, label: &str, index: u64) -> ChaCha12Rng {
    use rand::SeedableRng;
    ChaCha12Rng::seed_from_u64(derive_indexed(seed, label, index))
}
