//! Deterministic RNG derivation.
//!
//! Every random consumer in the library derives its generator from a root
//! seed plus a sequence of stream labels through SplitMix64. The same
//! (seed, labels) pair always yields the same ChaCha8 stream, on every
//! platform, so replicates are reproducible and independent.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 output function (Steele, Lea, Flood 2014).
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Mix a root seed with a stream label path into a single 64-bit seed.
pub fn mix_seed(root: u64, labels: &[u64]) -> u64 {
    let mut acc = splitmix64(root);
    for &label in labels {
        acc = splitmix64(acc ^ splitmix64(label));
    }
    acc
}

/// A deterministic generator for the stream identified by `labels`.
pub fn derive_rng(root: u64, labels: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix_seed(root, labels))
}

/// 64-bit FNV-1a over a byte slice. Used for stable, cross-process hashing
/// of canonical encodings (infostates, configs).
pub const FNV_OFFSET: u64 = 0xcbf29ce484222325;
pub const FNV_PRIME: u64 = 0x100000001b3;

pub fn fnv1a(bytes: &[u8]) -> u64 {
    fnv1a_continue(FNV_OFFSET, bytes)
}

/// Continue an FNV-1a stream from a previous digest.
pub fn fnv1a_continue(mut hash: u64, bytes: &[u8]) -> u64 {
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}
