//! Deterministic seed derivation.
//!
//! Every random stage takes its generator from `derive(root, tag, index)` so
//! a single user seed fans out into independent, reproducible streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sub-seed for stage `tag`, item `index`.
pub fn derive(root: u64, tag: u64, index: u64) -> u64 {
    mix64(mix64(root ^ mix64(tag)) ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform draw in [0, 1) from a 64-bit hash, using the top 53 bits.
#[inline]
pub fn unit_f64(h: u64) -> f64 {
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

// Stage tags. Changing any of these changes every downstream result.
pub const TAG_MISSING: u64 = 1;
pub const TAG_FOLDS: u64 = 2;
pub const TAG_INIT: u64 = 3;
pub const TAG_DROPOUT: u64 = 4;
pub const TAG_TUNE: u64 = 5;
pub const TAG_FOLD_MODEL: u64 = 6;
