//! Deterministic seed derivation.
//!
//! Every random quantity in the crate is driven by a caller-supplied 64-bit
//! seed. Substreams (per trial, per column, per pilot run) are derived with a
//! SplitMix64 mix of the base seed and a domain tag, so parallel work never
//! shares RNG state and results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer; good avalanche, cheap, stable across platforms.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from `base` and a domain `tag`.
#[inline]
pub fn derive(base: u64, tag: u64) -> u64 {
    mix64(base ^ mix64(tag))
}

/// Seed for trial number `trial` of an experiment.
#[inline]
pub fn trial_seed(base: u64, trial: u64) -> u64 {
    derive(base, 0x7472_6961_6c00_0000 ^ trial)
}

/// RNG for one sampled column: a fixed keyed stream per column index.
pub fn column_rng(matrix_seed: u64, column: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(matrix_seed);
    rng.set_stream(column.wrapping_add(1));
    rng
}

/// RNG from a bare seed (single-stream uses).
pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
