//! Seed derivation for per-trial random streams.
//!
//! Every trial of a simulation owns its streams, derived purely from the
//! run seed and the trial index, so scheduling never changes results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tag for the arrival order of a trial.
pub const ORDER_STREAM: u64 = 0;
/// Stream tag for algorithm-internal coin flips.
pub const ALGORITHM_STREAM: u64 = 1;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hashes `(seed, trial, tag)` into a 64-bit seed.
#[inline]
pub fn derive_seed(seed: u64, trial: u64, tag: u64) -> u64 {
    mix64(mix64(mix64(seed) ^ trial) ^ tag.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

/// The generator used everywhere a seed becomes randomness.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
