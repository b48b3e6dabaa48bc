//! Seed derivation for reproducible parallel trials.
//!
//! Every trial gets its own generator seeded from `(master_seed, index)`, so
//! results never depend on how trials are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TrialRng = ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `index` under `master`.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index))
}

pub fn rng_from_seed(seed: u64) -> TrialRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for trial `index` under `master`.
pub fn trial_rng(master: u64, index: u64) -> TrialRng {
    rng_from_seed(trial_seed(master, index))
}
