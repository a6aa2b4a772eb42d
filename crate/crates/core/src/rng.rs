//! Deterministic seed derivation.
//!
//! All randomness flows from one master seed; independent draws (Monte Carlo
//! realizations, sampling masks) get their own streams through a SplitMix64
//! step, so parallel and sequential execution produce identical results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Derives the seed for sub-stream `index` of `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(index.wrapping_mul(0xbf58_476d_1ce4_e5b9));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// RNG for sub-stream `index` of `master`.
pub fn stream_rng(master: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, index))
}
