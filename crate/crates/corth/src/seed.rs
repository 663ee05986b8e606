//! Deterministic seed derivation.
//!
//! Every randomized routine draws from its own ChaCha8 stream, keyed by a
//! domain tag plus the indices that identify the work item (feature, fold,
//! replicate, ...). Streams never depend on thread scheduling, so parallel
//! maps over work items produce output identical to a sequential run.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Domain tags keep streams for unrelated purposes disjoint even when their
/// index tuples collide.
pub mod tag {
    pub const PARTITION: u64 = 1;
    pub const NUISANCE: u64 = 2;
    pub const CV_FOLDS: u64 = 3;
    pub const DAG: u64 = 4;
    pub const NODE_NOISE: u64 = 5;
    pub const BENCH_GRAPH: u64 = 6;
    pub const BENCH_METHOD: u64 = 7;
    pub const STABILITY_RUN: u64 = 8;
    pub const BOOTSTRAP: u64 = 9;
}

/// splitmix64 finalizer: a full-avalanche 64-bit mixer.
fn mix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Folds `words` into `seed` one 64-bit lane at a time.
pub fn derive(seed: u64, words: &[u64]) -> u64 {
    let mut acc = mix64(seed ^ 0xd6e8_feb8_6659_fd93);
    for &w in words {
        acc = mix64(acc ^ w);
    }
    acc
}

/// Fresh ChaCha8 stream for the item identified by `(seed, words)`.
pub fn rng_from(seed: u64, words: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(seed, words))
}
