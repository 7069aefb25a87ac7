//! Seed derivation. Every stochastic step draws from its own ChaCha stream
//! keyed by `(seed, domain, index)`, so work split across threads consumes
//! exactly the same random numbers as a sequential loop.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub(crate) const KMEANS_RESTART: u64 = 1;
pub(crate) const FOREST_TREE: u64 = 2;
pub(crate) const MIS_RUN: u64 = 3;
pub(crate) const SYNTH: u64 = 4;

pub(crate) fn stream(seed: u64, domain: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ domain.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(index);
    rng
}
