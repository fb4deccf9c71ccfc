//! Deterministic random streams.
//!
//! Every stochastic operation takes a `(seed, stream)` pair so that results
//! depend only on those two numbers and never on call order elsewhere.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream namespaces, kept apart so that e.g. batch sampling at step 7 never
/// shares a keystream with generator noise at step 7.
pub mod streams {
    pub const SPLIT: u64 = 1 << 56;
    pub const EDGE_BATCH: u64 = 2 << 56;
    pub const WALK_BATCH: u64 = 3 << 56;
    pub const GENERATE: u64 = 4 << 56;
    pub const ASSEMBLE: u64 = 5 << 56;
    pub const INIT: u64 = 6 << 56;
    pub const CRITIC: u64 = 7 << 56;
    pub const GENERATOR: u64 = 8 << 56;
    pub const DP_NOISE: u64 = 9 << 56;
    pub const CHECKPOINT: u64 = 10 << 56;
    pub const RANDOM_GRAPH: u64 = 11 << 56;
}

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Mixes `tag` into `seed` (splitmix64 finalizer) for sub-seeds such as a
/// checkpoint's generation seed.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
