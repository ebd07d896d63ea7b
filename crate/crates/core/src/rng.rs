//! Seeded random streams.
//!
//! Every random draw in the crate comes from ChaCha8 (`rand_chacha`), which
//! produces the same stream on every platform. A run seed is split into
//! independent streams by purpose so that, for example, growing the
//! unlabeled pool never changes the labeled sentences drawn for the same
//! seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Named stream identifiers.
pub mod stream {
    pub const TRUE_MODEL: u64 = 1;
    pub const LABELED: u64 = 2;
    pub const UNLABELED: u64 = 3;
    pub const TEST: u64 = 4;
    pub const SPLIT: u64 = 5;
    pub const POOL_LABELED: u64 = 6;
    pub const POOL_UNLABELED: u64 = 7;
}

/// ChaCha8 generator for `seed` on the given stream.
pub fn seeded(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// SplitMix64 finalizer folded over `parts`; used to derive sub-seeds from
/// grid coordinates.
pub fn mix(parts: &[u64]) -> u64 {
    let mut h: u64 = 0x9E37_79B9_7F4A_7C15;
    for &p in parts {
        h ^= p;
        h = h.wrapping_add(0x9E37_79B9_7F4A_7C15);
        h = (h ^ (h >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        h = (h ^ (h >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        h ^= h >> 31;
    }
    h
}
