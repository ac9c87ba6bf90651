//! Deterministic derivation of independent RNG streams.
//!
//! Every random draw in the simulator comes from a `ChaCha8Rng` seeded through
//! [`derive`], so one run seed fans out into per-client, per-round streams
//! that do not shift when participation changes.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finaliser.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hashes a base seed together with a sequence of stream coordinates.
pub fn derive(base: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(mix(base), |acc, &p| mix(acc ^ mix(p)))
}

pub fn rng(base: u64, parts: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(base, parts))
}

/// Stream tags, so that e.g. client 3's training stream never collides with
/// the participation sampler.
pub(crate) mod tag {
    pub const CLIENT_TRAIN: u64 = 1;
    pub const PARTICIPATION: u64 = 2;
    pub const INIT: u64 = 3;
}
