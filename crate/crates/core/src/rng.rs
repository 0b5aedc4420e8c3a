//! Seeded randomness. All sampling in the crate draws from [`seeded`].

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Identifier of the generator, recorded in manifests and reports.
pub const RNG_ALGORITHM: &str = "chacha8 (rand_chacha 0.3, seed_from_u64)";

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent stream for a sub-task (fold, class, category).
pub fn substream(seed: u64, tag: u64) -> Rng {
    let mixed = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(17);
    ChaCha8Rng::seed_from_u64(mixed)
}
