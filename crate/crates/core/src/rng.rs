use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The single RNG used everywhere; ChaCha streams are stable across platforms.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
