//! Seed derivation. Every random stream is a ChaCha8 generator whose seed is a
//! pure function of the user seed and a path of labels, so results do not
//! depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator type used throughout.
pub type Rng = ChaCha8Rng;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for `(seed, label)`.
pub fn derive(seed: u64, label: u64) -> u64 {
    splitmix(splitmix(seed) ^ label.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

/// Generator for a seed.
pub fn rng(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

/// Draws a child seed from a running generator.
pub fn fork(rng: &mut Rng) -> u64 {
    rand::Rng::random::<u64>(rng)
}
