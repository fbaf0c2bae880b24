//! Seeded, portable randomness. Every stochastic routine derives its stream
//! from a user seed plus a few integers (index, attempt, chain id), so runs
//! are reproducible bit for bit across platforms.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds `stream` into `seed` and returns a ChaCha8 generator.
pub fn seeded(seed: u64, stream: &[u64]) -> Rng {
    let mixed = stream.iter().fold(splitmix64(seed), |acc, &s| splitmix64(acc ^ splitmix64(s)));
    ChaCha8Rng::seed_from_u64(mixed)
}
