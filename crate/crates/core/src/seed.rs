//! Deterministic seed derivation for independent random sub-streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random stream type used for every seeded draw in the crate.
pub type StreamRng = ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a sequence of integer keys into a master seed.
pub fn derive(master: u64, keys: &[u64]) -> u64 {
    keys.iter().fold(mix64(master), |acc, &k| {
        mix64(acc ^ mix64(k.wrapping_add(GOLDEN)))
    })
}

/// FNV-1a over a string key, for keying streams by item id.
pub fn hash_str(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01B3)
    })
}

pub fn stream(seed: u64) -> StreamRng {
    StreamRng::seed_from_u64(seed)
}
