//! Seed derivation. Every random draw in the harness flows from an explicit
//! 64-bit seed through these helpers so runs are reproducible across
//! platforms.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type HarnessRng = ChaCha8Rng;

pub fn rng(seed: u64) -> HarnessRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01B3);
    }
    hash
}

/// Mixes a base seed with a label and a list of indices into a child seed.
pub fn derive(seed: u64, label: &str, parts: &[u64]) -> u64 {
    let mut acc = splitmix64(seed ^ fnv1a(label.as_bytes()));
    for p in parts {
        acc = splitmix64(acc ^ p.wrapping_mul(0x2545_F491_4F6C_DD1D));
    }
    acc
}

/// Child seed keyed by a string (e.g. an entity key or request id).
pub fn derive_str(seed: u64, label: &str, key: &str) -> u64 {
    derive(seed, label, &[fnv1a(key.as_bytes())])
}
