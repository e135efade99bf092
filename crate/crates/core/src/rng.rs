//! Seeded random streams.
//!
//! Independent streams are derived from `(seed, stream, index)` so per-item work can run in any
//! order and still reproduce bit-for-bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// splitmix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A stream identified by a purpose tag and an item index, independent of every other stream.
pub fn derived(seed: u64, stream: u64, index: u64) -> Rng {
    seeded(mix(mix(seed ^ mix(stream)) ^ index))
}
