//! Seeded random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 stream. The 64-bit
//! user seed keys the generator and the stream id is derived from a list of
//! tags (a domain tag followed by indices such as trial, repetition, class)
//! by chaining SplitMix64. A stream therefore depends only on `(seed, tags)`,
//! not on how many other streams were consumed before it, so repetitions and
//! trials can be generated in any order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Domain tags keeping unrelated streams apart.
pub mod tag {
    pub const PARTITION: u64 = 0x5041_5254;
    pub const DATASET: u64 = 0x4441_5441;
    pub const PLAN: u64 = 0x504c_414e;
    pub const TEST_SAMPLE: u64 = 0x5445_5354;
}

/// One SplitMix64 step.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Fold a tag path into a single 64-bit key.
pub fn derive(seed: u64, tags: &[u64]) -> u64 {
    tags.iter()
        .fold(splitmix64(seed), |acc, &t| splitmix64(acc ^ splitmix64(t)))
}

/// Independent stream for `(seed, tags)`.
pub fn stream(seed: u64, tags: &[u64]) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(derive(seed, tags));
    rng
}
