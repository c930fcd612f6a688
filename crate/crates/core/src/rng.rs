//! Deterministic random streams.
//!
//! Every random draw in the crate comes from a [`StreamRng`] derived from a
//! root seed and a path of indices (step, grid cell, replicate, ...). Work
//! items never share a generator, so results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Tags separating the stream families of a campaign.
pub mod tag {
    pub const DATA: u64 = 0x6461_7461;
    pub const PROJECTION: u64 = 0x7072_6f6a;
    pub const ORACLE: u64 = 0x6f72_636c;
    pub const REPLICA: u64 = 0x7265_706c;
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a root seed with a path of indices into a stream identifier.
pub fn stream_id(seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix(seed), |acc, &p| splitmix(acc ^ splitmix(p)))
}

pub fn stream(seed: u64, path: &[u64]) -> StreamRng {
    ChaCha8Rng::seed_from_u64(stream_id(seed, path))
}
