//! Seeded random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 generator keyed by a
//! `(seed, stream)` pair, so work scheduled in parallel draws the same numbers
//! no matter which thread runs it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Packs two 32-bit indices (e.g. grid point and trial) into one stream id.
pub fn stream_id(outer: u32, inner: u32) -> u64 {
    (u64::from(outer) << 32) | u64::from(inner)
}
