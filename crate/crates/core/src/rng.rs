//! Seeded generators. Every consumer derives its own stream from `(seed, stream)`
//! so results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

// Fixed stream tags so different consumers of one seed never share draws.
pub(crate) const STREAM_POINTS: u64 = 1 << 40;
pub(crate) const STREAM_NET: u64 = 2 << 40;
pub(crate) const STREAM_PROBE: u64 = 3 << 40;
pub(crate) const STREAM_QUAD: u64 = 4 << 40;
