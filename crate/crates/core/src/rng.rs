//! Seeded, replayable random streams.
//!
//! Every random choice in the crate is drawn from an [`RngStream`]; there is
//! no global generator. A stream is identified by `(seed, stream_id)` and can
//! derive child streams, so independent trials get independent randomness
//! that is still reproducible from the top-level seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Identifies a reproducible source of randomness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self { seed, stream_id: 0 }
    }

    pub fn with_stream(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// Deterministically derived child stream.
    pub fn child(&self, id: u64) -> Self {
        Self {
            seed: self.seed,
            stream_id: splitmix(self.stream_id ^ splitmix(id.wrapping_add(0x5851_f42d))),
        }
    }
}
