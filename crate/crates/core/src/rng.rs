//! Reproducible random streams.
//!
//! A [`SeedSpec`] names one ChaCha8 stream: the base seed keys the cipher and
//! the stream id selects one of its 2^64 independent streams. Work is always
//! split by stream id, never by sharing a generator between tasks, so results
//! do not depend on how many threads run them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub type SimRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub base: u64,
    pub stream: u64,
}

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl SeedSpec {
    pub fn new(base: u64, stream: u64) -> Self {
        SeedSpec { base, stream }
    }

    pub fn rng(&self) -> SimRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.base);
        rng.set_stream(self.stream);
        rng
    }

    /// Same base, different stream.
    pub fn with_stream(&self, stream: u64) -> Self {
        SeedSpec {
            base: self.base,
            stream,
        }
    }

    /// Derive an independent family of streams for a named purpose. The
    /// result is a pure function of `(self, tag)`.
    pub fn derive(&self, tag: u64) -> Self {
        SeedSpec {
            base: mix64(self.base ^ mix64(self.stream.wrapping_add(mix64(tag)))),
            stream: 0,
        }
    }
}

/// Stable 64-bit tag for a purpose string (FNV-1a).
pub fn tag(name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}
