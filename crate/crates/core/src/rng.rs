//! Deterministic random streams derived from one master seed.
//!
//! Every consumer asks for a `(stream, index)` pair and gets an independent
//! ChaCha8 generator, so results do not depend on scheduling order.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Purpose tag of a derived stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Stream {
    Generation = 1,
    Rewiring = 2,
    Bootstrap = 3,
    Quadrature = 4,
    Pair = 5,
    Comparison = 6,
}

const INDEX_MASK: u64 = (1 << 56) - 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngSeed(pub u64);

impl RngSeed {
    pub fn new(seed: u64) -> Self {
        Self(seed)
    }

    pub fn value(self) -> u64 {
        self.0
    }

    pub fn rng(self, stream: Stream, index: u64) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.0);
        rng.set_stream(((stream as u64) << 56) | (index & INDEX_MASK));
        rng
    }

    /// Child master seed for nested work (e.g. one comparison inside a power study).
    pub fn derive(self, stream: Stream, index: u64) -> RngSeed {
        RngSeed(self.rng(stream, index).next_u64())
    }
}

impl From<u64> for RngSeed {
    fn from(seed: u64) -> Self {
        Self(seed)
    }
}
