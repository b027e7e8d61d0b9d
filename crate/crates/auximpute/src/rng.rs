//! Deterministic RNG substreams for parallel simulation.
//!
//! A [`Stream`] names a node in a tree of random-number streams rooted at a
//! master seed. `root(seed).child(a).child(b)` always denotes the same
//! stream, no matter which thread asks for it or in what order, so parallel
//! and serial runs of the same experiment consume identical randomness.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 step; used only to mix path components into a seed.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A node in the substream tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Stream {
    state: u64,
}

impl Stream {
    pub fn root(seed: u64) -> Self {
        Stream {
            state: splitmix64(seed),
        }
    }

    /// Derive the `id`-th child stream.
    pub fn child(&self, id: u64) -> Self {
        Stream {
            state: splitmix64(self.state ^ splitmix64(id.wrapping_add(0x243f_6a88_85a3_08d3))),
        }
    }

    /// Materialize the stream as a generator.
    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.state)
    }
}
