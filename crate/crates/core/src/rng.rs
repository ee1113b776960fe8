//! Seeded random streams.
//!
//! Every random quantity in the crate is drawn from a ChaCha8 stream selected
//! by `(root seed, stream id)`, so replications can run in any order and on any
//! number of workers while producing identical results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator type handed to samplers.
pub type StreamRng = ChaCha8Rng;

/// A root seed from which independent named sub-streams are derived.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeedStream {
    root: u64,
}

impl SeedStream {
    pub fn new(root: u64) -> Self {
        Self { root }
    }

    pub fn root(&self) -> u64 {
        self.root
    }

    /// Generator for stream `id`.
    pub fn stream(&self, id: u64) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.root);
        rng.set_stream(id);
        rng
    }

    /// Generator for a `(replication, purpose)` pair.
    pub fn replication(&self, replication: u64, purpose: u64) -> StreamRng {
        self.stream(replication.wrapping_mul(64).wrapping_add(purpose))
    }

    /// A child seed space, used when one check runs several independent experiments.
    pub fn child(&self, label: u64) -> SeedStream {
        let mut z = self.root ^ label.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        // splitmix64 finalizer
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        SeedStream::new(z ^ (z >> 31))
    }
}
