//! Reproducible random streams.
//!
//! Every stochastic step draws from a ChaCha stream keyed by
//! `(master seed, condition id, realization id)`, so runs can be generated in
//! any order or in parallel and still be bitwise repeatable.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Key of one random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StreamKey {
    pub master: u64,
    pub condition: u64,
    pub realization: u64,
}

impl StreamKey {
    pub fn new(master: u64, condition: u64, realization: u64) -> Self {
        Self {
            master,
            condition,
            realization,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream(mix(self.condition, self.realization));
        rng
    }
}

/// Distinct purposes sharing a master seed get disjoint condition ids.
pub mod purpose {
    pub const WAVES: u64 = 0;
    pub const SPLIT: u64 = 1 << 40;
    pub const TRAIN: u64 = 2 << 40;
    pub const VOYAGE: u64 = 3 << 40;
    pub const HISTOGRAM: u64 = 4 << 40;
    pub const INIT: u64 = 5 << 40;
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn mix(a: u64, b: u64) -> u64 {
    splitmix(splitmix(a) ^ b.rotate_left(17))
}

/// Convenience for code that only has a single seed.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    StreamKey::new(seed, 0, 0).rng()
}
