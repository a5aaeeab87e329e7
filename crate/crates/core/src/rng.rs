// Licensed under the Apache License, Version 2.0 <LICENSE-APACHE or
// https://www.apache.org/licenses/LICENSE-2.0> or the MIT license
// <LICENSE-MIT or https://opensource.org/licenses/MIT>, at your
// option. This file may not be copied, modified, or distributed
// except according to those terms.

//! Seeded random streams.
//!
//! An [`RngHandle`] is a `(seed, stream)` pair. It is a plain value: cheap to
//! copy and send across threads. Generators are built on demand with
//! [`RngHandle::rng`], and child streams for replicas, steps or blocks of
//! work are derived with [`RngHandle::substream`]. The backing generator is
//! ChaCha8, whose 64-bit stream id gives independent sequences for the same
//! key.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub type SimRng = ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngHandle {
    seed: u64,
    stream: u64,
}

impl RngHandle {
    pub fn new(seed: u64) -> Self {
        RngHandle { seed, stream: 0 }
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        RngHandle { seed, stream }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Derives a child handle. Distinct tags (or distinct parents) give
    /// distinct stream ids with overwhelming probability.
    pub fn substream(&self, tag: u64) -> Self {
        let mixed =
            splitmix64(self.stream.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ splitmix64(tag ^ 0xD1B5_4A32_D192_ED03));
        RngHandle { seed: self.seed, stream: mixed }
    }

    pub fn rng(&self) -> SimRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
