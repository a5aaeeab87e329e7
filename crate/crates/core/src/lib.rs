// Licensed under the Apache License, Version 2.0 <LICENSE-APACHE or
// https://www.apache.org/licenses/LICENSE-2.0> or the MIT license
// <LICENSE-MIT or https://opensource.org/licenses/MIT>, at your
// option. This file may not be copied, modified, or distributed
// except according to those terms.

//! Neighbour-dependent point shifts on renewal processes and random mass
//! exchange on a one-dimensional lattice.
//!
//! The crate is organised bottom-up:
//!
//! * [`specfun`]: log-gamma, incomplete gamma/beta functions and the
//!   Gamma, Beta and Dirichlet samplers behind [`DistributionSpec`].
//! * [`rng`]: the seeded, splittable random stream contract ([`RngHandle`]).
//! * [`renewal`]: gap sequences and point configurations.
//! * [`exchange`]: the division shift, the line exchange operator and the
//!   general random exchange dynamics on a torus.
//! * [`rwre`]: the random walk in random environment diagnostics.
//! * [`stats`]: goodness-of-fit and independence tests used by the checks.
//!
//! With the default `parallel` feature the data-parallel inner loops run on
//! rayon. Every random draw is tied to a fixed block of work with its own
//! stream, so results are bitwise identical with the feature disabled and
//! for any thread count.

pub mod error;
pub mod exchange;
mod par;
pub mod renewal;
pub mod rng;
pub mod rwre;
pub mod specfun;
pub mod stats;

pub use error::{Error, Result};
pub use exchange::{ExchangeState, SharingSpec};
pub use renewal::{GapSequence, PointConfiguration};
pub use rng::{RngHandle, SimRng};
pub use specfun::DistributionSpec;
pub use stats::{TestReport, Verdict};
