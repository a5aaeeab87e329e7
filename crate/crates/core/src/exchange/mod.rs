// Licensed under the Apache License, Version 2.0 <LICENSE-APACHE or
// https://www.apache.org/licenses/LICENSE-2.0> or the MIT license
// <LICENSE-MIT or https://opensource.org/licenses/MIT>, at your
// option. This file may not be copied, modified, or distributed
// except according to those terms.

//! Shift and exchange operators.
//!
//! * On a line: the division shift of a point configuration and the
//!   exchange operator `tau'_k = (1 - b_k) tau_k + b_{k+1} tau_{k+1}` on its
//!   gaps. With the same divisions the two agree gap by gap.
//! * On a torus: the general dynamics in which every agent splits its whole
//!   mass among nearby agents according to a random [`SharingSpec`] row.

mod euler;
mod lattice;
mod line;
mod sharing;

pub use euler::euler_sum_value;
pub use lattice::{iterate_random_exchange, step_random_exchange, ExchangeState, StepSummary, Trajectory};
pub use line::{
    apply_division_shift, apply_exchange_line, division_points, exchange_line, iterate_exchange,
    iterate_exchange_observed, sample_divisions,
};
pub use sharing::{sample_sharing_row, RowSampler, SharingSpec};
