// Licensed under the Apache License, Version 2.0 <LICENSE-APACHE or
// https://www.apache.org/licenses/LICENSE-2.0> or the MIT license
// <LICENSE-MIT or https://opensource.org/licenses/MIT>, at your
// option. This file may not be copied, modified, or distributed
// except according to those terms.

//! Goodness-of-fit, independence and convergence statistics.
//!
//! Every test reports at a fixed significance, [`SIGNIFICANCE`], unless the
//! caller asks for another one.

mod fit;
mod independence;
mod ks;
mod report;
mod wasserstein;

pub use fit::{gamma_fit_mom, summarize, GammaFit, KahanSum, Summary};
pub use independence::{chi2_independence, chi2_independence_at, lag_correlation};
pub use ks::{kolmogorov_survival, ks_statistic, ks_test, ks_test_against, ks_test_at};
pub use report::{TestReport, Verdict};
pub use wasserstein::{empirical_quantiles, wasserstein1_samples, wasserstein1_vs_spec};

/// Default significance level for every verdict.
pub const SIGNIFICANCE: f64 = 0.01;

/// Half-width of the band `|rho| < 4 / sqrt(n)` used for correlation checks.
pub fn correlation_band(n: usize) -> f64 {
    4.0 / (n as f64).sqrt()
}
