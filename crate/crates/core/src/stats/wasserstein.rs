// Licensed under the Apache License, Version 2.0 <LICENSE-APACHE or
// https://www.apache.org/licenses/LICENSE-2.0> or the MIT license
// <LICENSE-MIT or https://opensource.org/licenses/MIT>, at your
// option. This file may not be copied, modified, or distributed
// except according to those terms.

use crate::error::{Error, Result};
use crate::rng::RngHandle;
use crate::specfun::DistributionSpec;

/// Reference sample size for Monte Carlo quantiles of a law.
const REFERENCE_DRAWS: usize = 200_000;

/// Empirical quantiles at the mid-point levels `(i + 1/2) / m`.
pub fn empirical_quantiles(samples: &[f64], m: usize) -> Result<Vec<f64>> {
    if samples.is_empty() || m == 0 {
        return Err(Error::InsufficientData("quantiles of an empty sample".into()));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::domain("NaN in quantile input"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let n = sorted.len();
    Ok((0..m)
        .map(|i| {
            let u = (i as f64 + 0.5) / m as f64;
            sorted[((u * n as f64) as usize).min(n - 1)]
        })
        .collect())
}

/// Quantile-matching estimate of the 1-Wasserstein distance between two
/// samples on `m` levels.
pub fn wasserstein1_samples(a: &[f64], b: &[f64], m: usize) -> Result<f64> {
    let qa = empirical_quantiles(a, m)?;
    let qb = empirical_quantiles(b, m)?;
    Ok(qa.iter().zip(&qb).map(|(x, y)| (x - y).abs()).sum::<f64>() / m as f64)
}

/// 1-Wasserstein distance from a sample to a scalar law whose quantiles are
/// estimated from a seeded Monte Carlo reference sample.
pub fn wasserstein1_vs_spec(samples: &[f64], spec: &DistributionSpec, m: usize, rng: &RngHandle) -> Result<f64> {
    if m < 100 {
        return Err(Error::domain(format!("need at least 100 quantile levels, got {m}")));
    }
    let sampler = spec.sampler()?;
    let mut g = rng.rng();
    let reference: Vec<f64> = (0..REFERENCE_DRAWS).map(|_| sampler.sample(&mut g)).collect();
    wasserstein1_samples(samples, &reference, m)
}
