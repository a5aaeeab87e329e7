// Licensed under the Apache License, Version 2.0 <LICENSE-APACHE or
// https://www.apache.org/licenses/LICENSE-2.0> or the MIT license
// <LICENSE-MIT or https://opensource.org/licenses/MIT>, at your
// option. This file may not be copied, modified, or distributed
// except according to those terms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Neumaier compensated summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut k = KahanSum::default();
        iter.into_iter().for_each(|x| k.add(x));
        k
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    /// Unbiased sample variance (zero for a single value).
    pub variance: f64,
}

pub fn summarize(xs: &[f64]) -> Summary {
    let n = xs.len();
    if n == 0 {
        return Summary { n, mean: f64::NAN, variance: f64::NAN };
    }
    let mean = xs.iter().copied().collect::<KahanSum>().value() / n as f64;
    let variance =
        if n > 1 { xs.iter().map(|x| (x - mean).powi(2)).collect::<KahanSum>().value() / (n - 1) as f64 } else { 0.0 };
    Summary { n, mean, variance }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaFit {
    pub shape: f64,
    pub rate: f64,
}

/// Method-of-moments Gamma fit: `shape = mean^2 / var`, `rate = mean / var`.
pub fn gamma_fit_mom(samples: &[f64]) -> Result<GammaFit> {
    if samples.len() < 1000 {
        return Err(Error::InsufficientData(format!("gamma fit needs at least 1000 samples, got {}", samples.len())));
    }
    if samples.iter().any(|&x| !(x.is_finite() && x > 0.0)) {
        return Err(Error::domain("gamma fit needs positive finite samples"));
    }
    let s = summarize(samples);
    if s.variance <= 0.0 {
        return Err(Error::Undefined("gamma fit of a zero-variance sample".into()));
    }
    Ok(GammaFit { shape: s.mean * s.mean / s.variance, rate: s.mean / s.variance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngHandle;
    use crate::specfun::DistributionSpec;

    fn draws(spec: DistributionSpec, seed: u64, n: usize) -> Vec<f64> {
        let s = spec.sampler().unwrap();
        let mut rng = RngHandle::new(seed).rng();
        (0..n).map(|_| s.sample(&mut rng)).collect()
    }

    #[test]
    fn fits_gamma_two_two() {
        let f = gamma_fit_mom(&draws(DistributionSpec::gamma(2.0, 2.0), 1, 100_000)).unwrap();
        assert!((1.9..=2.1).contains(&f.shape), "{f:?}");
        assert!((1.9..=2.1).contains(&f.rate), "{f:?}");
    }

    #[test]
    fn fits_exponential() {
        let f = gamma_fit_mom(&draws(DistributionSpec::exponential(1.0), 2, 100_000)).unwrap();
        assert!((f.shape - 1.0).abs() < 0.05 && (f.rate - 1.0).abs() < 0.05, "{f:?}");
    }

    #[test]
    fn constant_sample_is_an_error() {
        assert!(matches!(gamma_fit_mom(&[2.0; 5000]), Err(Error::Undefined(_))));
        assert!(gamma_fit_mom(&[1.0; 10]).is_err());
    }

    #[test]
    fn error_band_halves_with_four_times_the_data() {
        // Average absolute shape error over seeded repetitions.
        let err = |n: usize| -> f64 {
            (0..40)
                .map(|s| {
                    (gamma_fit_mom(&draws(DistributionSpec::gamma(2.0, 1.0), 900 + s, n)).unwrap().shape - 2.0).abs()
                })
                .sum::<f64>()
                / 40.0
        };
        let (e1, e4) = (err(10_000), err(40_000));
        assert!(e4 < 0.75 * e1, "{e1} -> {e4}");
    }

    #[test]
    fn kahan_beats_naive_sum() {
        let mut xs = vec![1.0];
        xs.extend(std::iter::repeat_n(1e-16, 10_000));
        let k: KahanSum = xs.iter().copied().collect();
        assert!((k.value() - (1.0 + 1e-12)).abs() < 1e-18);
    }
}
