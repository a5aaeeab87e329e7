// Licensed under the Apache License, Version 2.0 <LICENSE-APACHE or
// https://www.apache.org/licenses/LICENSE-2.0> or the MIT license
// <LICENSE-MIT or https://opensource.org/licenses/MIT>, at your
// option. This file may not be copied, modified, or distributed
// except according to those terms.

use std::f64::consts::PI;

use super::{TestReport, SIGNIFICANCE};
use crate::error::{Error, Result};
use crate::specfun::DistributionSpec;

const MIN_SAMPLES: usize = 100;

/// `P(K > lambda)` for the limiting Kolmogorov distribution.
///
/// Two series are used, each truncated once its terms fall below 1e-17:
/// the Jacobi theta form below `lambda = 1.18` and the alternating form
/// above it.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda.is_nan() {
        return f64::NAN;
    }
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        let c = PI * PI / (8.0 * lambda * lambda);
        let mut sum = 0.0;
        for k in 1..200 {
            let j = (2 * k - 1) as f64;
            let term = (-j * j * c).exp();
            sum += term;
            if term < 1e-17 {
                break;
            }
        }
        (1.0 - (2.0 * PI).sqrt() / lambda * sum).clamp(0.0, 1.0)
    } else {
        let mut sum = 0.0;
        let mut sign = 1.0;
        for k in 1..200 {
            let kf = k as f64;
            let term = (-2.0 * kf * kf * lambda * lambda).exp();
            sum += sign * term;
            if term < 1e-17 {
                break;
            }
            sign = -sign;
        }
        (2.0 * sum).clamp(0.0, 1.0)
    }
}

/// `D_n = sup |F_n - F|` for the given CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::domain("NaN in KS samples"));
    }
    if samples.is_empty() {
        return Err(Error::InsufficientData("KS test on empty sample".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(d)
}

/// One-sample Kolmogorov–Smirnov test with the asymptotic p-value
/// `Q_K(sqrt(n) D_n)`, at the default significance.
pub fn ks_test<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<TestReport> {
    ks_test_at(samples, cdf, SIGNIFICANCE)
}

pub fn ks_test_at<F: Fn(f64) -> f64>(samples: &[f64], cdf: F, significance: f64) -> Result<TestReport> {
    if samples.len() < MIN_SAMPLES {
        return Err(Error::InsufficientData(format!(
            "KS test needs at least {MIN_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    let d = ks_statistic(samples, cdf)?;
    let p = kolmogorov_survival((samples.len() as f64).sqrt() * d);
    Ok(TestReport::from_p_value("ks", d, p, significance, samples.len()))
}

/// KS test against a scalar [`DistributionSpec`].
pub fn ks_test_against(samples: &[f64], spec: &DistributionSpec) -> Result<TestReport> {
    spec.validate()?;
    if !spec.is_scalar() {
        return Err(Error::dist("KS test needs a scalar law"));
    }
    // cdf only fails on NaN, which ks_statistic rejects first.
    let report = ks_test(samples, |x| spec.cdf(x).unwrap_or(f64::NAN))?;
    Ok(report.with_details(format!("vs {spec:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngHandle;

    fn exp_samples(seed: u64, n: usize) -> Vec<f64> {
        let s = DistributionSpec::exponential(1.0).sampler().unwrap();
        let mut rng = RngHandle::new(seed).rng();
        (0..n).map(|_| s.sample(&mut rng)).collect()
    }

    #[test]
    fn survival_reference_values() {
        // Classic table values of the Kolmogorov distribution.
        assert!((kolmogorov_survival(1.3581) - 0.05).abs() < 1e-4);
        assert!((kolmogorov_survival(1.6276) - 0.01).abs() < 1e-4);
        assert!((kolmogorov_survival(1.2238) - 0.10).abs() < 1e-4);
        assert_eq!(kolmogorov_survival(0.0), 1.0);
        assert!(kolmogorov_survival(0.05) > 1.0 - 1e-12);
    }

    #[test]
    fn both_series_agree_at_the_switch() {
        // Evaluate the theta form slightly above the switch by hand.
        let lambda: f64 = 1.18;
        let c = PI * PI / (8.0 * lambda * lambda);
        let theta: f64 = (1..50).map(|k| (-((2 * k - 1) as f64).powi(2) * c).exp()).sum();
        let via_theta = 1.0 - (2.0 * PI).sqrt() / lambda * theta;
        assert!((kolmogorov_survival(lambda) - via_theta).abs() < 1e-12);
        assert!((kolmogorov_survival(1.18 - 1e-12) - kolmogorov_survival(1.18)).abs() < 1e-10);
    }

    #[test]
    fn null_calibration() {
        let exp = DistributionSpec::exponential(1.0);
        let passes = (0..100)
            .filter(|&seed| ks_test_against(&exp_samples(1000 + seed, 100_000), &exp).unwrap().passed())
            .count();
        assert!(passes >= 98, "{passes}/100");
    }

    #[test]
    fn detects_wrong_law() {
        let r = ks_test_against(&exp_samples(4, 10_000), &DistributionSpec::gamma(2.0, 2.0)).unwrap();
        assert!(r.p_value.unwrap() < 1e-6, "{r:?}");
        assert!(!r.passed());
    }

    #[test]
    fn constant_sample_fails() {
        let xs = vec![1.0; 500];
        let r = ks_test_against(&xs, &DistributionSpec::exponential(1.0)).unwrap();
        assert!(r.statistic >= 0.5);
        assert!(!r.passed());
    }

    #[test]
    fn rejects_nan_and_small_samples() {
        let mut xs = exp_samples(1, 200);
        xs[10] = f64::NAN;
        assert!(ks_test(&xs, |x| x).is_err());
        assert!(matches!(ks_test(&exp_samples(1, 50), |x| x), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn p_value_decreases_with_distance() {
        let mut last = 1.0;
        for i in 1..200 {
            let p = kolmogorov_survival(i as f64 * 0.02);
            assert!(p <= last);
            last = p;
        }
    }
}
