// Licensed under the Apache License, Version 2.0 <LICENSE-APACHE or
// https://www.apache.org/licenses/LICENSE-2.0> or the MIT license
// <LICENSE-MIT or https://opensource.org/licenses/MIT>, at your
// option. This file may not be copied, modified, or distributed
// except according to those terms.

//! The division shift and the exchange operator on a finite line.
//!
//! Both maps lose one element at the right edge per application, so the
//! surviving gaps have exactly the law of the infinite model.

use crate::error::{Error, Result};
use crate::par::fill_indexed;
use crate::renewal::{sample_iid, GapSequence, PointConfiguration};
use crate::rng::RngHandle;
use crate::specfun::DistributionSpec;

fn check_division_law(g: &DistributionSpec) -> Result<()> {
    g.validate()?;
    if !g.within_unit_interval() {
        return Err(Error::dist(format!("division law {g:?} is not supported by [0, 1]")));
    }
    Ok(())
}

/// `n` iid division proportions `b_k ~ G`.
pub fn sample_divisions(g: &DistributionSpec, n: usize, rng: &RngHandle) -> Result<Vec<f64>> {
    check_division_law(g)?;
    sample_iid(g, n, rng)
}

/// Division points `c_k = T_{k-1} + b_k (T_k - T_{k-1})`, one per interval,
/// shifted so that the first of them sits at the origin.
pub fn division_points(p: &PointConfiguration, splits: &[f64]) -> Result<PointConfiguration> {
    let t = p.points();
    let n = t.len() - 1;
    if splits.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: splits.len() });
    }
    let mut c = vec![0.0; n];
    fill_indexed(&mut c, |k| t[k] + splits[k] * (t[k + 1] - t[k]));
    let origin = c[0];
    c.iter_mut().for_each(|x| *x -= origin);
    PointConfiguration::new(c)
}

/// Moves every point to the division point of the interval on its right,
/// with iid proportions from `g`. `n + 1` points give `n` points.
pub fn apply_division_shift(
    p: &PointConfiguration,
    g: &DistributionSpec,
    rng: &RngHandle,
) -> Result<PointConfiguration> {
    let b = sample_divisions(g, p.len() - 1, rng)?;
    division_points(p, &b)
}

/// `tau'_k = (1 - b_k) tau_k + b_{k+1} tau_{k+1}` for `k < n - 1`.
pub fn exchange_line(g: &GapSequence, splits: &[f64]) -> Result<GapSequence> {
    let tau = g.gaps();
    if splits.len() != tau.len() {
        return Err(Error::DimensionMismatch { expected: tau.len(), got: splits.len() });
    }
    if tau.len() < 3 {
        return Err(Error::TooShort { len: tau.len(), needed: 3 });
    }
    let mut out = vec![0.0; tau.len() - 1];
    fill_indexed(&mut out, |k| (1.0 - splits[k]) * tau[k] + splits[k + 1] * tau[k + 1]);
    GapSequence::new(out)
}

/// One application of the exchange operator with iid `b_k ~ g`.
pub fn apply_exchange_line(gaps: &GapSequence, g: &DistributionSpec, rng: &RngHandle) -> Result<GapSequence> {
    if gaps.len() < 3 {
        return Err(Error::TooShort { len: gaps.len(), needed: 3 });
    }
    let b = sample_divisions(g, gaps.len(), rng)?;
    exchange_line(gaps, &b)
}

/// Like [`iterate_exchange`], calling `observe(step, gaps)` on the input
/// (step 0) and after every application.
pub fn iterate_exchange_observed<F>(
    gaps: &GapSequence,
    g: &DistributionSpec,
    n_steps: usize,
    rng: &RngHandle,
    mut observe: F,
) -> Result<GapSequence>
where
    F: FnMut(usize, &GapSequence) -> Result<()>,
{
    check_division_law(g)?;
    if gaps.len() < n_steps + 2 {
        return Err(Error::TooShort { len: gaps.len(), needed: n_steps + 2 });
    }
    let mut cur = gaps.clone();
    observe(0, &cur)?;
    for step in 1..=n_steps {
        cur = apply_exchange_line(&cur, g, &rng.substream(step as u64))?;
        observe(step, &cur)?;
    }
    Ok(cur)
}

/// `n_steps` applications of the exchange operator; step `s` draws from
/// `rng.substream(s)`. The output has `n - n_steps` gaps.
pub fn iterate_exchange(
    gaps: &GapSequence,
    g: &DistributionSpec,
    n_steps: usize,
    rng: &RngHandle,
) -> Result<GapSequence> {
    iterate_exchange_observed(gaps, g, n_steps, rng, |_, _| Ok(()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::renewal::{gaps_to_points, points_to_gaps, sample_gaps};
    use crate::stats::{ks_test_against, lag_correlation};

    fn pts(v: &[f64]) -> PointConfiguration {
        PointConfiguration::new(v.to_vec()).unwrap()
    }

    #[test]
    fn division_at_zero_keeps_left_endpoints() {
        let p = pts(&[0.0, 1.0, 2.5, 4.0]);
        let out = apply_division_shift(&p, &DistributionSpec::deterministic(0.0), &RngHandle::new(1)).unwrap();
        assert_eq!(out.points(), &[0.0, 1.0, 2.5]);
    }

    #[test]
    fn division_at_one_keeps_right_endpoints_reanchored() {
        let p = pts(&[0.0, 1.0, 2.5, 4.0]);
        let out = apply_division_shift(&p, &DistributionSpec::deterministic(1.0), &RngHandle::new(1)).unwrap();
        assert_eq!(out.points(), &[0.0, 1.5, 3.0]);
    }

    #[test]
    fn division_rejects_law_outside_unit_interval() {
        let p = pts(&[0.0, 1.0, 2.0]);
        let rng = RngHandle::new(1);
        assert!(apply_division_shift(&p, &DistributionSpec::exponential(1.0), &rng).is_err());
        assert!(apply_division_shift(&p, &DistributionSpec::uniform(0.5, 1.5), &rng).is_err());
        assert!(apply_exchange_line(
            &GapSequence::new(vec![1.0; 4]).unwrap(),
            &DistributionSpec::gamma(2.0, 1.0),
            &rng
        )
        .is_err());
    }

    #[test]
    fn exchange_extremes() {
        let g = GapSequence::new(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let rng = RngHandle::new(5);
        let id = apply_exchange_line(&g, &DistributionSpec::deterministic(0.0), &rng).unwrap();
        assert_eq!(id.gaps(), &[1.0, 2.0, 3.0]);
        let shift = apply_exchange_line(&g, &DistributionSpec::deterministic(1.0), &rng).unwrap();
        assert_eq!(shift.gaps(), &[2.0, 3.0, 4.0]);
    }

    #[test]
    fn exchange_hand_computed() {
        let g = GapSequence::new(vec![1.0, 2.0, 4.0]).unwrap();
        let out = exchange_line(&g, &[0.5, 0.25, 0.75]).unwrap();
        // 0.5 * 1 + 0.25 * 2, 0.75 * 2 + 0.75 * 4
        assert_eq!(out.gaps(), &[1.0, 4.5]);
    }

    #[test]
    fn iterate_lengths_and_identity() {
        let g = sample_gaps(&DistributionSpec::exponential(1.0), 50, &RngHandle::new(2)).unwrap();
        let rng = RngHandle::new(3);
        let half = DistributionSpec::beta(0.5, 0.5);
        assert_eq!(iterate_exchange(&g, &half, 0, &rng).unwrap().gaps(), g.gaps());
        assert_eq!(iterate_exchange(&g, &half, 10, &rng).unwrap().len(), 40);
        assert_eq!(iterate_exchange(&g, &half, 48, &rng).unwrap().len(), 2);
        assert!(matches!(iterate_exchange(&g, &half, 49, &rng), Err(Error::TooShort { .. })));
        let prefix = iterate_exchange(&g, &DistributionSpec::deterministic(0.0), 7, &rng).unwrap();
        assert_eq!(prefix.gaps(), &g.gaps()[..43]);
    }

    #[test]
    fn deterministic_gaps_are_a_fixed_point() {
        let g = GapSequence::new(vec![0.7; 200]).unwrap();
        for b in [0.0, 0.3, 0.5, 1.0] {
            let out = iterate_exchange(&g, &DistributionSpec::deterministic(b), 100, &RngHandle::new(9)).unwrap();
            // 0.7 (1 - b) + 0.7 b is 0.7 up to one rounding; b = 0.5 and the extremes are exact.
            assert!(out.gaps().iter().all(|&x| (x - 0.7).abs() <= 4.0 * f64::EPSILON), "b = {b}");
        }
        let out = iterate_exchange(
            &GapSequence::new(vec![0.75; 200]).unwrap(),
            &DistributionSpec::deterministic(0.25),
            100,
            &RngHandle::new(9),
        )
        .unwrap();
        assert!(out.gaps().iter().all(|&x| x == 0.75));
    }

    #[test]
    fn duality_with_shared_divisions() {
        let rng = RngHandle::new(11);
        let g = sample_gaps(&DistributionSpec::exponential(1.0), 1000, &rng.substream(0)).unwrap();
        let b = sample_divisions(&DistributionSpec::beta(0.5, 0.5), g.len(), &rng.substream(1)).unwrap();
        let via_points = points_to_gaps(&division_points(&gaps_to_points(&g).unwrap(), &b).unwrap()).unwrap();
        let via_gaps = exchange_line(&g, &b).unwrap();
        assert_eq!(via_points.len(), via_gaps.len());
        let total: f64 = g.gaps().iter().sum();
        for (x, y) in via_points.gaps().iter().zip(via_gaps.gaps()) {
            assert!((x - y).abs() <= 8.0 * f64::EPSILON * total, "{x} vs {y}");
        }
    }

    #[test]
    fn midpoint_exchange_is_not_renewal() {
        let n = 100_000;
        let rng = RngHandle::new(21);
        let g = sample_gaps(&DistributionSpec::exponential(1.0), n, &rng.substream(0)).unwrap();
        let out = apply_exchange_line(&g, &DistributionSpec::deterministic(0.5), &rng.substream(1)).unwrap();
        assert!(ks_test_against(out.gaps(), &DistributionSpec::gamma(2.0, 2.0)).unwrap().passed());
        let rho = lag_correlation(out.gaps(), 1).unwrap();
        assert!((rho - 0.5).abs() < 0.02, "rho = {rho}");
    }
}
