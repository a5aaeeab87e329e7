// Licensed under the Apache License, Version 2.0 <LICENSE-APACHE or
// https://www.apache.org/licenses/LICENSE-2.0> or the MIT license
// <LICENSE-MIT or https://opensource.org/licenses/MIT>, at your
// option. This file may not be copied, modified, or distributed
// except according to those terms.

use crate::error::{Error, Result};
use crate::specfun::log_binomial;
use crate::stats::KahanSum;

/// Binomially weighted sum `sum_j tau0_j C(n, j) p^j (1 - p)^(n - j)`.
///
/// This is coordinate 0 after `n` deterministic steps in which every agent
/// keeps `1 - p` and passes `p` to its left neighbour. The weights are
/// formed in log space, so `n` in the tens of thousands is fine.
pub fn euler_sum_value(tau0: &[f64], p: f64, n: usize) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("p = {p} must lie in (0, 1)")));
    }
    if tau0.len() <= n {
        return Err(Error::TooShort { len: tau0.len(), needed: n + 1 });
    }
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    let mut acc = KahanSum::default();
    for (j, &t) in tau0[..=n].iter().enumerate() {
        let w = (log_binomial(n as u64, j as u64)? + j as f64 * lp + (n - j) as f64 * lq).exp();
        acc.add(t * w);
    }
    Ok(acc.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exchange::{iterate_random_exchange, ExchangeState, SharingSpec};
    use crate::renewal::sample_iid;
    use crate::rng::RngHandle;
    use crate::specfun::DistributionSpec;

    #[test]
    fn ones_sum_to_one() {
        let ones = vec![1.0; 10_001];
        for n in [0, 1, 7, 100, 1000, 10_000] {
            let v = euler_sum_value(&ones, 0.3, n).unwrap();
            assert!((v - 1.0).abs() < 1e-10, "n = {n}: {v}");
        }
    }

    #[test]
    fn zero_steps_is_first_entry() {
        assert_eq!(euler_sum_value(&[3.5, 1.0], 0.5, 0).unwrap(), 3.5);
    }

    #[test]
    fn small_case_by_hand() {
        // (1 - p)^2 a + 2 p (1 - p) b + p^2 c with p = 1/4.
        let v = euler_sum_value(&[1.0, 2.0, 4.0], 0.25, 2).unwrap();
        assert!((v - (0.5625 + 0.375 * 2.0 + 0.0625 * 4.0)).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        assert!(matches!(euler_sum_value(&[1.0; 3], 0.5, 3), Err(Error::TooShort { .. })));
        assert!(euler_sum_value(&[1.0; 3], 0.0, 1).is_err());
        assert!(euler_sum_value(&[1.0; 3], 1.0, 1).is_err());
    }

    #[test]
    fn agrees_with_iterated_dynamics() {
        let n = 100;
        let p = 0.37;
        let tau0 = sample_iid(&DistributionSpec::exponential(1.0), 2 * n + 1, &RngHandle::new(3)).unwrap();
        let st = ExchangeState::new(tau0.clone()).unwrap();
        let s = SharingSpec::deterministic_window(vec![-1, 0], vec![p, 1.0 - p]);
        let t = iterate_random_exchange(&st, &s, n as u64, &[], false, &RngHandle::new(0)).unwrap();
        let direct = t.final_state.masses()[0];
        let closed = euler_sum_value(&tau0, p, n).unwrap();
        assert!((direct - closed).abs() <= 1e-9 * closed.abs(), "{direct} vs {closed}");
    }
}
