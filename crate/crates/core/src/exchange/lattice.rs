// Licensed under the Apache License, Version 2.0 <LICENSE-APACHE or
// https://www.apache.org/licenses/LICENSE-2.0> or the MIT license
// <LICENSE-MIT or https://opensource.org/licenses/MIT>, at your
// option. This file may not be copied, modified, or distributed
// except according to those terms.

//! Synchronous random mass exchange on the torus `Z/NZ`.

use serde::{Deserialize, Serialize};

use super::sharing::SharingSpec;
use crate::error::{Error, Result};
use crate::par::{fill_indexed, for_each_block, BLOCK};
use crate::renewal::sample_iid;
use crate::rng::RngHandle;
use crate::specfun::DistributionSpec;
use crate::stats::{summarize, KahanSum};

/// Masses `tau_i >= 0` on a torus, the step counter and the conserved total.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExchangeState {
    masses: Vec<f64>,
    step: u64,
    total_mass: f64,
}

/// Mean, unbiased variance and total of the masses after `step` steps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepSummary {
    pub step: u64,
    pub mean: f64,
    pub var: f64,
    pub total_mass: f64,
}

impl ExchangeState {
    pub fn new(masses: Vec<f64>) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::TooShort { len: 0, needed: 1 });
        }
        if let Some((i, m)) = masses.iter().enumerate().find(|(_, m)| !(m.is_finite() && **m >= 0.0)) {
            return Err(Error::InvalidSequence(format!("mass {i} = {m} is not finite and nonnegative")));
        }
        let total_mass = masses.iter().copied().collect::<KahanSum>().value();
        if !total_mass.is_finite() {
            return Err(Error::NonFinite("total mass overflowed".into()));
        }
        Ok(ExchangeState { masses, step: 0, total_mass })
    }

    /// `n` iid masses from `law`.
    pub fn from_distribution(law: &DistributionSpec, n: usize, rng: &RngHandle) -> Result<Self> {
        law.validate()?;
        if !law.is_scalar() || !law.has_positive_support() {
            return Err(Error::dist(format!("mass law must be scalar and nonnegative, got {law:?}")));
        }
        ExchangeState::new(sample_iid(law, n, rng)?)
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn into_masses(self) -> Vec<f64> {
        self.masses
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    /// The total mass at step 0, carried along unchanged.
    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    /// `|sum(masses) - total_mass| / total_mass`.
    pub fn mass_drift(&self) -> f64 {
        let now = self.masses.iter().copied().collect::<KahanSum>().value();
        if self.total_mass == 0.0 {
            now.abs()
        } else {
            (now - self.total_mass).abs() / self.total_mass
        }
    }

    pub fn summary(&self) -> StepSummary {
        let s = summarize(&self.masses);
        StepSummary { step: self.step, mean: s.mean, var: s.variance, total_mass: self.total_mass }
    }
}

/// One synchronous step: every agent draws its own sharing row and sends
/// `tau_i pi_{i,i+j}` to `(i + j) mod N`.
///
/// Rows are drawn in blocks of [`BLOCK`] agents, block `b` from
/// `rng.substream(b)`. Each agent's new mass is then gathered from its
/// senders in offset order, so the result does not depend on scheduling.
pub fn step_random_exchange(st: &ExchangeState, s: &SharingSpec, rng: &RngHandle) -> Result<ExchangeState> {
    let sampler = s.row_sampler()?;
    let n = st.len();
    let needed = 2 * s.max_abs_offset() + 1;
    if n < needed {
        return Err(Error::TorusTooSmall { size: n, needed });
    }
    let k = sampler.width();
    let mut rows = vec![0.0; n * k];
    for_each_block(&mut rows, BLOCK * k, |b, chunk| {
        let mut g = rng.substream(b as u64).rng();
        chunk.chunks_exact_mut(k).for_each(|row| sampler.sample_into(&mut g, row));
    });
    // Offsets reduced to [0, N) once.
    let shifts: Vec<usize> = sampler.offsets().iter().map(|&o| o.rem_euclid(n as i64) as usize).collect();
    let masses = &st.masses;
    let mut next = vec![0.0; n];
    fill_indexed(&mut next, |j| {
        let mut acc = 0.0;
        for (o, &sh) in shifts.iter().enumerate() {
            let i = if j >= sh { j - sh } else { j + n - sh };
            acc += masses[i] * rows[i * k + o];
        }
        acc
    });
    Ok(ExchangeState { masses: next, step: st.step + 1, total_mass: st.total_mass })
}

/// Result of [`iterate_random_exchange`].
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub final_state: ExchangeState,
    /// States at the requested steps, in increasing step order.
    pub snapshots: Vec<ExchangeState>,
    /// One summary per step including the starting one, if requested.
    pub summaries: Vec<StepSummary>,
}

/// Runs `n_steps` steps. The step that produces state `t` draws from
/// `rng.substream(t)`, so a run can be split and resumed without changing
/// the outcome.
pub fn iterate_random_exchange(
    st: &ExchangeState,
    s: &SharingSpec,
    n_steps: u64,
    snapshots: &[u64],
    summaries: bool,
    rng: &RngHandle,
) -> Result<Trajectory> {
    s.validate()?;
    let mut wanted = snapshots.to_vec();
    wanted.sort_unstable();
    wanted.dedup();
    let end = st.step + n_steps;
    let mut out = Trajectory { final_state: st.clone(), snapshots: Vec::new(), summaries: Vec::new() };
    let record = |state: &ExchangeState, out: &mut Trajectory| {
        if wanted.binary_search(&state.step).is_ok() {
            out.snapshots.push(state.clone());
        }
        if summaries {
            out.summaries.push(state.summary());
        }
    };
    let mut cur = st.clone();
    record(&cur, &mut out);
    while cur.step < end {
        cur = step_random_exchange(&cur, s, &rng.substream(cur.step + 1))?;
        record(&cur, &mut out);
    }
    out.final_state = cur;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{chi2_independence, gamma_fit_mom, ks_test_against};

    #[test]
    fn ones_are_a_balance_fixed_point() {
        let st = ExchangeState::new(vec![1.0; 64]).unwrap();
        let s = SharingSpec::deterministic_window(vec![-2, 0, 1], vec![0.5, 0.25, 0.25]);
        let out = step_random_exchange(&st, &s, &RngHandle::new(1)).unwrap();
        assert!(out.masses().iter().all(|&m| m == 1.0));
        assert_eq!(out.step(), 1);
    }

    #[test]
    fn hand_computed_step() {
        let st = ExchangeState::new(vec![1.0, 2.0, 4.0, 8.0, 16.0]).unwrap();
        let s = SharingSpec::deterministic_window(vec![-1, 0], vec![0.25, 0.75]);
        let out = step_random_exchange(&st, &s, &RngHandle::new(1)).unwrap();
        // 0.75 tau_k + 0.25 tau_{k+1}, wrapping at the end.
        assert_eq!(out.masses(), &[1.25, 2.5, 5.0, 10.0, 12.25]);
    }

    #[test]
    fn torus_too_small() {
        let st = ExchangeState::new(vec![1.0; 4]).unwrap();
        let s = SharingSpec::dirichlet_window(vec![-2, 0, 2], vec![1.0; 3]);
        assert!(matches!(step_random_exchange(&st, &s, &RngHandle::new(1)), Err(Error::TorusTooSmall { .. })));
    }

    #[test]
    fn zero_masses_are_allowed() {
        let mut m = vec![0.0; 100];
        m[50] = 3.0;
        let st = ExchangeState::new(m).unwrap();
        let s = SharingSpec::dirichlet_window(vec![-1, 0, 1], vec![1.0; 3]);
        let t = iterate_random_exchange(&st, &s, 10, &[], false, &RngHandle::new(4)).unwrap();
        assert!(t.final_state.mass_drift() < 1e-12);
        assert!(t.final_state.masses()[..39].iter().all(|&x| x == 0.0));
        assert!(ExchangeState::new(vec![1.0, -1.0]).is_err());
    }

    #[test]
    fn zero_steps_and_snapshots() {
        let rng = RngHandle::new(8);
        let st = ExchangeState::from_distribution(&DistributionSpec::exponential(1.0), 1000, &rng).unwrap();
        let s = SharingSpec::two_diagonal(DistributionSpec::beta(0.5, 0.5));
        let t = iterate_random_exchange(&st, &s, 0, &[0], true, &rng).unwrap();
        assert_eq!(t.final_state, st);
        assert_eq!(t.snapshots, vec![st.clone()]);
        assert_eq!(t.summaries.len(), 1);

        let t = iterate_random_exchange(&st, &s, 5, &[5, 2, 2], true, &rng).unwrap();
        assert_eq!(t.snapshots.iter().map(|x| x.step()).collect::<Vec<_>>(), vec![2, 5]);
        assert_eq!(t.summaries.len(), 6);
        assert_eq!(t.snapshots[1], t.final_state);

        // Resuming is the same as running straight through.
        let a = iterate_random_exchange(&st, &s, 3, &[], false, &rng).unwrap().final_state;
        let b = iterate_random_exchange(&a, &s, 2, &[], false, &rng).unwrap().final_state;
        assert_eq!(b, t.final_state);
    }

    #[test]
    fn constant_sequence_stays_constant() {
        let st = ExchangeState::new(vec![1.0; 300]).unwrap();
        let s = SharingSpec::deterministic_window(vec![-1, 0], vec![0.5, 0.5]);
        let t = iterate_random_exchange(&st, &s, 50, &[], false, &RngHandle::new(1)).unwrap();
        assert!(t.final_state.masses().iter().all(|&m| m == 1.0));
    }

    #[test]
    fn dirichlet_sharing_preserves_gamma_masses() {
        let n = 100_000;
        let rng = RngHandle::new(2024);
        let a = 2.0;
        let st = ExchangeState::from_distribution(&DistributionSpec::gamma(a, 2.0), n, &rng.substream(0)).unwrap();
        let s = SharingSpec::dirichlet_window(vec![-1, 0, 1], vec![a / 3.0; 3]);
        let out = step_random_exchange(&st, &s, &rng.substream(1)).unwrap();
        let m = out.masses();
        assert!(ks_test_against(m, &DistributionSpec::gamma(a, 2.0)).unwrap().passed());
        let pairs: Vec<(f64, f64)> = m.windows(2).step_by(2).map(|w| (w[0], w[1])).collect();
        assert!(chi2_independence(&pairs, 10).unwrap().passed());
        assert!(out.mass_drift() < 1e-9);
    }

    #[test]
    fn mean_is_conserved_within_band() {
        let n = 20_000;
        let rng = RngHandle::new(77);
        let st = ExchangeState::from_distribution(&DistributionSpec::exponential(1.0), n, &rng.substream(0)).unwrap();
        let s = SharingSpec::dirichlet_window(vec![-1, 0, 1], vec![0.5, 1.0, 0.5]);
        let t = iterate_random_exchange(&st, &s, 20, &[], true, &rng.substream(1)).unwrap();
        for row in &t.summaries {
            assert!(
                (row.mean - 1.0).abs() < 4.0 * row.var.sqrt() / (n as f64).sqrt() + 4.0 / (n as f64).sqrt(),
                "{row:?}"
            );
        }
    }

    #[test]
    fn dirichlet_attractor_moment_fit() {
        let n = 20_000;
        let rng = RngHandle::new(5);
        let st = ExchangeState::from_distribution(&DistributionSpec::exponential(1.0), n, &rng.substream(0)).unwrap();
        let s = SharingSpec::dirichlet_window(vec![-1, 0, 1], vec![2.0 / 3.0; 3]);
        let t = iterate_random_exchange(&st, &s, 60, &[], false, &rng.substream(1)).unwrap();
        let fit = gamma_fit_mom(t.final_state.masses()).unwrap();
        assert!((fit.shape - 2.0).abs() < 0.2 && (fit.rate - 2.0).abs() < 0.2, "{fit:?}");
    }
}
