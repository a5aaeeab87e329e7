// Licensed under the Apache License, Version 2.0 <LICENSE-APACHE or
// https://www.apache.org/licenses/LICENSE-2.0> or the MIT license
// <LICENSE-MIT or https://opensource.org/licenses/MIT>, at your
// option. This file may not be copied, modified, or distributed
// except according to those terms.

//! Random walk in the random environment made of sharing rows.
//!
//! A walker at site `i` moves to `i + j` with probability `pi_{i,i+j}`, the
//! row agent `i` realises at that step. Two walkers in the same environment
//! use the same row when they share a site and independent rows otherwise,
//! so their difference `Z` is a Markov chain whose law at zero differs from
//! its law elsewhere. Its return probability equals the expected sum of
//! squares of a column of the product of sharing matrices, which is what
//! drives the variance of the exchange dynamics to zero.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exchange::{RowSampler, SharingSpec};
use crate::par::map_range;
use crate::renewal::sample_iid;
use crate::rng::RngHandle;
use crate::specfun::DistributionSpec;
use crate::stats::KahanSum;

/// Samples drawn for the Monte Carlo transition law.
pub const TRANSITION_SAMPLES: usize = 1_000_000;
const TRANSITION_BLOCK: usize = 4096;

/// Minimum replica count for [`estimate_return_probability`].
pub const MIN_REPLICAS: usize = 1000;

/// Monte Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub estimate: f64,
    pub stderr: f64,
    pub replicas: usize,
}

impl Estimate {
    /// `|a - b| <= k * sqrt(se_a^2 + se_b^2)`.
    pub fn agrees_with(&self, other: &Estimate, k: f64) -> bool {
        (self.estimate - other.estimate).abs() <= k * self.stderr.hypot(other.stderr)
    }

    fn from_values(xs: &[f64]) -> Estimate {
        let n = xs.len();
        let mean = xs.iter().copied().collect::<KahanSum>().value() / n as f64;
        let var = if n > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).collect::<KahanSum>().value() / (n - 1) as f64
        } else {
            0.0
        };
        Estimate { estimate: mean, stderr: (var / n as f64).sqrt(), replicas: n }
    }
}

/// Two walkers `(W, W~)` on `Z/NZ` after `step` steps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkerPair {
    positions: [usize; 2],
    torus: usize,
    step: u64,
}

impl WalkerPair {
    pub fn new(first: usize, second: usize, torus: usize) -> Result<Self> {
        if torus == 0 || first >= torus || second >= torus {
            return Err(Error::domain(format!("positions ({first}, {second}) outside a torus of size {torus}")));
        }
        Ok(WalkerPair { positions: [first, second], torus, step: 0 })
    }

    pub fn positions(&self) -> [usize; 2] {
        self.positions
    }

    pub fn torus(&self) -> usize {
        self.torus
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn colocated(&self) -> bool {
        self.positions[0] == self.positions[1]
    }

    /// `W - W~` as the representative of smallest magnitude.
    pub fn difference(&self) -> i64 {
        let n = self.torus as i64;
        let d = (self.positions[0] as i64 - self.positions[1] as i64).rem_euclid(n);
        if 2 * d > n {
            d - n
        } else {
            d
        }
    }

    /// One step with a compiled row sampler.
    pub fn step_with<R: Rng + ?Sized>(&self, rows: &RowSampler, rng: &mut R) -> WalkerPair {
        let mut row = vec![0.0; rows.width()];
        let offsets = rows.offsets();
        let mut moves = [0i64; 2];
        if self.colocated() {
            rows.sample_into(rng, &mut row);
            moves[0] = offsets[pick(&row, rng)];
            moves[1] = offsets[pick(&row, rng)];
        } else {
            for m in &mut moves {
                rows.sample_into(rng, &mut row);
                *m = offsets[pick(&row, rng)];
            }
        }
        let n = self.torus as i64;
        let mv = |p: usize, j: i64| (p as i64 + j).rem_euclid(n) as usize;
        WalkerPair {
            positions: [mv(self.positions[0], moves[0]), mv(self.positions[1], moves[1])],
            torus: self.torus,
            step: self.step + 1,
        }
    }
}

/// Index drawn with probabilities `row`.
fn pick<R: Rng + ?Sized>(row: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in row.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // Rounding left the cumulative sum just below 1: take the last
    // index with positive weight.
    row.iter().rposition(|&p| p > 0.0).unwrap_or(row.len() - 1)
}

/// One step of the same-environment pair.
pub fn step_walker_pair<R: Rng + ?Sized>(wp: &WalkerPair, s: &SharingSpec, rng: &mut R) -> Result<WalkerPair> {
    let rows = s.row_sampler()?;
    let needed = 2 * s.max_abs_offset() + 1;
    if wp.torus < needed {
        return Err(Error::TorusTooSmall { size: wp.torus, needed });
    }
    Ok(wp.step_with(&rows, rng))
}

/// How a transition law was evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum TransitionMethod {
    ClosedForm,
    MonteCarlo { samples: usize },
}

/// One-step law of the difference chain, keyed by the change in `Z`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZTransition {
    pub probabilities: BTreeMap<i64, f64>,
    pub method: TransitionMethod,
}

impl ZTransition {
    pub fn total(&self) -> f64 {
        self.probabilities.values().sum()
    }

    pub fn get(&self, d: i64) -> f64 {
        self.probabilities.get(&d).copied().unwrap_or(0.0)
    }
}

fn fold_pairs(offsets: &[i64], m: impl Fn(usize, usize) -> f64) -> BTreeMap<i64, f64> {
    let mut out = BTreeMap::new();
    for (a, &ja) in offsets.iter().enumerate() {
        for (b, &jb) in offsets.iter().enumerate() {
            *out.entry(ja - jb).or_insert(0.0) += m(a, b);
        }
    }
    out
}

/// `E pi_a pi_b` in closed form where one is available.
fn closed_second_moments(s: &SharingSpec) -> Result<Option<Vec<Vec<f64>>>> {
    if s.is_deterministic() {
        let p = s.mean_row()?;
        return Ok(Some(p.iter().map(|x| p.iter().map(|y| x * y).collect()).collect()));
    }
    if let SharingSpec::TwoDiagonal { division: DistributionSpec::Beta { alpha, beta } } = s {
        let (a, b) = (*alpha, *beta);
        let t = a + b;
        let sent2 = a * (a + 1.0) / (t * (t + 1.0));
        let kept2 = b * (b + 1.0) / (t * (t + 1.0));
        let cross = a * b / (t * (t + 1.0));
        return Ok(Some(vec![vec![sent2, cross], vec![cross, kept2]]));
    }
    Ok(None)
}

fn mc_second_moments(s: &SharingSpec, rng: &RngHandle) -> Result<Vec<Vec<f64>>> {
    let rows = s.row_sampler()?;
    let k = rows.width();
    let blocks = TRANSITION_SAMPLES.div_ceil(TRANSITION_BLOCK);
    let partial = map_range(blocks, |b| {
        let mut g = rng.substream(b as u64).rng();
        let count = TRANSITION_BLOCK.min(TRANSITION_SAMPLES - b * TRANSITION_BLOCK);
        let mut row = vec![0.0; k];
        let mut acc = vec![0.0; k * k];
        for _ in 0..count {
            rows.sample_into(&mut g, &mut row);
            for a in 0..k {
                for c in 0..k {
                    acc[a * k + c] += row[a] * row[c];
                }
            }
        }
        acc
    });
    let mut m = vec![vec![0.0; k]; k];
    for (a, ma) in m.iter_mut().enumerate() {
        for (c, v) in ma.iter_mut().enumerate() {
            *v = partial.iter().map(|p| p[a * k + c]).collect::<KahanSum>().value() / TRANSITION_SAMPLES as f64;
        }
    }
    Ok(m)
}

/// Transition law of `Z`: `sum E pi_{j1} pi_{j2}` over `j1 - j2 = d` at
/// zero and `sum p_{j1} p_{j2}` elsewhere.
///
/// Off zero and for deterministic or two-diagonal Beta rows this is exact;
/// otherwise the second moments come from [`TRANSITION_SAMPLES`] rows drawn
/// from `rng`.
pub fn z_transition_distribution(at_zero: bool, s: &SharingSpec, rng: &RngHandle) -> Result<ZTransition> {
    s.validate()?;
    let offsets = s.offsets();
    if !at_zero {
        let p = s.mean_row()?;
        return Ok(ZTransition {
            probabilities: fold_pairs(&offsets, |a, b| p[a] * p[b]),
            method: TransitionMethod::ClosedForm,
        });
    }
    let (m, method) = match closed_second_moments(s)? {
        Some(m) => (m, TransitionMethod::ClosedForm),
        None => (mc_second_moments(s, rng)?, TransitionMethod::MonteCarlo { samples: TRANSITION_SAMPLES }),
    };
    Ok(ZTransition { probabilities: fold_pairs(&offsets, |a, b| m[a][b]), method })
}

/// Fraction of replicas whose walkers, started together, are together
/// again after `n` steps. Replica `r` uses `rng.substream(r)`.
pub fn estimate_return_probability(s: &SharingSpec, n: usize, replicas: usize, rng: &RngHandle) -> Result<Estimate> {
    if replicas < MIN_REPLICAS {
        return Err(Error::InsufficientData(format!("{replicas} replicas, need at least {MIN_REPLICAS}")));
    }
    let rows = s.row_sampler()?;
    // Large enough that neither walker can wrap around.
    let torus = 2 * n * s.max_abs_offset() + 2 * s.max_abs_offset() + 1;
    let start = torus / 2;
    let back = map_range(replicas, |r| {
        let mut g = rng.substream(r as u64).rng();
        let mut wp = WalkerPair { positions: [start, start], torus, step: 0 };
        for _ in 0..n {
            wp = wp.step_with(&rows, &mut g);
        }
        wp.colocated()
    });
    let hits = back.iter().filter(|&&b| b).count();
    let p = hits as f64 / replicas as f64;
    Ok(Estimate { estimate: p, stderr: (p * (1.0 - p) / replicas as f64).sqrt(), replicas })
}

/// Column of a product of sharing matrices, restricted to its support.
///
/// `values[x]` is the entry at site `lo + x` relative to the column index.
struct Column {
    lo: i64,
    values: Vec<f64>,
}

impl Column {
    fn unit() -> Self {
        Column { lo: 0, values: vec![1.0] }
    }

    fn at(&self, site: i64) -> f64 {
        let x = site - self.lo;
        if x < 0 || x >= self.values.len() as i64 {
            0.0
        } else {
            self.values[x as usize]
        }
    }

    /// `c <- A c` for a fresh matrix `A` with `(A c)_i = sum_j pi_{i,i+j} c_{i+j}`.
    /// Rows are drawn left to right over the sites that can be reached.
    fn advance<R: Rng + ?Sized>(&mut self, rows: &RowSampler, reach: i64, rng: &mut R) {
        let lo = self.lo - reach;
        let len = self.values.len() + 2 * reach as usize;
        let mut row = vec![0.0; rows.width()];
        let mut next = vec![0.0; len];
        for (x, v) in next.iter_mut().enumerate() {
            let i = lo + x as i64;
            rows.sample_into(rng, &mut row);
            *v = rows.offsets().iter().zip(&row).map(|(&j, &w)| w * self.at(i + j)).sum();
        }
        self.lo = lo;
        self.values = next;
    }

    fn sum_squares(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }
}

fn check_torus(s: &SharingSpec, n: usize, torus: usize) -> Result<()> {
    let needed = 2 * n * s.max_abs_offset() + 1;
    if torus < needed {
        return Err(Error::TorusTooSmall { size: torus, needed });
    }
    Ok(())
}

/// Monte Carlo estimate of `sum_i E (pi~^n_{ij})^2`: each replica multiplies
/// `n` fresh sharing matrices onto a unit column and records the sum of
/// squared entries. Replica `r` uses `rng.substream(r)`.
///
/// The torus only has to be large enough that the column cannot wrap, so
/// the computation runs on the support of the column.
pub fn sum_squared_columns(
    s: &SharingSpec,
    n: usize,
    torus: usize,
    replicas: usize,
    rng: &RngHandle,
) -> Result<Estimate> {
    check_torus(s, n, torus)?;
    if replicas < 2 {
        return Err(Error::InsufficientData(format!("{replicas} replicas, need at least 2")));
    }
    let rows = s.row_sampler()?;
    let reach = s.max_abs_offset() as i64;
    let values = map_range(replicas, |r| {
        let mut g = rng.substream(r as u64).rng();
        let mut c = Column::unit();
        for _ in 0..n {
            c.advance(&rows, reach, &mut g);
        }
        c.sum_squares()
    });
    Ok(Estimate::from_values(&values))
}

/// One line of [`variance_decay_trace`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceDecayRow {
    pub step: usize,
    /// Empirical variance of the centred coordinate across replicas.
    pub variance: f64,
    pub variance_stderr: f64,
    /// Independent estimate of the column sum of squares.
    pub sum_squares: Estimate,
    /// `variance / (sigma^2 * sum_squares)`, expected to be 1.
    pub ratio: f64,
    pub ratio_stderr: f64,
}

const SSC_STREAM: u64 = u64::MAX;
const DELTA_STREAM: u64 = 0;
const ROW_STREAM: u64 = 1;

/// Variance of coordinate 0 of the centred masses `(tau^0 - mu) Pi(n:1)`
/// at each requested step, next to `sigma^2` times an independent
/// [`sum_squared_columns`] estimate.
///
/// Replica `r` draws its initial masses from `rng.substream(r)` and its
/// rows from a second stream; the column sums use their own substream.
pub fn variance_decay_trace(
    f: &DistributionSpec,
    s: &SharingSpec,
    steps: &[usize],
    torus: usize,
    replicas: usize,
    rng: &RngHandle,
) -> Result<Vec<VarianceDecayRow>> {
    f.validate()?;
    if !f.is_scalar() {
        return Err(Error::dist(format!("initial law must be scalar, got {f:?}")));
    }
    let mu = f.mean()?;
    let sigma2 = f.variance()?;
    if !sigma2.is_finite() || !mu.is_finite() {
        return Err(Error::dist(format!("initial law {f:?} needs a finite variance")));
    }
    if replicas < 2 {
        return Err(Error::InsufficientData(format!("{replicas} replicas, need at least 2")));
    }
    let mut wanted = steps.to_vec();
    wanted.sort_unstable();
    wanted.dedup();
    let n_max = wanted.last().copied().unwrap_or(0);
    check_torus(s, n_max, torus)?;
    let rows = s.row_sampler()?;
    let reach = s.max_abs_offset() as i64;
    let half = n_max as i64 * reach;

    // deltas[r][w] = centred coordinate 0 for replica r at step wanted[w].
    let deltas = map_range(replicas, |r| -> Result<Vec<f64>> {
        let h = rng.substream(r as u64);
        let start = sample_iid(f, (2 * half + 1) as usize, &h.substream(DELTA_STREAM))?;
        let mut g = h.substream(ROW_STREAM).rng();
        let mut c = Column::unit();
        let mut out = Vec::with_capacity(wanted.len());
        let mut done = 0;
        for &n in &wanted {
            while done < n {
                c.advance(&rows, reach, &mut g);
                done += 1;
            }
            let mut acc = KahanSum::default();
            for (x, v) in c.values.iter().enumerate() {
                acc.add((start[(c.lo + x as i64 + half) as usize] - mu) * v);
            }
            out.push(acc.value());
        }
        Ok(out)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let ssc_rng = rng.substream(SSC_STREAM);
    let mut table = Vec::with_capacity(wanted.len());
    for (w, &n) in wanted.iter().enumerate() {
        let xs: Vec<f64> = deltas.iter().map(|d| d[w]).collect();
        let r = xs.len() as f64;
        let mean = xs.iter().copied().collect::<KahanSum>().value() / r;
        let m2 = xs.iter().map(|x| (x - mean).powi(2)).collect::<KahanSum>().value() / r;
        let m4 = xs.iter().map(|x| (x - mean).powi(4)).collect::<KahanSum>().value() / r;
        let variance = m2 * r / (r - 1.0);
        let variance_stderr = ((m4 - m2 * m2).max(0.0) / r).sqrt();
        let sum_squares = sum_squared_columns(s, n, torus, replicas, &ssc_rng)?;
        let expected = sigma2 * sum_squares.estimate;
        let ratio = variance / expected;
        let ratio_stderr =
            ratio * ((variance_stderr / variance).powi(2) + (sum_squares.stderr / sum_squares.estimate).powi(2)).sqrt();
        table.push(VarianceDecayRow { step: n, variance, variance_stderr, sum_squares, ratio, ratio_stderr });
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::DistributionSpec as D;

    fn half_beta() -> SharingSpec {
        SharingSpec::two_diagonal(D::beta(0.5, 0.5))
    }

    #[test]
    fn deterministic_pairs_never_separate() {
        let mut g = RngHandle::new(1).rng();
        for s in
            [SharingSpec::deterministic_window(vec![-1], vec![1.0]), SharingSpec::two_diagonal(D::deterministic(0.0))]
        {
            let mut wp = WalkerPair::new(10, 10, 64).unwrap();
            for _ in 0..20 {
                wp = step_walker_pair(&wp, &s, &mut g).unwrap();
                assert_eq!(wp.difference(), 0);
            }
            assert_eq!(wp.step(), 20);
        }
        let wp = WalkerPair::new(3, 3, 8).unwrap();
        let wp = step_walker_pair(&wp, &SharingSpec::deterministic_window(vec![-1], vec![1.0]), &mut g).unwrap();
        assert_eq!(wp.positions(), [2, 2]);
    }

    #[test]
    fn colocated_pair_stays_together_three_quarters() {
        let rows = half_beta().row_sampler().unwrap();
        let mut g = RngHandle::new(2).rng();
        let n = 1_000_000;
        let start = WalkerPair::new(5, 5, 16).unwrap();
        let hits = (0..n).filter(|_| start.step_with(&rows, &mut g).colocated()).count();
        let p = hits as f64 / n as f64;
        assert!((p - 0.75).abs() < 3.0 * (0.75f64 * 0.25 / n as f64).sqrt(), "{p}");
    }

    #[test]
    fn difference_is_signed_and_wraps() {
        let wp = WalkerPair::new(1, 9, 10).unwrap();
        assert_eq!(wp.difference(), 2);
        assert_eq!(WalkerPair::new(9, 1, 10).unwrap().difference(), -2);
        assert!(WalkerPair::new(10, 1, 10).is_err());
    }

    #[test]
    fn off_zero_transition_two_diagonal() {
        let r = 0.3;
        let z = z_transition_distribution(false, &SharingSpec::two_diagonal(D::beta(r, 1.0 - r)), &RngHandle::new(0))
            .unwrap();
        assert_eq!(z.method, TransitionMethod::ClosedForm);
        // Brute force over the four (move, move) outcomes of two {-1, 0} steps.
        let mut brute = BTreeMap::new();
        for (j1, p1) in [(-1i64, r), (0, 1.0 - r)] {
            for (j2, p2) in [(-1i64, r), (0, 1.0 - r)] {
                *brute.entry(j1 - j2).or_insert(0.0) += p1 * p2;
            }
        }
        for d in -1..=1 {
            assert!((z.get(d) - brute[&d]).abs() < 1e-15);
        }
        assert!((z.get(-1) - r * (1.0 - r)).abs() < 1e-15);
        assert!((z.get(0) - (r * r + (1.0 - r) * (1.0 - r))).abs() < 1e-15);
        assert!((z.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn at_zero_transition_two_diagonal_beta() {
        for r in [0.5, 0.3, 0.8] {
            let s = SharingSpec::two_diagonal(D::beta(r, 1.0 - r));
            let z = z_transition_distribution(true, &s, &RngHandle::new(0)).unwrap();
            assert!((z.get(0) - (r * r - r + 1.0)).abs() < 1e-12);
            assert!((z.total() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn monte_carlo_transition_matches_beta_closed_form() {
        // Same law, but written as a Dirichlet window so the Monte Carlo path is taken.
        let s = SharingSpec::dirichlet_window(vec![-1, 0], vec![0.5, 0.5]);
        let z = z_transition_distribution(true, &s, &RngHandle::new(6)).unwrap();
        assert_eq!(z.method, TransitionMethod::MonteCarlo { samples: TRANSITION_SAMPLES });
        assert!((z.total() - 1.0).abs() < 1e-3);
        // E b^2 + E (1 - b)^2 = 3/4 for Beta(1/2, 1/2); per-sample sd is below 1/4.
        assert!((z.get(0) - 0.75).abs() < 3.0 * 0.25 / (TRANSITION_SAMPLES as f64).sqrt());
    }

    #[test]
    fn deterministic_at_zero_equals_off_zero() {
        let s = SharingSpec::deterministic_window(vec![-1, 0, 2], vec![0.2, 0.5, 0.3]);
        let a = z_transition_distribution(true, &s, &RngHandle::new(0)).unwrap();
        let b = z_transition_distribution(false, &s, &RngHandle::new(0)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn off_zero_is_symmetric() {
        let s = SharingSpec::dirichlet_window(vec![-2, 0, 1], vec![0.3, 1.0, 2.0]);
        let z = z_transition_distribution(false, &s, &RngHandle::new(0)).unwrap();
        for (&d, &p) in &z.probabilities {
            assert!((p - z.get(-d)).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_steps_are_exact() {
        let rng = RngHandle::new(1);
        let e = estimate_return_probability(&half_beta(), 0, 1000, &rng).unwrap();
        assert_eq!((e.estimate, e.stderr), (1.0, 0.0));
        let c = sum_squared_columns(&half_beta(), 0, 1, 10, &rng).unwrap();
        assert_eq!((c.estimate, c.stderr), (1.0, 0.0));
        assert!(estimate_return_probability(&half_beta(), 1, 999, &rng).is_err());
        assert!(matches!(sum_squared_columns(&half_beta(), 5, 10, 10, &rng), Err(Error::TorusTooSmall { .. })));
    }

    #[test]
    fn one_step_values() {
        let rng = RngHandle::new(3);
        let e = estimate_return_probability(&half_beta(), 1, 100_000, &rng.substream(0)).unwrap();
        assert!((e.estimate - 0.75).abs() < 3.0 * e.stderr, "{e:?}");
        let c = sum_squared_columns(&half_beta(), 1, 3, 100_000, &rng.substream(1)).unwrap();
        assert!((c.estimate - 0.75).abs() < 3.0 * c.stderr, "{c:?}");
    }

    #[test]
    fn identity_and_decay() {
        let rng = RngHandle::new(4);
        let s = SharingSpec::dirichlet_window(vec![-1, 0, 1], vec![1.0; 3]);
        for n in [2, 8] {
            let e = estimate_return_probability(&s, n, 20_000, &rng.substream(n as u64)).unwrap();
            let c = sum_squared_columns(&s, n, 4 * n + 1, 20_000, &rng.substream(100 + n as u64)).unwrap();
            assert!(e.agrees_with(&c, 3.0), "n = {n}: {e:?} {c:?}");
        }
        let early = estimate_return_probability(&half_beta(), 4, 10_000, &rng.substream(200)).unwrap();
        let late = estimate_return_probability(&half_beta(), 64, 10_000, &rng.substream(201)).unwrap();
        assert!(early.estimate - late.estimate > 3.0 * early.stderr.hypot(late.stderr));
    }

    #[test]
    fn variance_trace_matches_column_sums() {
        let table =
            variance_decay_trace(&D::exponential(1.0), &half_beta(), &[0, 1, 4], 64, 10_000, &RngHandle::new(5))
                .unwrap();
        assert_eq!(table.iter().map(|r| r.step).collect::<Vec<_>>(), vec![0, 1, 4]);
        assert!((table[0].variance - 1.0).abs() < 3.0 * table[0].variance_stderr);
        assert!((table[1].variance - 0.75).abs() < 3.0 * table[1].variance_stderr);
        for row in &table {
            assert!((row.ratio - 1.0).abs() < 3.0 * row.ratio_stderr, "{row:?}");
        }
    }

    #[test]
    fn variance_trace_rejects_heavy_tails() {
        let f = D::pareto_with_mean(1.5, 1.0);
        assert!(variance_decay_trace(&f, &half_beta(), &[1], 64, 100, &RngHandle::new(1)).is_err());
    }
}
