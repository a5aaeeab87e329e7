// Licensed under the Apache License, Version 2.0 <LICENSE-APACHE or
// https://www.apache.org/licenses/LICENSE-2.0> or the MIT license
// <LICENSE-MIT or https://opensource.org/licenses/MIT>, at your
// option. This file may not be copied, modified, or distributed
// except according to those terms.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::dist::close_simplex;
use crate::specfun::{DirichletSampler, DistributionSpec, Sampler};

/// Law of the random row `(pi_j)` by which an agent splits its mass over
/// the agents at offsets `j`.
///
/// Offsets are relative to the sender: mass at offset `j` goes from agent
/// `i` to agent `i + j`. The two-diagonal law keeps `1 - b` at offset 0 and
/// sends `b` to offset -1, so the agent `k` ends up with
/// `(1 - b_k) tau_k + b_{k+1} tau_{k+1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SharingSpec {
    TwoDiagonal {
        #[serde(rename = "G")]
        division: DistributionSpec,
    },
    DirichletWindow {
        offsets: Vec<i64>,
        alpha: Vec<f64>,
    },
    DeterministicWindow {
        offsets: Vec<i64>,
        weights: Vec<f64>,
    },
    /// Iid positive weights from `weight`, normalised to the simplex. An
    /// exchangeable row that is Dirichlet only for Gamma weights.
    NormalizedWindow {
        offsets: Vec<i64>,
        weight: DistributionSpec,
    },
}

fn check_offsets(offsets: &[i64], params: usize) -> Result<()> {
    if offsets.is_empty() {
        return Err(Error::InvalidSharing("empty offset window".into()));
    }
    if offsets.len() != params {
        return Err(Error::InvalidSharing(format!("{} offsets but {params} parameters", offsets.len())));
    }
    let mut sorted = offsets.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != offsets.len() {
        return Err(Error::InvalidSharing(format!("repeated offset in {offsets:?}")));
    }
    Ok(())
}

impl SharingSpec {
    pub fn two_diagonal(division: DistributionSpec) -> Self {
        SharingSpec::TwoDiagonal { division }
    }

    pub fn dirichlet_window(offsets: Vec<i64>, alpha: Vec<f64>) -> Self {
        SharingSpec::DirichletWindow { offsets, alpha }
    }

    pub fn deterministic_window(offsets: Vec<i64>, weights: Vec<f64>) -> Self {
        SharingSpec::DeterministicWindow { offsets, weights }
    }

    pub fn normalized_window(offsets: Vec<i64>, weight: DistributionSpec) -> Self {
        SharingSpec::NormalizedWindow { offsets, weight }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SharingSpec::TwoDiagonal { division } => {
                division.validate()?;
                if !division.within_unit_interval() {
                    return Err(Error::InvalidSharing(format!("division law {division:?} is not supported by [0, 1]")));
                }
                Ok(())
            }
            SharingSpec::DirichletWindow { offsets, alpha } => {
                check_offsets(offsets, alpha.len())?;
                DistributionSpec::dirichlet(alpha.clone()).validate()
            }
            SharingSpec::DeterministicWindow { offsets, weights } => {
                check_offsets(offsets, weights.len())?;
                if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
                    return Err(Error::InvalidSharing(format!("weights must be finite and >= 0: {weights:?}")));
                }
                let total: f64 = weights.iter().sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidSharing(format!("weights sum to {total}, not 1")));
                }
                Ok(())
            }
            SharingSpec::NormalizedWindow { offsets, weight } => {
                check_offsets(offsets, offsets.len())?;
                weight.validate()?;
                if !weight.is_scalar() || !weight.has_positive_support() {
                    return Err(Error::InvalidSharing(format!(
                        "row weights need a positive scalar law, got {weight:?}"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn offsets(&self) -> Vec<i64> {
        match self {
            SharingSpec::TwoDiagonal { .. } => vec![-1, 0],
            SharingSpec::DirichletWindow { offsets, .. }
            | SharingSpec::DeterministicWindow { offsets, .. }
            | SharingSpec::NormalizedWindow { offsets, .. } => offsets.clone(),
        }
    }

    pub fn max_abs_offset(&self) -> usize {
        self.offsets().iter().map(|o| o.unsigned_abs() as usize).max().unwrap_or(0)
    }

    /// True when every realised row equals its mean.
    pub fn is_deterministic(&self) -> bool {
        match self {
            SharingSpec::TwoDiagonal { division } => matches!(division, DistributionSpec::Deterministic { .. }),
            SharingSpec::DeterministicWindow { .. } => true,
            _ => false,
        }
    }

    /// Closed-form mean row `p_j = E pi_j`, aligned with [`offsets`](Self::offsets).
    pub fn mean_row(&self) -> Result<Vec<f64>> {
        self.validate()?;
        Ok(match self {
            SharingSpec::TwoDiagonal { division } => {
                let b = division.mean()?;
                vec![b, 1.0 - b]
            }
            SharingSpec::DirichletWindow { alpha, .. } => {
                let a: f64 = alpha.iter().sum();
                alpha.iter().map(|x| x / a).collect()
            }
            SharingSpec::DeterministicWindow { weights, .. } => weights.clone(),
            SharingSpec::NormalizedWindow { offsets, .. } => vec![1.0 / offsets.len() as f64; offsets.len()],
        })
    }

    pub fn row_sampler(&self) -> Result<RowSampler> {
        self.validate()?;
        let kind = match self {
            SharingSpec::TwoDiagonal { division } => RowKind::TwoDiagonal(division.sampler()?),
            SharingSpec::DirichletWindow { alpha, .. } => RowKind::Dirichlet(DirichletSampler::new(alpha)?),
            SharingSpec::DeterministicWindow { weights, .. } => RowKind::Fixed(weights.clone()),
            SharingSpec::NormalizedWindow { weight, .. } => RowKind::Normalized(weight.sampler()?),
        };
        Ok(RowSampler { offsets: self.offsets(), kind })
    }
}

#[derive(Clone, Debug)]
enum RowKind {
    TwoDiagonal(Sampler),
    Dirichlet(DirichletSampler),
    Fixed(Vec<f64>),
    Normalized(Sampler),
}

/// Compiled [`SharingSpec`]: draws rows aligned with [`offsets`](Self::offsets).
#[derive(Clone, Debug)]
pub struct RowSampler {
    offsets: Vec<i64>,
    kind: RowKind,
}

impl RowSampler {
    pub fn offsets(&self) -> &[i64] {
        &self.offsets
    }

    pub fn width(&self) -> usize {
        self.offsets.len()
    }

    /// Writes one row of proportions into `out`; they are nonnegative and
    /// sum to one.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.offsets.len());
        match &self.kind {
            RowKind::TwoDiagonal(g) => {
                let (b, keep) = g.sample_split(rng);
                out[0] = b;
                out[1] = keep;
            }
            RowKind::Dirichlet(d) => d.sample_into(rng, out),
            RowKind::Fixed(w) => out.copy_from_slice(w),
            RowKind::Normalized(w) => loop {
                let mut total = 0.0;
                for o in out.iter_mut() {
                    *o = w.sample(rng);
                    total += *o;
                }
                if total > 0.0 && total.is_finite() {
                    close_simplex(out, total);
                    break;
                }
            },
        }
    }
}

/// One realised sharing row as an offset -> proportion map.
pub fn sample_sharing_row<R: Rng + ?Sized>(spec: &SharingSpec, rng: &mut R) -> Result<BTreeMap<i64, f64>> {
    let s = spec.row_sampler()?;
    let mut row = vec![0.0; s.width()];
    s.sample_into(rng, &mut row);
    Ok(s.offsets().iter().copied().zip(row).collect())
}
