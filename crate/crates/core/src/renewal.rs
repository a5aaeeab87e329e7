// Licensed under the Apache License, Version 2.0 <LICENSE-APACHE or
// https://www.apache.org/licenses/LICENSE-2.0> or the MIT license
// <LICENSE-MIT or https://opensource.org/licenses/MIT>, at your
// option. This file may not be copied, modified, or distributed
// except according to those terms.

//! Renewal processes in their Palm representation.
//!
//! A stationary renewal process is handled through its gap sequence
//! `tau_1, ..., tau_n` of iid interpoint distances, with a point fixed at the
//! origin. [`PointConfiguration`] is the matching set of points
//! `0 = T_0 < T_1 < ... < T_n`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{for_each_block, BLOCK};
use crate::rng::RngHandle;
use crate::specfun::DistributionSpec;

/// How a gap sequence was generated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapMeta {
    pub law: DistributionSpec,
    pub seed: u64,
    pub stream: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GapSequence {
    gaps: Vec<f64>,
    meta: Option<GapMeta>,
}

impl GapSequence {
    /// Validates: at least two gaps, all finite and strictly positive.
    pub fn new(gaps: Vec<f64>) -> Result<Self> {
        if gaps.len() < 2 {
            return Err(Error::TooShort { len: gaps.len(), needed: 2 });
        }
        if let Some((i, g)) = gaps.iter().enumerate().find(|(_, g)| !(g.is_finite() && **g > 0.0)) {
            return Err(Error::InvalidSequence(format!("gap {i} = {g} is not a positive finite length")));
        }
        Ok(GapSequence { gaps, meta: None })
    }

    pub fn with_meta(mut self, meta: GapMeta) -> Self {
        self.meta = Some(meta);
        self
    }

    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }

    pub fn meta(&self) -> Option<&GapMeta> {
        self.meta.as_ref()
    }

    pub fn len(&self) -> usize {
        self.gaps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gaps.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.gaps
    }

    /// The gaps with `trim` entries dropped at each end.
    pub fn interior(&self, trim: usize) -> &[f64] {
        if 2 * trim >= self.gaps.len() {
            return &[];
        }
        &self.gaps[trim..self.gaps.len() - trim]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointConfiguration {
    points: Vec<f64>,
}

impl PointConfiguration {
    /// Validates: at least two points, the first exactly 0, strictly
    /// increasing and finite.
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::TooShort { len: points.len(), needed: 2 });
        }
        if points[0] != 0.0 {
            return Err(Error::InvalidSequence(format!("first point must be 0, got {}", points[0])));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("point configuration".into()));
        }
        if let Some(i) = points.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSequence(format!(
                "points not strictly increasing at index {}: {} then {}",
                i + 1,
                points[i],
                points[i + 1]
            )));
        }
        Ok(PointConfiguration { points })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.points
    }
}

/// `n` iid draws from a scalar law, one stream per block of [`BLOCK`] draws.
pub(crate) fn sample_iid(law: &DistributionSpec, n: usize, rng: &RngHandle) -> Result<Vec<f64>> {
    let sampler = law.sampler()?;
    let mut out = vec![0.0; n];
    for_each_block(&mut out, BLOCK, |b, chunk| {
        let mut g = rng.substream(b as u64).rng();
        for v in chunk.iter_mut() {
            *v = sampler.sample(&mut g);
        }
    });
    Ok(out)
}

/// Draws `n` iid gaps from `law`.
pub fn sample_gaps(law: &DistributionSpec, n: usize, rng: &RngHandle) -> Result<GapSequence> {
    law.validate()?;
    if !law.is_scalar() || !law.has_positive_support() {
        return Err(Error::dist(format!("gap law must be scalar with positive support, got {law:?}")));
    }
    if n < 2 {
        return Err(Error::TooShort { len: n, needed: 2 });
    }
    let gaps = sample_iid(law, n, rng)?;
    Ok(GapSequence::new(gaps)?.with_meta(GapMeta { law: law.clone(), seed: rng.seed(), stream: rng.stream() }))
}

/// Partial sums `T_k = tau_1 + ... + tau_k` with `T_0 = 0`.
pub fn gaps_to_points(g: &GapSequence) -> Result<PointConfiguration> {
    let mut points = Vec::with_capacity(g.len() + 1);
    let mut t = 0.0;
    points.push(t);
    for &tau in g.gaps() {
        t += tau;
        points.push(t);
    }
    if !t.is_finite() {
        return Err(Error::NonFinite("accumulated point position overflowed".into()));
    }
    PointConfiguration::new(points)
}

/// Consecutive differences of a point configuration.
pub fn points_to_gaps(p: &PointConfiguration) -> Result<GapSequence> {
    GapSequence::new(p.points().windows(2).map(|w| w[1] - w[0]).collect())
}

/// CSV text with header `tau` and one gap per line, in shortest
/// round-trip decimal form.
pub fn gaps_to_csv(g: &GapSequence) -> String {
    let mut s = String::with_capacity(g.len() * 20 + 4);
    s.push_str("tau\n");
    for v in g.gaps() {
        writeln!(s, "{v}").expect("writing to a String");
    }
    s
}

/// Parses the format written by [`gaps_to_csv`]. Blank lines are skipped.
pub fn gaps_from_csv(text: &str) -> Result<GapSequence> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == "tau" => {}
        other => return Err(Error::InvalidSequence(format!("expected header `tau`, got {:?}", other.map(|(_, l)| l)))),
    }
    let gaps = lines
        .map(|(i, l)| {
            l.trim().parse::<f64>().map_err(|e| Error::InvalidSequence(format!("line {}: {e}: {l:?}", i + 1)))
        })
        .collect::<Result<Vec<_>>>()?;
    GapSequence::new(gaps)
}
