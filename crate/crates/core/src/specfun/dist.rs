// Licensed under the Apache License, Version 2.0 <LICENSE-APACHE or
// https://www.apache.org/licenses/LICENSE-2.0> or the MIT license
// <LICENSE-MIT or https://opensource.org/licenses/MIT>, at your
// option. This file may not be copied, modified, or distributed
// except according to those terms.

use rand::distr::Open01;
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{log_gamma, normal_cdf, regularized_beta, regularized_gamma_p};
use crate::error::{Error, Result};

/// Declarative description of a probability law.
///
/// Gamma laws use the shape/rate convention, density
/// `rate^shape / Gamma(shape) * x^(shape-1) * exp(-rate x)`.
/// The JSON form is internally tagged, e.g.
/// `{"kind": "gamma", "shape": 2.0, "rate": 1.0}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistributionSpec {
    Exponential {
        rate: f64,
    },
    Gamma {
        shape: f64,
        rate: f64,
    },
    Beta {
        alpha: f64,
        beta: f64,
    },
    Dirichlet {
        alpha: Vec<f64>,
    },
    Deterministic {
        value: f64,
    },
    UniformInterval {
        low: f64,
        high: f64,
    },
    Lognormal {
        mu: f64,
        sigma: f64,
    },
    /// Pareto law with tail index `tail` on `[scale, inf)`.
    Pareto {
        tail: f64,
        scale: f64,
    },
}

/// One draw from a [`DistributionSpec`].
#[derive(Clone, Debug, PartialEq)]
pub enum Draw {
    Scalar(f64),
    Vector(Vec<f64>),
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::dist(format!("{name} must be finite and > 0, got {v}")))
    }
}

impl DistributionSpec {
    pub fn exponential(rate: f64) -> Self {
        DistributionSpec::Exponential { rate }
    }

    pub fn gamma(shape: f64, rate: f64) -> Self {
        DistributionSpec::Gamma { shape, rate }
    }

    pub fn beta(alpha: f64, beta: f64) -> Self {
        DistributionSpec::Beta { alpha, beta }
    }

    pub fn dirichlet(alpha: Vec<f64>) -> Self {
        DistributionSpec::Dirichlet { alpha }
    }

    pub fn deterministic(value: f64) -> Self {
        DistributionSpec::Deterministic { value }
    }

    pub fn uniform(low: f64, high: f64) -> Self {
        DistributionSpec::UniformInterval { low, high }
    }

    pub fn lognormal(mu: f64, sigma: f64) -> Self {
        DistributionSpec::Lognormal { mu, sigma }
    }

    pub fn pareto(tail: f64, scale: f64) -> Self {
        DistributionSpec::Pareto { tail, scale }
    }

    /// Pareto law with the given tail index and mean; needs `tail > 1`.
    pub fn pareto_with_mean(tail: f64, mean: f64) -> Self {
        DistributionSpec::Pareto { tail, scale: mean * (tail - 1.0) / tail }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DistributionSpec::Exponential { .. } => "exponential",
            DistributionSpec::Gamma { .. } => "gamma",
            DistributionSpec::Beta { .. } => "beta",
            DistributionSpec::Dirichlet { .. } => "dirichlet",
            DistributionSpec::Deterministic { .. } => "deterministic",
            DistributionSpec::UniformInterval { .. } => "uniform_interval",
            DistributionSpec::Lognormal { .. } => "lognormal",
            DistributionSpec::Pareto { .. } => "pareto",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            DistributionSpec::Exponential { rate } => positive("exponential rate", rate),
            DistributionSpec::Gamma { shape, rate } => {
                positive("gamma shape", shape)?;
                positive("gamma rate", rate)
            }
            DistributionSpec::Beta { alpha, beta } => {
                positive("beta alpha", alpha)?;
                positive("beta beta", beta)
            }
            DistributionSpec::Dirichlet { ref alpha } => {
                if alpha.is_empty() {
                    return Err(Error::dist("dirichlet parameter vector is empty"));
                }
                alpha.iter().try_for_each(|&a| positive("dirichlet alpha", a))
            }
            DistributionSpec::Deterministic { value } => {
                if value.is_finite() {
                    Ok(())
                } else {
                    Err(Error::dist(format!("deterministic atom must be finite, got {value}")))
                }
            }
            DistributionSpec::UniformInterval { low, high } => {
                if low.is_finite() && high.is_finite() && low < high {
                    Ok(())
                } else {
                    Err(Error::dist(format!("uniform interval needs finite low < high, got ({low}, {high})")))
                }
            }
            DistributionSpec::Lognormal { mu, sigma } => {
                if !mu.is_finite() {
                    return Err(Error::dist(format!("lognormal mu must be finite, got {mu}")));
                }
                positive("lognormal sigma", sigma)
            }
            DistributionSpec::Pareto { tail, scale } => {
                positive("pareto tail index", tail)?;
                positive("pareto scale", scale)
            }
        }
    }

    pub fn is_scalar(&self) -> bool {
        !matches!(self, DistributionSpec::Dirichlet { .. })
    }

    /// True when every draw is strictly positive (up to floating point).
    pub fn has_positive_support(&self) -> bool {
        match *self {
            DistributionSpec::Deterministic { value } => value > 0.0,
            DistributionSpec::UniformInterval { low, .. } => low >= 0.0,
            DistributionSpec::Dirichlet { .. } => false,
            _ => true,
        }
    }

    /// True when the law is supported by `[0, 1]`.
    pub fn within_unit_interval(&self) -> bool {
        match *self {
            DistributionSpec::Beta { .. } => true,
            DistributionSpec::Deterministic { value } => (0.0..=1.0).contains(&value),
            DistributionSpec::UniformInterval { low, high } => low >= 0.0 && high <= 1.0,
            _ => false,
        }
    }

    pub fn mean(&self) -> Result<f64> {
        self.validate()?;
        Ok(match *self {
            DistributionSpec::Exponential { rate } => 1.0 / rate,
            DistributionSpec::Gamma { shape, rate } => shape / rate,
            DistributionSpec::Beta { alpha, beta } => alpha / (alpha + beta),
            DistributionSpec::Dirichlet { ref alpha } => {
                return Err(Error::DimensionMismatch { expected: 1, got: alpha.len() })
            }
            DistributionSpec::Deterministic { value } => value,
            DistributionSpec::UniformInterval { low, high } => 0.5 * (low + high),
            DistributionSpec::Lognormal { mu, sigma } => (mu + 0.5 * sigma * sigma).exp(),
            DistributionSpec::Pareto { tail, scale } => {
                if tail > 1.0 {
                    tail * scale / (tail - 1.0)
                } else {
                    f64::INFINITY
                }
            }
        })
    }

    /// Variance; `f64::INFINITY` for heavy-tailed laws without a second moment.
    pub fn variance(&self) -> Result<f64> {
        self.validate()?;
        Ok(match *self {
            DistributionSpec::Exponential { rate } => 1.0 / (rate * rate),
            DistributionSpec::Gamma { shape, rate } => shape / (rate * rate),
            DistributionSpec::Beta { alpha, beta } => {
                let s = alpha + beta;
                alpha * beta / (s * s * (s + 1.0))
            }
            DistributionSpec::Dirichlet { ref alpha } => {
                return Err(Error::DimensionMismatch { expected: 1, got: alpha.len() })
            }
            DistributionSpec::Deterministic { .. } => 0.0,
            DistributionSpec::UniformInterval { low, high } => (high - low).powi(2) / 12.0,
            DistributionSpec::Lognormal { mu, sigma } => {
                let s2 = sigma * sigma;
                (s2.exp() - 1.0) * (2.0 * mu + s2).exp()
            }
            DistributionSpec::Pareto { tail, scale } => {
                if tail > 2.0 {
                    scale * scale * tail / ((tail - 1.0).powi(2) * (tail - 2.0))
                } else {
                    f64::INFINITY
                }
            }
        })
    }

    /// Compiles a validated scalar sampler.
    pub fn sampler(&self) -> Result<Sampler> {
        self.validate()?;
        Ok(match *self {
            DistributionSpec::Exponential { rate } => Sampler::Exponential { scale: 1.0 / rate },
            DistributionSpec::Gamma { shape, rate } => Sampler::Gamma(GammaSampler::new(shape, 1.0 / rate)?),
            DistributionSpec::Beta { alpha, beta } => {
                Sampler::Beta { x: GammaSampler::new(alpha, 1.0)?, y: GammaSampler::new(beta, 1.0)? }
            }
            DistributionSpec::Dirichlet { ref alpha } => {
                return Err(Error::DimensionMismatch { expected: 1, got: alpha.len() })
            }
            DistributionSpec::Deterministic { value } => Sampler::Constant(value),
            DistributionSpec::UniformInterval { low, high } => Sampler::Uniform { low, width: high - low },
            DistributionSpec::Lognormal { mu, sigma } => Sampler::Lognormal { mu, sigma },
            DistributionSpec::Pareto { tail, scale } => Sampler::Pareto { neg_inv_tail: -1.0 / tail, scale },
        })
    }

    /// Compiles a Dirichlet sampler; a scalar law is rejected.
    pub fn dirichlet_sampler(&self) -> Result<DirichletSampler> {
        self.validate()?;
        match self {
            DistributionSpec::Dirichlet { alpha } => DirichletSampler::new(alpha),
            _ => Err(Error::dist(format!("{} is not a dirichlet law", self.name()))),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Draw> {
        if let DistributionSpec::Dirichlet { alpha } = self {
            let sampler = self.dirichlet_sampler()?;
            let mut out = vec![0.0; alpha.len()];
            sampler.sample_into(rng, &mut out);
            return Ok(Draw::Vector(out));
        }
        Ok(Draw::Scalar(self.sampler()?.sample(rng)))
    }

    /// Density at a scalar point; zero outside the support. A deterministic
    /// law reports an infinite density at its atom.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        self.validate()?;
        if x.is_nan() {
            return Err(Error::domain("density at NaN"));
        }
        Ok(match *self {
            DistributionSpec::Exponential { rate } => {
                if x < 0.0 {
                    0.0
                } else {
                    rate * (-rate * x).exp()
                }
            }
            DistributionSpec::Gamma { shape, rate } => {
                if x < 0.0 {
                    0.0
                } else if x == 0.0 {
                    match shape.partial_cmp(&1.0) {
                        Some(std::cmp::Ordering::Less) => f64::INFINITY,
                        Some(std::cmp::Ordering::Equal) => rate,
                        _ => 0.0,
                    }
                } else {
                    (shape * rate.ln() - log_gamma(shape)? + (shape - 1.0) * x.ln() - rate * x).exp()
                }
            }
            DistributionSpec::Beta { alpha, beta } => {
                if x <= 0.0 || x >= 1.0 {
                    0.0
                } else {
                    let ln_norm = log_gamma(alpha + beta)? - log_gamma(alpha)? - log_gamma(beta)?;
                    (ln_norm + (alpha - 1.0) * x.ln() + (beta - 1.0) * (1.0 - x).ln()).exp()
                }
            }
            DistributionSpec::Dirichlet { ref alpha } => {
                return Err(Error::DimensionMismatch { expected: alpha.len(), got: 1 })
            }
            DistributionSpec::Deterministic { value } => {
                if x == value {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
            DistributionSpec::UniformInterval { low, high } => {
                if (low..=high).contains(&x) {
                    1.0 / (high - low)
                } else {
                    0.0
                }
            }
            DistributionSpec::Lognormal { mu, sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    let z = (x.ln() - mu) / sigma;
                    (-0.5 * z * z).exp() / (x * sigma * (2.0 * std::f64::consts::PI).sqrt())
                }
            }
            DistributionSpec::Pareto { tail, scale } => {
                if x < scale {
                    0.0
                } else {
                    tail * scale.powf(tail) / x.powf(tail + 1.0)
                }
            }
        })
    }

    /// Density at a vector point.
    ///
    /// For a Dirichlet law of dimension `r` the point may be given by its
    /// first `r - 1` coordinates (the last is implied) or by all `r`
    /// coordinates, which must then sum to one. Scalar laws accept a
    /// one-element slice.
    pub fn pdf_vector(&self, x: &[f64]) -> Result<f64> {
        self.validate()?;
        let alpha = match self {
            DistributionSpec::Dirichlet { alpha } => alpha,
            _ => {
                if x.len() != 1 {
                    return Err(Error::DimensionMismatch { expected: 1, got: x.len() });
                }
                return self.pdf(x[0]);
            }
        };
        let r = alpha.len();
        let mut full: Vec<f64> = x.to_vec();
        if x.len() + 1 == r {
            full.push(1.0 - x.iter().sum::<f64>());
        } else if x.len() == r {
            if (x.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return Ok(0.0);
            }
        } else {
            return Err(Error::DimensionMismatch { expected: r - 1, got: x.len() });
        }
        if r == 1 {
            // Point mass at 1.
            return Ok(if full[0] == 1.0 { f64::INFINITY } else { 0.0 });
        }
        if full.iter().any(|&v| v.is_nan()) {
            return Err(Error::domain("dirichlet density at NaN"));
        }
        if full.iter().any(|&v| v <= 0.0 || v >= 1.0) {
            return Ok(0.0);
        }
        let a: f64 = alpha.iter().sum();
        let mut ln = log_gamma(a)?;
        for (&ai, &xi) in alpha.iter().zip(&full) {
            ln += (ai - 1.0) * xi.ln() - log_gamma(ai)?;
        }
        Ok(ln.exp())
    }

    /// Cumulative distribution function of a scalar law.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        self.validate()?;
        if x.is_nan() {
            return Err(Error::domain("cdf at NaN"));
        }
        Ok(match *self {
            DistributionSpec::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            DistributionSpec::Gamma { shape, rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    regularized_gamma_p(shape, rate * x)?
                }
            }
            DistributionSpec::Beta { alpha, beta } => regularized_beta(alpha, beta, x)?,
            DistributionSpec::Dirichlet { ref alpha } => {
                return Err(Error::DimensionMismatch { expected: 1, got: alpha.len() })
            }
            DistributionSpec::Deterministic { value } => {
                if x < value {
                    0.0
                } else {
                    1.0
                }
            }
            DistributionSpec::UniformInterval { low, high } => ((x - low) / (high - low)).clamp(0.0, 1.0),
            DistributionSpec::Lognormal { mu, sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    normal_cdf((x.ln() - mu) / sigma)?
                }
            }
            DistributionSpec::Pareto { tail, scale } => {
                if x <= scale {
                    0.0
                } else {
                    1.0 - (scale / x).powf(tail)
                }
            }
        })
    }
}

/// Marsaglia–Tsang squeeze/rejection sampler for `Gamma(shape, scale)`.
/// Shapes below one are boosted: `Gamma(a) = Gamma(a + 1) * U^(1/a)`.
#[derive(Clone, Debug)]
pub struct GammaSampler {
    scale: f64,
    d: f64,
    c: f64,
    inv_shape: Option<f64>,
    exponential: bool,
}

impl GammaSampler {
    pub fn new(shape: f64, scale: f64) -> Result<Self> {
        positive("gamma shape", shape)?;
        positive("gamma scale", scale)?;
        let boosted = if shape < 1.0 { shape + 1.0 } else { shape };
        let d = boosted - 1.0 / 3.0;
        Ok(GammaSampler {
            scale,
            d,
            c: 1.0 / (9.0 * d).sqrt(),
            inv_shape: (shape < 1.0).then(|| 1.0 / shape),
            exponential: shape == 1.0,
        })
    }

    fn large_shape<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        loop {
            let x: f64 = rng.sample(StandardNormal);
            let v_cbrt = 1.0 + self.c * x;
            if v_cbrt <= 0.0 {
                continue;
            }
            let v = v_cbrt * v_cbrt * v_cbrt;
            let u: f64 = rng.sample(Open01);
            let x2 = x * x;
            if u < 1.0 - 0.0331 * x2 * x2 || u.ln() < 0.5 * x2 + self.d * (1.0 - v + v.ln()) {
                return self.d * v;
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.exponential {
            let e: f64 = rng.sample(Exp1);
            return e * self.scale;
        }
        let g = self.large_shape(rng);
        match self.inv_shape {
            Some(inv) => {
                let u: f64 = rng.sample(Open01);
                g * u.powf(inv) * self.scale
            }
            None => g * self.scale,
        }
    }
}

/// Compiled sampler for a scalar [`DistributionSpec`].
#[derive(Clone, Debug)]
pub enum Sampler {
    Exponential { scale: f64 },
    Gamma(GammaSampler),
    Beta { x: GammaSampler, y: GammaSampler },
    Constant(f64),
    Uniform { low: f64, width: f64 },
    Lognormal { mu: f64, sigma: f64 },
    Pareto { neg_inv_tail: f64, scale: f64 },
}

impl Sampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Sampler::Beta { .. } => self.sample_split(rng).0,
            _ => self.sample_unsplit(rng),
        }
    }

    fn sample_unsplit<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Sampler::Exponential { scale } => {
                let e: f64 = rng.sample(Exp1);
                e * scale
            }
            Sampler::Gamma(ref g) => g.sample(rng),
            Sampler::Beta { .. } => unreachable!("beta draws go through sample_split"),
            Sampler::Constant(v) => v,
            Sampler::Uniform { low, width } => {
                let u: f64 = rng.sample(Open01);
                low + width * u
            }
            Sampler::Lognormal { mu, sigma } => {
                let z: f64 = rng.sample(StandardNormal);
                (mu + sigma * z).exp()
            }
            Sampler::Pareto { neg_inv_tail, scale } => {
                let u: f64 = rng.sample(Open01);
                scale * u.powf(neg_inv_tail)
            }
        }
    }

    /// Draws `b` together with `1 - b`. For Beta laws both parts come from
    /// the same Gamma pair, `(X, Y) / (X + Y)`, so neither loses precision
    /// near the endpoints.
    pub fn sample_split<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        match self {
            Sampler::Beta { x, y } => loop {
                let gx = x.sample(rng);
                let gy = y.sample(rng);
                let s = gx + gy;
                if s > 0.0 {
                    return (gx / s, gy / s);
                }
            },
            _ => {
                let b = self.sample_unsplit(rng);
                (b, 1.0 - b)
            }
        }
    }
}

/// Dirichlet sampler: normalised independent unit-rate Gammas.
#[derive(Clone, Debug)]
pub struct DirichletSampler {
    gammas: Vec<GammaSampler>,
}

impl DirichletSampler {
    pub fn new(alpha: &[f64]) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::dist("dirichlet parameter vector is empty"));
        }
        let gammas = alpha.iter().map(|&a| GammaSampler::new(a, 1.0)).collect::<Result<_>>()?;
        Ok(DirichletSampler { gammas })
    }

    pub fn dim(&self) -> usize {
        self.gammas.len()
    }

    /// Fills `out` with a point of the simplex. The last coordinate is set to
    /// one minus the others, so the left-to-right sum is exactly 1.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        assert_eq!(out.len(), self.gammas.len(), "dirichlet output has wrong dimension");
        loop {
            let mut total = 0.0;
            for (o, g) in out.iter_mut().zip(&self.gammas) {
                *o = g.sample(rng);
                total += *o;
            }
            if total > 0.0 && total.is_finite() {
                close_simplex(out, total);
                return;
            }
        }
    }
}

/// Normalises positive weights with the given total so that they sum to
/// exactly one when added left to right.
pub(crate) fn close_simplex(w: &mut [f64], total: f64) {
    let (last, head) = w.split_last_mut().expect("non-empty simplex");
    let mut acc = 0.0;
    for v in head.iter_mut() {
        *v /= total;
        acc += *v;
    }
    if acc > 1.0 {
        for v in head.iter_mut() {
            *v /= acc;
        }
        acc = head.iter().sum();
    }
    *last = (1.0 - acc).max(0.0);
}
