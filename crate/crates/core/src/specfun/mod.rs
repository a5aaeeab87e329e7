// Licensed under the Apache License, Version 2.0 <LICENSE-APACHE or
// https://www.apache.org/licenses/LICENSE-2.0> or the MIT license
// <LICENSE-MIT or https://opensource.org/licenses/MIT>, at your
// option. This file may not be copied, modified, or distributed
// except according to those terms.

//! Special functions and the Gamma/Beta/Dirichlet family.

pub(crate) mod dist;

pub use dist::{DirichletSampler, DistributionSpec, Draw, GammaSampler, Sampler};

use crate::error::{Error, Result};

/// Iteration cap shared by the series and continued fractions below.
pub const MAX_ITERATIONS: usize = 10_000;

const EPS: f64 = 1e-16;
const FPMIN: f64 = f64::MIN_POSITIVE / EPS;

const LANCZOS_G: f64 = 607.0 / 128.0;
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

// Lanczos coefficients for g = 607/128, n = 15 (Godfrey).
const LANCZOS: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_746,
    -0.491_913_816_097_620_2,
    3.399_464_998_481_189e-5,
    4.652_362_892_704_858e-5,
    -9.837_447_530_487_956e-5,
    1.580_887_032_249_125e-4,
    -2.102_644_417_241_049e-4,
    2.174_396_181_152_126_4e-4,
    -1.643_181_065_367_639e-4,
    8.441_822_398_385_275e-5,
    -2.619_083_840_158_141e-5,
    3.689_918_265_953_162_4e-6,
];

/// Natural logarithm of the Gamma function for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::domain(format!("log_gamma requires finite x > 0, got {x}")));
    }
    if x == 1.0 || x == 2.0 {
        return Ok(0.0);
    }
    let mut sum = 0.0;
    for (i, c) in LANCZOS.iter().enumerate().skip(1).rev() {
        sum += c / (x + i as f64);
    }
    sum += LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    Ok((x + 0.5) * t.ln() - t + HALF_LN_2PI + (sum / x).ln())
}

/// `ln B(a, b)`.
pub fn log_beta(a: f64, b: f64) -> Result<f64> {
    Ok(log_gamma(a)? + log_gamma(b)? - log_gamma(a + b)?)
}

/// `ln C(n, k)` via log-gamma.
pub fn log_binomial(n: u64, k: u64) -> Result<f64> {
    if k > n {
        return Err(Error::domain(format!("binomial coefficient with k = {k} > n = {n}")));
    }
    if k == 0 || k == n {
        return Ok(0.0);
    }
    let (n, k) = (n as f64, k as f64);
    Ok(log_gamma(n + 1.0)? - log_gamma(k + 1.0)? - log_gamma(n - k + 1.0)?)
}

fn check_gamma_args(a: f64, x: f64) -> Result<()> {
    if !a.is_finite() || a <= 0.0 {
        return Err(Error::domain(format!("incomplete gamma requires finite a > 0, got {a}")));
    }
    if x.is_nan() || x < 0.0 {
        return Err(Error::domain(format!("incomplete gamma requires x >= 0, got {x}")));
    }
    Ok(())
}

// ln(x^a e^-x / Gamma(a))
fn gamma_prefactor(a: f64, x: f64) -> Result<f64> {
    Ok(a * x.ln() - x - log_gamma(a)?)
}

fn gamma_series(a: f64, x: f64) -> Result<f64> {
    let mut ap = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..MAX_ITERATIONS {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            return Ok(sum * gamma_prefactor(a, x)?.exp());
        }
    }
    Err(Error::NonConvergence { what: "incomplete gamma series", iterations: MAX_ITERATIONS })
}

// Modified Lentz evaluation of the continued fraction for Q(a, x).
fn gamma_continued_fraction(a: f64, x: f64) -> Result<f64> {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / FPMIN;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=MAX_ITERATIONS {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b + an / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            return Ok(h * gamma_prefactor(a, x)?.exp());
        }
    }
    Err(Error::NonConvergence { what: "incomplete gamma continued fraction", iterations: MAX_ITERATIONS })
}

/// Regularized lower incomplete gamma function `P(a, x)`.
///
/// Uses the power series below `x = a + 1` and the continued fraction for
/// the complement above it.
pub fn regularized_gamma_p(a: f64, x: f64) -> Result<f64> {
    check_gamma_args(a, x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    let p = if x < a + 1.0 { gamma_series(a, x)? } else { 1.0 - gamma_continued_fraction(a, x)? };
    Ok(p.clamp(0.0, 1.0))
}

/// Regularized upper incomplete gamma function `Q(a, x) = 1 - P(a, x)`,
/// accurate in the far tail.
pub fn regularized_gamma_q(a: f64, x: f64) -> Result<f64> {
    check_gamma_args(a, x)?;
    if x == 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    let q = if x < a + 1.0 { 1.0 - gamma_series(a, x)? } else { gamma_continued_fraction(a, x)? };
    Ok(q.clamp(0.0, 1.0))
}

fn beta_continued_fraction(a: f64, b: f64, x: f64) -> Result<f64> {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < FPMIN {
        d = FPMIN;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITERATIONS {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            return Ok(h);
        }
    }
    Err(Error::NonConvergence { what: "incomplete beta continued fraction", iterations: MAX_ITERATIONS })
}

/// Regularized incomplete beta function `I_x(a, b)`, i.e. the Beta CDF.
pub fn regularized_beta(a: f64, b: f64, x: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0) {
        return Err(Error::domain(format!("incomplete beta requires a, b > 0, got ({a}, {b})")));
    }
    if x.is_nan() {
        return Err(Error::domain("incomplete beta at NaN"));
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    if x >= 1.0 {
        return Ok(1.0);
    }
    let ln_front = a * x.ln() + b * (1.0 - x).ln() - log_beta(a, b)?;
    let front = ln_front.exp();
    let v = if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(a, b, x)? / a
    } else {
        1.0 - front * beta_continued_fraction(b, a, 1.0 - x)? / b
    };
    Ok(v.clamp(0.0, 1.0))
}

/// Complementary error function, through `erfc(x) = Q(1/2, x^2)`.
pub fn erfc(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::domain("erfc at NaN"));
    }
    if x >= 0.0 {
        regularized_gamma_q(0.5, x * x)
    } else {
        Ok(1.0 + regularized_gamma_p(0.5, x * x)?)
    }
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> Result<f64> {
    Ok(0.5 * erfc(-z / std::f64::consts::SQRT_2)?)
}
