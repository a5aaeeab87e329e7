// Licensed under the Apache License, Version 2.0 <LICENSE-APACHE or
// https://www.apache.org/licenses/LICENSE-2.0> or the MIT license
// <LICENSE-MIT or https://opensource.org/licenses/MIT>, at your
// option. This file may not be copied, modified, or distributed
// except according to those terms.

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("{what} did not converge within {iterations} iterations")]
    NonConvergence { what: &'static str, iterations: usize },
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid sharing spec: {0}")]
    InvalidSharing(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid sequence: {0}")]
    InvalidSequence(String),
    #[error("sequence of length {len} too short: need at least {needed}")]
    TooShort { len: usize, needed: usize },
    #[error("torus of size {size} too small: need more than {needed}")]
    TorusTooSmall { size: usize, needed: usize },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("undefined statistic: {0}")]
    Undefined(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn dist(msg: impl Into<String>) -> Self {
        Error::InvalidDistribution(msg.into())
    }
}
