// Licensed under the Apache License, Version 2.0 <LICENSE-APACHE or
// https://www.apache.org/licenses/LICENSE-2.0> or the MIT license
// <LICENSE-MIT or https://opensource.org/licenses/MIT>, at your
// option. This file may not be copied, modified, or distributed
// except according to those terms.

//! Per-command JSON experiment configs.
//!
//! Unknown fields are rejected and every config is validated in full
//! before any computation or output happens.

use std::path::{Path, PathBuf};

use ndshift::{DistributionSpec, SharingSpec};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::CliError;

/// Flags shared by every subcommand.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub replicas: Option<usize>,
}

pub const DEFAULT_OUT: &str = "out";
pub const DEFAULT_REPLICAS: usize = 10_000;

/// Which line operator a `shift` or `iterate` run applies.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    /// Points move to the division point of the interval on their right.
    Division,
    /// `tau'_k = (1 - b_k) tau_k + b_{k+1} tau_{k+1}` on the gaps.
    #[default]
    Exchange,
}

/// Checks run on the final sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    /// KS against `reference`.
    Ks,
    /// Lags 1 to 3 inside the `4 / sqrt(n)` band.
    LagCorrelation,
    /// Chi-square independence of disjoint adjacent pairs.
    Chi2Independence,
}

fn default_bins() -> usize {
    10
}

fn default_w1_levels() -> usize {
    1000
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    #[serde(rename = "F")]
    pub f: DistributionSpec,
    pub n: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

/// `shift` and `iterate`: a renewal sample (or a gap CSV) pushed through
/// the division shift or the exchange operator.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineConfig {
    #[serde(default)]
    pub model: Model,
    #[serde(rename = "F", default)]
    pub f: Option<DistributionSpec>,
    #[serde(default)]
    pub n: Option<usize>,
    /// Gap CSV used instead of sampling `F`.
    #[serde(default)]
    pub input: Option<PathBuf>,
    #[serde(rename = "G")]
    pub g: DistributionSpec,
    #[serde(default)]
    pub steps: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub snapshots: Vec<usize>,
    #[serde(default)]
    pub tests: Vec<TestKind>,
    /// Law for KS and the W1 trace; defaults to `F`.
    #[serde(default)]
    pub reference: Option<DistributionSpec>,
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default = "default_w1_levels")]
    pub w1_levels: usize,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExchangeConfig {
    /// Law of the iid initial masses.
    #[serde(rename = "F")]
    pub f: DistributionSpec,
    pub sharing: SharingSpec,
    pub n: usize,
    pub steps: u64,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub snapshots: Vec<u64>,
    #[serde(default)]
    pub tests: Vec<TestKind>,
    #[serde(default)]
    pub reference: Option<DistributionSpec>,
    #[serde(default = "default_bins")]
    pub bins: usize,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RwreConfig {
    pub sharing: SharingSpec,
    pub steps: Vec<usize>,
    #[serde(default)]
    pub replicas: Option<usize>,
    #[serde(default)]
    pub torus: Option<usize>,
    /// Initial mass law; adds the variance-decay trace when present.
    #[serde(rename = "F", default)]
    pub f: Option<DistributionSpec>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EulerConfig {
    #[serde(rename = "F")]
    pub f: DistributionSpec,
    pub p: f64,
    pub steps: Vec<usize>,
    #[serde(default)]
    pub replicas: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
}

/// The seed flag wins over the config; one of them is required.
pub fn resolve_seed(flag: Option<u64>, config: Option<u64>) -> Result<u64, CliError> {
    flag.or(config).ok_or_else(|| CliError::Config("a seed is required (config `seed` or --seed)".into()))
}

/// Config values win over flags.
pub fn resolve_out(flag: &Option<PathBuf>, config: &Option<PathBuf>) -> PathBuf {
    config.clone().or_else(|| flag.clone()).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

pub fn resolve_replicas(flag: Option<usize>, config: Option<usize>) -> usize {
    config.or(flag).unwrap_or(DEFAULT_REPLICAS)
}

pub(crate) fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

pub(crate) fn check_law(what: &str, law: &DistributionSpec) -> Result<(), CliError> {
    law.validate().map_err(|e| invalid(format!("{what}: {e}")))
}

pub(crate) fn check_positive_law(what: &str, law: &DistributionSpec) -> Result<(), CliError> {
    check_law(what, law)?;
    if !law.is_scalar() || !law.has_positive_support() {
        return Err(invalid(format!("{what} must be a scalar law on (0, inf), got {}", law.name())));
    }
    Ok(())
}

impl SimulateConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        check_positive_law("F", &self.f)?;
        if self.n < 2 {
            return Err(invalid("n must be at least 2"));
        }
        Ok(())
    }
}

impl LineConfig {
    /// `single`: the `shift` command, which applies exactly one step.
    pub fn validate(&self, single: bool) -> Result<(), CliError> {
        match (&self.f, self.n, &self.input) {
            (Some(f), Some(n), None) => {
                check_positive_law("F", f)?;
                if n < 2 {
                    return Err(invalid("n must be at least 2"));
                }
            }
            (None, None, Some(_)) => {}
            _ => return Err(invalid("give either `F` and `n` or `input`")),
        }
        check_law("G", &self.g)?;
        if !self.g.within_unit_interval() {
            return Err(invalid(format!("G must be supported by [0, 1], got {}", self.g.name())));
        }
        if single && self.steps.is_some_and(|s| s != 1) {
            return Err(invalid("shift applies exactly one step"));
        }
        if !single && self.steps.is_none() {
            return Err(invalid("iterate needs `steps`"));
        }
        if let Some(r) = &self.reference {
            check_law("reference", r)?;
        }
        if (self.tests.contains(&TestKind::Ks) || !single) && self.reference().is_none() {
            return Err(invalid("KS and W1 need `reference` when reading `input`"));
        }
        if self.bins < 2 {
            return Err(invalid("bins must be at least 2"));
        }
        if self.w1_levels < 100 {
            return Err(invalid("w1_levels must be at least 100"));
        }
        if let (Some(n), Some(steps)) = (self.n, self.steps) {
            if n < steps + 2 {
                return Err(invalid(format!("n = {n} is too short for {steps} steps (need n >= steps + 2)")));
            }
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        self.steps.unwrap_or(1)
    }

    pub fn reference(&self) -> Option<&DistributionSpec> {
        self.reference.as_ref().or(self.f.as_ref())
    }
}

impl ExchangeConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        check_positive_law("F", &self.f)?;
        self.sharing.validate().map_err(|e| invalid(format!("sharing: {e}")))?;
        let needed = 2 * self.sharing.max_abs_offset() + 1;
        if self.n < needed {
            return Err(invalid(format!("torus of {} agents is too small for the window (need {needed})", self.n)));
        }
        if let Some(r) = &self.reference {
            check_law("reference", r)?;
        }
        if self.bins < 2 {
            return Err(invalid("bins must be at least 2"));
        }
        Ok(())
    }

    pub fn reference(&self) -> &DistributionSpec {
        self.reference.as_ref().unwrap_or(&self.f)
    }
}

impl RwreConfig {
    pub fn validate(&self, replicas: usize) -> Result<(), CliError> {
        self.sharing.validate().map_err(|e| invalid(format!("sharing: {e}")))?;
        if self.steps.is_empty() {
            return Err(invalid("steps must list at least one n"));
        }
        if replicas < ndshift::rwre::MIN_REPLICAS {
            return Err(invalid(format!("replicas must be at least {}", ndshift::rwre::MIN_REPLICAS)));
        }
        let needed = 2 * self.max_steps() * self.sharing.max_abs_offset() + 1;
        if let Some(t) = self.torus {
            if t < needed {
                return Err(invalid(format!("torus {t} is too small for the walk (need {needed})")));
            }
        }
        if let Some(f) = &self.f {
            check_law("F", f)?;
            if !f.variance().is_ok_and(f64::is_finite) {
                return Err(invalid("the variance-decay trace needs F with finite variance"));
            }
        }
        Ok(())
    }

    pub fn max_steps(&self) -> usize {
        self.steps.iter().copied().max().unwrap_or(0)
    }

    pub fn torus(&self) -> usize {
        self.torus.unwrap_or(2 * self.max_steps() * self.sharing.max_abs_offset() + 1)
    }
}

impl EulerConfig {
    pub fn validate(&self, replicas: usize) -> Result<(), CliError> {
        check_positive_law("F", &self.f)?;
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(invalid(format!("p = {} must lie in (0, 1)", self.p)));
        }
        if self.steps.is_empty() {
            return Err(invalid("steps must list at least one n"));
        }
        if replicas < 2 {
            return Err(invalid("replicas must be at least 2"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_fields_are_rejected() {
        let bad = r#"{"F":{"kind":"exponential","rate":1},"n":3,"sed":1}"#;
        assert!(matches!(parse::<SimulateConfig>(bad), Err(CliError::Config(_))));
        let bad_law = r#"{"F":{"kind":"exponential","rate":1,"shape":2},"n":3}"#;
        assert!(parse::<SimulateConfig>(bad_law).is_err());
    }

    #[test]
    fn seed_flag_wins_and_config_wins_elsewhere() {
        assert_eq!(resolve_seed(Some(1), Some(2)).unwrap(), 1);
        assert_eq!(resolve_seed(None, Some(2)).unwrap(), 2);
        assert!(resolve_seed(None, None).is_err());
        assert_eq!(resolve_out(&Some("a".into()), &Some("b".into())), PathBuf::from("b"));
        assert_eq!(resolve_out(&Some("a".into()), &None), PathBuf::from("a"));
        assert_eq!(resolve_replicas(Some(5), Some(7)), 7);
        assert_eq!(resolve_replicas(None, None), DEFAULT_REPLICAS);
    }

    #[test]
    fn line_config_validation() {
        let ok = r#"{"model":"exchange","F":{"kind":"uniform_interval","low":0,"high":2},"n":1000,
                    "G":{"kind":"beta","alpha":0.5,"beta":0.5},"steps":50,"reference":{"kind":"exponential","rate":1}}"#;
        let c: LineConfig = parse(ok).unwrap();
        c.validate(false).unwrap();
        assert!(c.validate(true).is_err());
        let no_source = r#"{"G":{"kind":"beta","alpha":0.5,"beta":0.5},"steps":1}"#;
        assert!(parse::<LineConfig>(no_source).unwrap().validate(false).is_err());
        let bad_g = r#"{"F":{"kind":"exponential","rate":1},"n":10,"G":{"kind":"exponential","rate":1}}"#;
        assert!(parse::<LineConfig>(bad_g).unwrap().validate(true).is_err());
        let short =
            r#"{"F":{"kind":"exponential","rate":1},"n":10,"G":{"kind":"deterministic","value":0.5},"steps":9}"#;
        assert!(parse::<LineConfig>(short).unwrap().validate(false).is_err());
    }

    #[test]
    fn exchange_and_rwre_validation() {
        let c: ExchangeConfig = parse(
            r#"{"F":{"kind":"exponential","rate":1},"sharing":{"kind":"dirichlet_window","offsets":[-1,0,1],"alpha":[1,1,1]},"n":2,"steps":3}"#,
        )
        .unwrap();
        assert!(c.validate().is_err());
        let r: RwreConfig = parse(
            r#"{"sharing":{"kind":"two_diagonal","G":{"kind":"beta","alpha":0.5,"beta":0.5}},"steps":[1,8],"torus":5}"#,
        )
        .unwrap();
        assert!(r.validate(1000).is_err());
        assert!(r.validate(10).is_err());
        let heavy: RwreConfig = parse(
            r#"{"sharing":{"kind":"two_diagonal","G":{"kind":"beta","alpha":0.5,"beta":0.5}},"steps":[1],"F":{"kind":"pareto","tail":1.5,"scale":1}}"#,
        )
        .unwrap();
        assert!(heavy.validate(1000).is_err());
    }
}
