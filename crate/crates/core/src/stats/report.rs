// Licensed under the Apache License, Version 2.0 <LICENSE-APACHE or
// https://www.apache.org/licenses/LICENSE-2.0> or the MIT license
// <LICENSE-MIT or https://opensource.org/licenses/MIT>, at your
// option. This file may not be copied, modified, or distributed
// except according to those terms.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(pass: bool) -> Self {
        if pass {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

/// Outcome of one statistical test. Serialises to a single JSON line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub test: String,
    pub statistic: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub p_value: Option<f64>,
    /// Acceptance threshold for tests decided without a p-value.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub significance: Option<f64>,
    pub sample_size: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "String::is_empty", default)]
    pub details: String,
}

impl TestReport {
    /// A p-value test: passes when `p >= significance`.
    pub fn from_p_value(
        test: impl Into<String>,
        statistic: f64,
        p_value: f64,
        significance: f64,
        sample_size: usize,
    ) -> Self {
        let p_value = p_value.clamp(0.0, 1.0);
        TestReport {
            test: test.into(),
            statistic,
            p_value: Some(p_value),
            threshold: None,
            significance: Some(significance),
            sample_size,
            seed: None,
            verdict: Verdict::from_bool(p_value >= significance),
            details: String::new(),
        }
    }

    /// A threshold test whose verdict was decided by the caller.
    pub fn from_threshold(
        test: impl Into<String>,
        statistic: f64,
        threshold: f64,
        pass: bool,
        sample_size: usize,
    ) -> Self {
        TestReport {
            test: test.into(),
            statistic,
            p_value: None,
            threshold: Some(threshold),
            significance: None,
            sample_size,
            seed: None,
            verdict: Verdict::from_bool(pass),
            details: String::new(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_details(mut self, details: impl Into<String>) -> Self {
        self.details = details.into();
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serialises")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_follows_significance() {
        assert!(TestReport::from_p_value("t", 0.1, 0.02, 0.01, 100).passed());
        assert!(!TestReport::from_p_value("t", 0.1, 0.005, 0.01, 100).passed());
    }

    #[test]
    fn json_line_round_trip() {
        let r = TestReport::from_p_value("ks", 0.01, 0.3, 0.01, 1000).with_seed(7).with_details("x");
        let line = r.to_json_line();
        assert!(!line.contains('\n'));
        let back: TestReport = serde_json::from_str(&line).unwrap();
        assert_eq!(back, r);
    }
}
