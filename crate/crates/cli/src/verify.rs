// Licensed under the Apache License, Version 2.0 <LICENSE-APACHE or
// https://www.apache.org/licenses/LICENSE-2.0> or the MIT license
// <LICENSE-MIT or https://opensource.org/licenses/MIT>, at your
// option. This file may not be copied, modified, or distributed
// except according to those terms.

//! The acceptance criteria, one function each.
//!
//! Every criterion derives its randomness from `RngHandle::new(seed)`
//! substream `id`, so a single criterion can be replayed alone. Each returns
//! one [`TestReport`] per sub-check; a criterion passes when all of them do.

use ndshift::exchange::{
    apply_exchange_line, euler_sum_value, iterate_exchange_observed, iterate_random_exchange, step_random_exchange,
};
use ndshift::renewal::sample_gaps;
use ndshift::rwre::{estimate_return_probability, sum_squared_columns, variance_decay_trace};
use ndshift::stats::{
    chi2_independence, correlation_band, gamma_fit_mom, ks_test_against, lag_correlation, summarize,
    wasserstein1_vs_spec,
};
use ndshift::{DistributionSpec as D, ExchangeState, RngHandle, SharingSpec, TestReport};
use serde::Serialize;

use crate::commands::{adjacent_pairs, euler_replicas};
use crate::error::CliError;

/// Seed used by `verify` when none is given.
pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    All,
    /// Gamma/Beta invariance of the line exchange, its negative controls
    /// and the attractor.
    Theorem1,
    Dirichlet,
    Rwre,
    Euler,
}

impl Suite {
    pub fn criteria(self) -> &'static [u32] {
        match self {
            Suite::All => &[1, 2, 3, 4, 5, 6, 7, 8],
            Suite::Theorem1 => &[1, 2, 3],
            Suite::Dirichlet => &[4],
            Suite::Rwre => &[5, 6],
            Suite::Euler => &[7],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionOutcome {
    pub id: u32,
    pub name: &'static str,
    pub seed: u64,
    pub passed: bool,
    pub reports: Vec<TestReport>,
}

impl CriterionOutcome {
    fn new(id: u32, name: &'static str, seed: u64, reports: Vec<TestReport>) -> Self {
        let reports: Vec<TestReport> = reports.into_iter().map(|r| r.with_seed(seed)).collect();
        CriterionOutcome { id, name, seed, passed: reports.iter().all(TestReport::passed), reports }
    }
}

pub fn criterion_name(id: u32) -> &'static str {
    match id {
        1 => "gamma_beta_invariance",
        2 => "necessity_controls",
        3 => "attractor",
        4 => "dirichlet_fixed_point",
        5 => "return_identity",
        6 => "variance_decay",
        7 => "euler_sum",
        8 => "conservation_determinism",
        _ => "unknown",
    }
}

pub fn run_criterion(id: u32, seed: u64) -> Result<CriterionOutcome, CliError> {
    let rng = RngHandle::new(seed).substream(id as u64);
    let reports = match id {
        1 => gamma_beta_invariance(&rng)?,
        2 => necessity_controls(&rng)?,
        3 => attractor(&rng)?,
        4 => dirichlet_fixed_point(&rng)?,
        5 => return_identity(&rng)?,
        6 => variance_decay(&rng)?,
        7 => euler_sum(&rng)?,
        8 => conservation_determinism(&rng, seed)?,
        _ => return Err(CliError::Config(format!("no criterion {id}"))),
    };
    Ok(CriterionOutcome::new(id, criterion_name(id), seed, reports))
}

pub fn run_suite(suite: Suite, seed: u64) -> Result<Vec<CriterionOutcome>, CliError> {
    suite.criteria().iter().map(|&id| run_criterion(id, seed)).collect()
}

const N_LINE: usize = 100_000;

fn labelled(r: TestReport, label: impl AsRef<str>) -> TestReport {
    let details =
        if r.details.is_empty() { label.as_ref().to_owned() } else { format!("{} {}", label.as_ref(), r.details) };
    r.with_details(details)
}

fn lag_reports(xs: &[f64], lags: std::ops::RangeInclusive<usize>, label: &str) -> Result<Vec<TestReport>, CliError> {
    let band = correlation_band(xs.len());
    lags.map(|lag| {
        let rho = lag_correlation(xs, lag)?;
        Ok(labelled(
            TestReport::from_threshold(format!("lag{lag}_correlation"), rho, band, rho.abs() < band, xs.len()),
            label,
        ))
    })
    .collect()
}

/// One Beta(r a, (1 - r) a) exchange step on Gamma(a, g) gaps: KS against
/// Gamma(a, g) and lag 1..3 correlations inside `4 / sqrt(n)`.
fn gamma_beta_invariance(rng: &RngHandle) -> Result<Vec<TestReport>, CliError> {
    let mut out = Vec::new();
    for (i, (alpha, gamma, r)) in [(1.0, 1.0, 0.5), (2.0, 1.0, 0.5), (1.0, 2.0, 0.3)].into_iter().enumerate() {
        let h = rng.substream(i as u64);
        let f = D::gamma(alpha, gamma);
        let g = sample_gaps(&f, N_LINE, &h.substream(0))?;
        let next = apply_exchange_line(&g, &D::beta(r * alpha, (1.0 - r) * alpha), &h.substream(1))?;
        let label = format!("alpha={alpha} gamma={gamma} r={r}");
        out.push(labelled(ks_test_against(next.gaps(), &f)?, &label));
        out.extend(lag_reports(next.gaps(), 1..=3, &label)?);
    }
    Ok(out)
}

/// Rejection means the control behaved as expected.
fn expect_rejection(r: TestReport, below: f64) -> TestReport {
    let p = r.p_value.unwrap_or(1.0);
    let mut flipped =
        TestReport::from_threshold(format!("{}_rejects", r.test), r.statistic, below, p < below, r.sample_size);
    flipped.p_value = Some(p);
    flipped.with_details(r.details)
}

fn necessity_controls(rng: &RngHandle) -> Result<Vec<TestReport>, CliError> {
    let mut out = Vec::new();
    let uniform = D::beta(1.0, 1.0);

    // (a) Exp(1) with uniform divisions leaves adjacent gaps dependent.
    let h = rng.substream(0);
    let g = sample_gaps(&D::exponential(1.0), N_LINE, &h.substream(0))?;
    let next = apply_exchange_line(&g, &uniform, &h.substream(1))?;
    out.push(labelled(expect_rejection(chi2_independence(&adjacent_pairs(next.gaps()), 10)?, 0.01), "exp+uniform"));

    // (b) Midpoint divisions: correlation 1/2 and a Gamma(2, 2) marginal.
    let h = rng.substream(1);
    let g = sample_gaps(&D::exponential(1.0), N_LINE, &h.substream(0))?;
    let next = apply_exchange_line(&g, &D::deterministic(0.5), &h.substream(1))?;
    let rho = lag_correlation(next.gaps(), 1)?;
    out.push(labelled(
        TestReport::from_threshold("lag1_correlation_near_half", rho, 0.02, (rho - 0.5).abs() <= 0.02, next.len()),
        "exp+midpoint",
    ));
    out.push(labelled(
        expect_rejection(ks_test_against(next.gaps(), &D::exponential(1.0))?, 1e-6),
        "exp+midpoint vs exp(1)",
    ));

    // (c) Gamma(2, 1) with uniform divisions: every second Poisson point.
    let h = rng.substream(2);
    let f = D::gamma(2.0, 1.0);
    let g = sample_gaps(&f, N_LINE, &h.substream(0))?;
    let next = apply_exchange_line(&g, &uniform, &h.substream(1))?;
    out.push(labelled(chi2_independence(&adjacent_pairs(next.gaps()), 10)?, "gamma2+uniform"));
    out.push(labelled(ks_test_against(next.gaps(), &f)?, "gamma2+uniform"));
    Ok(out)
}

/// Uniform(0, 2) gaps under 50 Beta(1/2, 1/2) exchange steps.
fn attractor(rng: &RngHandle) -> Result<Vec<TestReport>, CliError> {
    let n = 200_000;
    let steps = 50;
    let target = D::exponential(1.0);
    let g = sample_gaps(&D::uniform(0.0, 2.0), n, &rng.substream(0))?;
    let reference = rng.substream(2);
    let mut w1 = Vec::with_capacity(steps + 1);
    let last = iterate_exchange_observed(&g, &D::beta(0.5, 0.5), steps, &rng.substream(1), |_, gaps| {
        w1.push(wasserstein1_vs_spec(gaps.gaps(), &target, 1000, &reference)?);
        Ok(())
    })?;
    let ratio = w1[0] / w1[steps];
    Ok(vec![
        labelled(ks_test_against(last.gaps(), &target)?, format!("step={steps}")),
        TestReport::from_threshold("w1_decrease_factor", ratio, 5.0, ratio >= 5.0, last.len())
            .with_details(format!("w1_start={} w1_end={}", w1[0], w1[steps])),
    ])
}

fn dirichlet_fixed_point(rng: &RngHandle) -> Result<Vec<TestReport>, CliError> {
    let n = 100_000;
    let a = 2.0;
    let s = SharingSpec::dirichlet_window(vec![-1, 0, 1], vec![a / 3.0; 3]);
    let mut out = Vec::new();

    let f = D::gamma(a, a);
    let st = ExchangeState::from_distribution(&f, n, &rng.substream(0))?;
    let next = step_random_exchange(&st, &s, &rng.substream(1))?;
    out.push(labelled(ks_test_against(next.masses(), &f)?, "one step from gamma(2,2)"));
    out.push(labelled(chi2_independence(&adjacent_pairs(next.masses()), 10)?, "one step from gamma(2,2)"));

    let st = ExchangeState::from_distribution(&D::exponential(1.0), n, &rng.substream(2))?;
    let t = iterate_random_exchange(&st, &s, 200, &[], false, &rng.substream(3))?;
    let fit = gamma_fit_mom(t.final_state.masses())?;
    let inside = |x: f64| (1.9..=2.1).contains(&x);
    out.push(
        TestReport::from_threshold("gamma_fit_shape", fit.shape, 2.0, inside(fit.shape), n)
            .with_details("200 steps from exp(1), band [1.9, 2.1]"),
    );
    out.push(
        TestReport::from_threshold("gamma_fit_rate", fit.rate, 2.0, inside(fit.rate), n)
            .with_details("200 steps from exp(1), band [1.9, 2.1]"),
    );
    Ok(out)
}

fn half_beta() -> SharingSpec {
    SharingSpec::two_diagonal(D::beta(0.5, 0.5))
}

fn return_identity(rng: &RngHandle) -> Result<Vec<TestReport>, CliError> {
    let s = half_beta();
    let mut out = Vec::new();
    for (i, n) in [1usize, 2, 8, 32].into_iter().enumerate() {
        let replicas = if n == 1 { 1_000_000 } else { 10_000 };
        let h = rng.substream(i as u64);
        let rp = estimate_return_probability(&s, n, replicas, &h.substream(0))?;
        let ss = sum_squared_columns(&s, n, 2 * n + 1, replicas, &h.substream(1))?;
        let band = 3.0 * rp.stderr.hypot(ss.stderr);
        out.push(
            TestReport::from_threshold(
                "return_vs_column_squares",
                rp.estimate - ss.estimate,
                band,
                rp.agrees_with(&ss, 3.0),
                replicas,
            )
            .with_details(format!("n={n} return={} squares={}", rp.estimate, ss.estimate)),
        );
        if n == 1 {
            let dev = rp.estimate - 0.75;
            out.push(
                TestReport::from_threshold(
                    "one_step_return",
                    rp.estimate,
                    3.0 * rp.stderr,
                    dev.abs() <= 3.0 * rp.stderr,
                    replicas,
                )
                .with_details("expected 0.75"),
            );
        }
    }
    let early = estimate_return_probability(&s, 4, 10_000, &rng.substream(10))?;
    let late = estimate_return_probability(&s, 64, 10_000, &rng.substream(11))?;
    let gap = early.estimate - late.estimate;
    let band = 3.0 * early.stderr.hypot(late.stderr);
    out.push(
        TestReport::from_threshold("return_decay_4_to_64", gap, band, gap > band, 10_000)
            .with_details(format!("n=4: {} n=64: {}", early.estimate, late.estimate)),
    );
    Ok(out)
}

fn variance_decay(rng: &RngHandle) -> Result<Vec<TestReport>, CliError> {
    let rows = variance_decay_trace(&D::exponential(1.0), &half_beta(), &[1, 4, 16], 64, 10_000, rng)?;
    Ok(rows
        .iter()
        .map(|r| {
            let band = 3.0 * r.ratio_stderr;
            TestReport::from_threshold("variance_ratio", r.ratio, band, (r.ratio - 1.0).abs() <= band, 10_000)
                .with_details(format!("n={} variance={} squares={}", r.step, r.variance, r.sum_squares.estimate))
        })
        .collect())
}

fn euler_sum(rng: &RngHandle) -> Result<Vec<TestReport>, CliError> {
    let mut out = Vec::new();
    let p = 0.5;

    let n = 100;
    let tau0 = sample_gaps(&D::exponential(1.0), 2 * n + 1, &rng.substream(0))?;
    let st = ExchangeState::new(tau0.gaps().to_vec())?;
    let s = SharingSpec::deterministic_window(vec![-1, 0], vec![p, 1.0 - p]);
    let direct = iterate_random_exchange(&st, &s, n as u64, &[], false, &rng.substream(1))?.final_state.masses()[0];
    let closed = euler_sum_value(tau0.gaps(), p, n)?;
    let rel = (direct - closed).abs() / closed.abs();
    out.push(
        TestReport::from_threshold("closed_form_vs_dynamics", rel, 1e-9, rel <= 1e-9, n).with_details(format!("n={n}")),
    );

    let steps = [16usize, 1024];
    let replicas = 200;
    for (i, (law, label, want_big)) in
        [(D::exponential(1.0), "exp(1)", true), (D::pareto_with_mean(1.5, 1.0), "pareto(1.5)", false)]
            .into_iter()
            .enumerate()
    {
        let v = euler_replicas(&law, p, &steps, replicas, &rng.substream(2 + i as u64))?;
        let sd = |k: usize| summarize(&v.iter().map(|r| r[k]).collect::<Vec<_>>()).variance.sqrt();
        let ratio = sd(0) / sd(1);
        let (threshold, pass) = if want_big { (3.0, ratio >= 3.0) } else { (1.5, ratio < 1.5) };
        out.push(
            TestReport::from_threshold("sd_shrink_16_to_1024", ratio, threshold, pass, replicas).with_details(format!(
                "{label} sd16={} sd1024={}",
                sd(0),
                sd(1)
            )),
        );
    }
    Ok(out)
}

fn conservation_determinism(rng: &RngHandle, seed: u64) -> Result<Vec<TestReport>, CliError> {
    let n = 100_000;
    let steps = 1000;
    let s = SharingSpec::dirichlet_window(vec![-1, 0, 1], vec![2.0 / 3.0; 3]);
    let mut st = ExchangeState::from_distribution(&D::exponential(1.0), n, &rng.substream(0))?;
    let dynamics = rng.substream(1);
    let mut worst: f64 = 0.0;
    for t in 1..=steps {
        st = step_random_exchange(&st, &s, &dynamics.substream(t))?;
        worst = worst.max(st.mass_drift());
    }
    let mut out = vec![TestReport::from_threshold("max_relative_mass_drift", worst, 1e-9, worst <= 1e-9, n)
        .with_details(format!("{steps} steps"))];
    for (name, same) in determinism_checks(seed)? {
        out.push(
            TestReport::from_threshold("byte_identical_rerun", same as u8 as f64, 1.0, same, 2).with_details(name),
        );
    }
    Ok(out)
}

/// Runs every command twice with the same seed on small inputs and
/// compares all produced bytes.
pub fn determinism_checks(seed: u64) -> Result<Vec<(&'static str, bool)>, CliError> {
    use crate::commands;
    use crate::config::parse;
    let twice =
        |f: &dyn Fn() -> Result<crate::output::Outputs, CliError>| -> Result<bool, CliError> { Ok(f()? == f()?) };
    let simulate = parse(r#"{"F":{"kind":"exponential","rate":1},"n":5000}"#)?;
    let shift = parse(
        r#"{"model":"division","F":{"kind":"exponential","rate":1},"n":5000,"G":{"kind":"beta","alpha":0.5,"beta":0.5},
            "tests":["ks","lag_correlation","chi2_independence"]}"#,
    )?;
    let iterate = parse(
        r#"{"model":"exchange","F":{"kind":"uniform_interval","low":0,"high":2},"n":5000,"G":{"kind":"beta","alpha":0.5,"beta":0.5},
            "steps":5,"snapshots":[2],"reference":{"kind":"exponential","rate":1},"tests":["ks"]}"#,
    )?;
    let exchange = parse(
        r#"{"F":{"kind":"exponential","rate":1},"sharing":{"kind":"dirichlet_window","offsets":[-1,0,1],"alpha":[1,1,1]},
            "n":5000,"steps":10,"snapshots":[5],"tests":["ks","chi2_independence"],"reference":{"kind":"gamma","shape":3,"rate":3}}"#,
    )?;
    let rwre = parse(
        r#"{"sharing":{"kind":"dirichlet_window","offsets":[-1,0,1],"alpha":[1,1,1]},"steps":[1,4],"F":{"kind":"exponential","rate":1}}"#,
    )?;
    let euler = parse(r#"{"F":{"kind":"exponential","rate":1},"p":0.5,"steps":[4,16]}"#)?;
    Ok(vec![
        ("simulate-renewal", twice(&|| commands::simulate(&simulate, seed))?),
        ("shift", twice(&|| commands::line(&shift, seed, true))?),
        ("iterate", twice(&|| commands::line(&iterate, seed, false))?),
        ("exchange", twice(&|| commands::exchange(&exchange, seed))?),
        ("rwre", twice(&|| commands::rwre(&rwre, seed, 1000))?),
        ("euler", twice(&|| commands::euler(&euler, seed, 100))?),
        ("verify euler", {
            let a = run_suite(Suite::Euler, seed)?;
            a == run_suite(Suite::Euler, seed)?
        }),
    ])
}

/// Full report written by `verify`.
#[derive(Debug, Serialize)]
pub struct VerifyReport<'a> {
    pub suite: String,
    pub seed: u64,
    pub passed: bool,
    pub criteria: &'a [CriterionOutcome],
}
