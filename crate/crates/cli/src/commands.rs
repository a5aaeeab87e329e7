// Licensed under the Apache License, Version 2.0 <LICENSE-APACHE or
// https://www.apache.org/licenses/LICENSE-2.0> or the MIT license
// <LICENSE-MIT or https://opensource.org/licenses/MIT>, at your
// option. This file may not be copied, modified, or distributed
// except according to those terms.

//! The subcommands as pure functions from a validated config and a seed to
//! [`Outputs`].
//!
//! Stream layout under `RngHandle::new(seed)`: substream 0 draws the input
//! sample, 1 the dynamics, 2 the reference draws and later ones any
//! auxiliary estimate.

use ndshift::exchange::{apply_division_shift, iterate_exchange_observed, iterate_random_exchange};
use ndshift::renewal::{gaps_from_csv, gaps_to_csv, gaps_to_points, points_to_gaps, sample_gaps};
use ndshift::rwre::{
    estimate_return_probability, sum_squared_columns, variance_decay_trace, z_transition_distribution,
};
use ndshift::stats::{
    chi2_independence, correlation_band, gamma_fit_mom, ks_test_against, lag_correlation, summarize,
    wasserstein1_vs_spec,
};
use ndshift::{DistributionSpec, ExchangeState, GapSequence, RngHandle, TestReport};
use serde_json::json;

use crate::config::{invalid, EulerConfig, ExchangeConfig, LineConfig, Model, RwreConfig, SimulateConfig, TestKind};
use crate::error::CliError;
use crate::output::{column_csv, Csv, Outputs};

const INPUT: u64 = 0;
const DYNAMICS: u64 = 1;
const REFERENCE: u64 = 2;
const AUXILIARY: u64 = 3;

fn to_json(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string(v).expect("JSON value serialises");
    s.push('\n');
    s
}

/// Disjoint adjacent pairs `(x_0, x_1), (x_2, x_3), ...`.
pub fn adjacent_pairs(xs: &[f64]) -> Vec<(f64, f64)> {
    xs.chunks_exact(2).map(|w| (w[0], w[1])).collect()
}

/// Runs the requested checks on `data`, tagging each report with `seed`.
pub fn run_tests(
    kinds: &[TestKind],
    data: &[f64],
    reference: Option<&DistributionSpec>,
    bins: usize,
    seed: u64,
) -> Result<Vec<TestReport>, CliError> {
    let mut out = Vec::new();
    for kind in kinds {
        match kind {
            TestKind::Ks => {
                let r = reference.ok_or_else(|| invalid("KS needs a reference law"))?;
                out.push(ks_test_against(data, r)?.with_details(format!("reference={}", r.name())));
            }
            TestKind::LagCorrelation => {
                let band = correlation_band(data.len());
                for lag in 1..=3 {
                    let rho = lag_correlation(data, lag)?;
                    out.push(TestReport::from_threshold(
                        format!("lag{lag}_correlation"),
                        rho,
                        band,
                        rho.abs() < band,
                        data.len(),
                    ));
                }
            }
            TestKind::Chi2Independence => out.push(chi2_independence(&adjacent_pairs(data), bins)?),
        }
    }
    Ok(out.into_iter().map(|r| r.with_seed(seed)).collect())
}

pub fn simulate(cfg: &SimulateConfig, seed: u64) -> Result<Outputs, CliError> {
    cfg.validate()?;
    let gaps = sample_gaps(&cfg.f, cfg.n, &RngHandle::new(seed).substream(INPUT))?;
    let s = summarize(gaps.gaps());
    let mut out = Outputs::default();
    out.file("gaps.csv", gaps_to_csv(&gaps));
    out.stdout = to_json(&json!({ "n": s.n, "mean": s.mean, "var": s.variance, "seed": seed }));
    Ok(out)
}

fn line_input(cfg: &LineConfig, rng: &RngHandle) -> Result<GapSequence, CliError> {
    match (&cfg.input, &cfg.f, cfg.n) {
        (Some(path), _, _) => {
            let text =
                std::fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
            let g = gaps_from_csv(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
            if g.len() < cfg.steps() + 2 {
                return Err(invalid(format!(
                    "{} has {} gaps, too few for {} steps",
                    path.display(),
                    g.len(),
                    cfg.steps()
                )));
            }
            Ok(g)
        }
        (None, Some(f), Some(n)) => Ok(sample_gaps(f, n, &rng.substream(INPUT))?),
        _ => Err(invalid("give either `F` and `n` or `input`")),
    }
}

/// `shift` (one step) and `iterate` (`steps` steps) of either line model.
///
/// Writes `trace.csv` (per-step size, mean, variance, W1 and KS p-value
/// against the reference, NaN below 100 gaps), `gaps.csv` with the final gaps, snapshots and
/// `reports.jsonl`. With `ks` requested, a KS report is emitted for every
/// step after the first.
pub fn line(cfg: &LineConfig, seed: u64, single: bool) -> Result<Outputs, CliError> {
    cfg.validate(single)?;
    let rng = RngHandle::new(seed);
    let start = line_input(cfg, &rng)?;
    let steps = cfg.steps();
    let reference = cfg.reference().cloned();
    let ref_rng = rng.substream(REFERENCE);
    let per_step_ks = cfg.tests.contains(&TestKind::Ks);

    let mut trace = Csv::new(&["step", "n", "mean", "var", "w1", "ks_p"]);
    let mut out = Outputs::default();
    let mut reports = Vec::new();
    let mut observe = |step: usize, g: &GapSequence| -> ndshift::Result<()> {
        let s = summarize(g.gaps());
        let (w1, ks_p) = match &reference {
            // Both distances need at least 100 points.
            Some(r) if g.len() >= 100 || per_step_ks => {
                let w1 = wasserstein1_vs_spec(g.gaps(), r, cfg.w1_levels.min(g.len()), &ref_rng)?;
                let ks = ks_test_against(g.gaps(), r)?;
                let p = ks.p_value.unwrap_or(f64::NAN);
                if per_step_ks && step > 0 {
                    reports.push(ks.with_seed(seed).with_details(format!("step={step} reference={}", r.name())));
                }
                (w1, p)
            }
            _ => (f64::NAN, f64::NAN),
        };
        trace.row(&[&step, &s.n, &s.mean, &s.variance, &w1, &ks_p]);
        if cfg.snapshots.contains(&step) {
            out.file(format!("gaps_step{step}.csv"), gaps_to_csv(g));
        }
        Ok(())
    };

    let dynamics = rng.substream(DYNAMICS);
    let last = match cfg.model {
        Model::Exchange => iterate_exchange_observed(&start, &cfg.g, steps, &dynamics, &mut observe)?,
        Model::Division => {
            let mut points = gaps_to_points(&start)?;
            observe(0, &start)?;
            for step in 1..=steps {
                points = apply_division_shift(&points, &cfg.g, &dynamics.substream(step as u64))?;
                observe(step, &points_to_gaps(&points)?)?;
            }
            points_to_gaps(&points)?
        }
    };
    let other: Vec<TestKind> = cfg.tests.iter().copied().filter(|k| *k != TestKind::Ks).collect();
    reports.extend(run_tests(&other, last.gaps(), reference.as_ref(), cfg.bins, seed)?);

    out.file("trace.csv", trace.finish());
    out.file("gaps.csv", gaps_to_csv(&last));
    out.reports(&reports);
    let s = summarize(last.gaps());
    out.stdout = to_json(&json!({
        "model": match cfg.model { Model::Exchange => "exchange", Model::Division => "division" },
        "steps": steps,
        "n": s.n,
        "mean": s.mean,
        "var": s.variance,
        "reports": reports.len(),
        "failed": reports.iter().filter(|r| !r.passed()).count(),
        "seed": seed,
    }));
    Ok(out)
}

/// Random exchange on the torus: `summaries.csv`, final `masses.csv`,
/// snapshots and `reports.jsonl`.
pub fn exchange(cfg: &ExchangeConfig, seed: u64) -> Result<Outputs, CliError> {
    cfg.validate()?;
    let rng = RngHandle::new(seed);
    let st = ExchangeState::from_distribution(&cfg.f, cfg.n, &rng.substream(INPUT))?;
    let traj = iterate_random_exchange(&st, &cfg.sharing, cfg.steps, &cfg.snapshots, true, &rng.substream(DYNAMICS))?;
    let mut out = Outputs::default();
    let mut summaries = Csv::new(&["step", "mean", "var", "total_mass"]);
    for s in &traj.summaries {
        summaries.row(&[&s.step, &s.mean, &s.var, &s.total_mass]);
    }
    out.file("summaries.csv", summaries.finish());
    for snap in &traj.snapshots {
        out.file(format!("masses_step{}.csv", snap.step()), column_csv("mass", snap.masses()));
    }
    let last = &traj.final_state;
    out.file("masses.csv", column_csv("mass", last.masses()));
    let reports = run_tests(&cfg.tests, last.masses(), Some(cfg.reference()), cfg.bins, seed)?;
    out.reports(&reports);
    let fit = gamma_fit_mom(last.masses()).ok();
    let s = last.summary();
    out.stdout = to_json(&json!({
        "steps": last.step(),
        "n": last.len(),
        "mean": s.mean,
        "var": s.var,
        "total_mass": s.total_mass,
        "mass_drift": last.mass_drift(),
        "gamma_fit": fit.map(|f| json!({ "shape": f.shape, "rate": f.rate })),
        "reports": reports.len(),
        "failed": reports.iter().filter(|r| !r.passed()).count(),
        "seed": seed,
    }));
    Ok(out)
}

/// Return probabilities against column sums of squares at each `n`, the
/// one-step law of the difference chain, and the variance-decay trace when
/// an initial law is given.
pub fn rwre(cfg: &RwreConfig, seed: u64, replicas: usize) -> Result<Outputs, CliError> {
    cfg.validate(replicas)?;
    let rng = RngHandle::new(seed);
    let torus = cfg.torus();
    let mut table =
        Csv::new(&["n", "return_probability", "return_stderr", "sum_squares", "sum_squares_stderr", "agree_3sigma"]);
    let mut reports = Vec::new();
    for &n in &cfg.steps {
        let rp = estimate_return_probability(&cfg.sharing, n, replicas, &rng.substream(DYNAMICS).substream(n as u64))?;
        let ss = sum_squared_columns(&cfg.sharing, n, torus, replicas, &rng.substream(REFERENCE).substream(n as u64))?;
        let agree = rp.agrees_with(&ss, 3.0);
        table.row(&[&n, &rp.estimate, &rp.stderr, &ss.estimate, &ss.stderr, &agree]);
        reports.push(
            TestReport::from_threshold(
                "return_identity",
                rp.estimate - ss.estimate,
                3.0 * rp.stderr.hypot(ss.stderr),
                agree,
                replicas,
            )
            .with_seed(seed)
            .with_details(format!("n={n}")),
        );
    }
    let mut out = Outputs::default();
    out.file("rwre.csv", table.finish());
    let aux = rng.substream(AUXILIARY);
    let transitions = json!({
        "at_zero": z_transition_distribution(true, &cfg.sharing, &aux)?,
        "off_zero": z_transition_distribution(false, &cfg.sharing, &aux)?,
    });
    out.file("transitions.json", to_json(&transitions));
    if let Some(f) = &cfg.f {
        let rows = variance_decay_trace(f, &cfg.sharing, &cfg.steps, torus, replicas, &aux.substream(1))?;
        let mut v = Csv::new(&[
            "n",
            "variance",
            "variance_stderr",
            "sum_squares",
            "sum_squares_stderr",
            "ratio",
            "ratio_stderr",
        ]);
        for r in &rows {
            v.row(&[
                &r.step,
                &r.variance,
                &r.variance_stderr,
                &r.sum_squares.estimate,
                &r.sum_squares.stderr,
                &r.ratio,
                &r.ratio_stderr,
            ]);
            let within = (r.ratio - 1.0).abs() <= 3.0 * r.ratio_stderr;
            reports.push(
                TestReport::from_threshold("variance_ratio", r.ratio, 3.0 * r.ratio_stderr, within, replicas)
                    .with_seed(seed)
                    .with_details(format!("n={}", r.step)),
            );
        }
        out.file("variance.csv", v.finish());
    }
    out.reports(&reports);
    out.stdout = to_json(&json!({
        "steps": cfg.steps,
        "replicas": replicas,
        "torus": torus,
        "reports": reports.len(),
        "failed": reports.iter().filter(|r| !r.passed()).count(),
        "seed": seed,
    }));
    Ok(out)
}

/// Across-replica mean and standard deviation of the Euler sum at each `n`.
/// Replica `r` draws its input from substream `r` of the input stream.
pub fn euler(cfg: &EulerConfig, seed: u64, replicas: usize) -> Result<Outputs, CliError> {
    cfg.validate(replicas)?;
    let values = euler_replicas(&cfg.f, cfg.p, &cfg.steps, replicas, &RngHandle::new(seed).substream(INPUT))?;
    let mut table = Csv::new(&["n", "mean", "sd", "replicas"]);
    let mut rows = Vec::new();
    for (i, &n) in cfg.steps.iter().enumerate() {
        let col: Vec<f64> = values.iter().map(|v| v[i]).collect();
        let s = summarize(&col);
        table.row(&[&n, &s.mean, &s.variance.sqrt(), &replicas]);
        rows.push(json!({ "n": n, "mean": s.mean, "sd": s.variance.sqrt() }));
    }
    let mut out = Outputs::default();
    out.file("euler.csv", table.finish());
    out.stdout = to_json(&json!({ "p": cfg.p, "replicas": replicas, "rows": rows, "seed": seed }));
    Ok(out)
}

/// `values[r][i]`: Euler sum for replica `r` at `steps[i]`.
pub fn euler_replicas(
    f: &DistributionSpec,
    p: f64,
    steps: &[usize],
    replicas: usize,
    rng: &RngHandle,
) -> Result<Vec<Vec<f64>>, CliError> {
    let len = steps.iter().copied().max().unwrap_or(0) + 1;
    (0..replicas)
        .map(|r| {
            let tau0 = sample_gaps(f, len.max(2), &rng.substream(r as u64))?;
            steps
                .iter()
                .map(|&n| Ok(ndshift::exchange::euler_sum_value(tau0.gaps(), p, n)?))
                .collect::<Result<Vec<_>, CliError>>()
        })
        .collect()
}
