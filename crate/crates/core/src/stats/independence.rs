// Licensed under the Apache License, Version 2.0 <LICENSE-APACHE or
// https://www.apache.org/licenses/LICENSE-2.0> or the MIT license
// <LICENSE-MIT or https://opensource.org/licenses/MIT>, at your
// option. This file may not be copied, modified, or distributed
// except according to those terms.

use super::{TestReport, SIGNIFICANCE};
use crate::error::{Error, Result};
use crate::specfun::regularized_gamma_q;

const MIN_EXPECTED_PER_CELL: f64 = 20.0;

/// Pearson correlation between `series[..n - lag]` and `series[lag..]`.
pub fn lag_correlation(series: &[f64], lag: usize) -> Result<f64> {
    if series.len() <= lag + 30 {
        return Err(Error::TooShort { len: series.len(), needed: lag + 31 });
    }
    if series.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("lag correlation input".into()));
    }
    let n = series.len() - lag;
    let a = &series[..n];
    let b = &series[lag..];
    let ma = a.iter().sum::<f64>() / n as f64;
    let mb = b.iter().sum::<f64>() / n as f64;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::Undefined("correlation of a zero-variance series".into()));
    }
    if lag == 0 {
        return Ok(1.0);
    }
    Ok(sab / (saa * sbb).sqrt())
}

// Bin index of each value by rank: equiprobable bins over the marginal
// quantiles.
fn rank_bins(values: impl Iterator<Item = f64>, n: usize, bins: usize) -> Vec<usize> {
    let mut idx: Vec<(f64, usize)> = values.enumerate().map(|(i, v)| (v, i)).collect();
    idx.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut out = vec![0; n];
    for (rank, &(_, i)) in idx.iter().enumerate() {
        out[i] = rank * bins / n;
    }
    out
}

/// Chi-square test of independence on a `bins x bins` contingency table
/// built from marginal-quantile bins, at the default significance.
pub fn chi2_independence(pairs: &[(f64, f64)], bins: usize) -> Result<TestReport> {
    chi2_independence_at(pairs, bins, SIGNIFICANCE)
}

pub fn chi2_independence_at(pairs: &[(f64, f64)], bins: usize, significance: f64) -> Result<TestReport> {
    if bins < 2 {
        return Err(Error::domain("chi-square independence needs at least 2 bins"));
    }
    let n = pairs.len();
    let expected = n as f64 / (bins * bins) as f64;
    if expected < MIN_EXPECTED_PER_CELL {
        return Err(Error::InsufficientData(format!(
            "{n} pairs give {expected:.1} expected per cell with {bins} bins; need {MIN_EXPECTED_PER_CELL}"
        )));
    }
    if pairs.iter().any(|(x, y)| x.is_nan() || y.is_nan()) {
        return Err(Error::domain("NaN in chi-square input"));
    }
    let bx = rank_bins(pairs.iter().map(|p| p.0), n, bins);
    let by = rank_bins(pairs.iter().map(|p| p.1), n, bins);
    let mut table = vec![0usize; bins * bins];
    for (i, j) in bx.into_iter().zip(by) {
        table[i * bins + j] += 1;
    }
    // Row and column totals differ from n/bins by at most one.
    let mut rows = vec![0usize; bins];
    let mut cols = vec![0usize; bins];
    for i in 0..bins {
        for j in 0..bins {
            rows[i] += table[i * bins + j];
            cols[j] += table[i * bins + j];
        }
    }
    let mut stat = 0.0;
    for i in 0..bins {
        for j in 0..bins {
            let e = rows[i] as f64 * cols[j] as f64 / n as f64;
            let d = table[i * bins + j] as f64 - e;
            stat += d * d / e;
        }
    }
    let df = ((bins - 1) * (bins - 1)) as f64;
    let p = regularized_gamma_q(0.5 * df, 0.5 * stat)?;
    Ok(TestReport::from_p_value("chi2_independence", stat, p, significance, n)
        .with_details(format!("bins = {bins}, df = {df}")))
}
