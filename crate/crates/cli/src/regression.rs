//! Log-log least squares on per-`n` means.

use std::collections::BTreeMap;

use crate::records::{ExperimentRecord, ValueKind};

/// Fit of `ln(mean value) = intercept + slope * ln(n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressionSummary {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub n_points: usize,
}

/// Ordinary least squares of `y` on `x`. Needs at least two distinct `x`.
pub fn ols(x: &[f64], y: &[f64]) -> Option<RegressionSummary> {
    let n = x.len();
    if n != y.len() || n < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = b - intercept - slope * a;
            r * r
        })
        .sum();
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    Some(RegressionSummary {
        slope,
        intercept,
        r2,
        n_points: n,
    })
}

/// Per-`n` sample statistics: `(n, mean, std, count)`, with the unbiased
/// standard deviation (0 for a single repetition).
pub fn per_n_stats<'a>(records: impl IntoIterator<Item = &'a ExperimentRecord>) -> Vec<(u64, f64, f64, usize)> {
    let mut groups: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    for r in records {
        groups.entry(r.n_or_k).or_default().push(r.value);
    }
    groups
        .into_iter()
        .map(|(n, v)| {
            let c = v.len();
            let mean = v.iter().sum::<f64>() / c as f64;
            let var = if c > 1 {
                v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (c - 1) as f64
            } else {
                0.0
            };
            (n, mean, var.sqrt(), c)
        })
        .collect()
}

/// Regression of `ln(mean)` on `ln(n)` over the records of one method.
/// Means that are not strictly positive are skipped.
pub fn loglog_regression<'a>(records: impl IntoIterator<Item = &'a ExperimentRecord>) -> Option<RegressionSummary> {
    let stats = per_n_stats(records.into_iter().filter(|r| r.value_kind == ValueKind::OtPowP));
    let (x, y): (Vec<f64>, Vec<f64>) = stats
        .iter()
        .filter(|s| s.1 > 0.0 && s.0 > 0)
        .map(|s| ((s.0 as f64).ln(), s.1.ln()))
        .unzip();
    ols(&x, &y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x = [0.0, 1.0, 2.0, 5.0];
        let y: Vec<f64> = x.iter().map(|a| 3.0 - 0.5 * a).collect();
        let s = ols(&x, &y).unwrap();
        assert!((s.slope + 0.5).abs() < 1e-12);
        assert!((s.intercept - 3.0).abs() < 1e-12);
        assert!((s.r2 - 1.0).abs() < 1e-12);
        assert_eq!(s.n_points, 4);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(ols(&[1.0], &[1.0]).is_none());
        assert!(ols(&[1.0, 1.0], &[1.0, 2.0]).is_none());
    }
}
