//! Stationarity testing and forecast evaluation statistics.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::special::student_t_two_sided;

/// Level-stationarity critical values (Kwiatkowski et al., 1992, Table 1).
pub const KPSS_LEVEL_CRITICAL: [(f64, f64); 4] =
    [(0.10, 0.347), (0.05, 0.463), (0.025, 0.574), (0.01, 0.739)];

pub const SIGNIFICANCE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KpssResult {
    pub statistic: f64,
    pub truncation_lag: usize,
    /// Keyed by significance level, e.g. `"0.05"`.
    pub critical_values: BTreeMap<String, f64>,
    pub reject_at_5pct: bool,
}

impl KpssResult {
    pub fn critical_value(&self, level: f64) -> Option<f64> {
        self.critical_values.get(&level_key(level)).copied()
    }
}

fn level_key(level: f64) -> String {
    format!("{level}")
}

/// Bartlett truncation lag `floor(4 (T/100)^(1/4))`.
pub fn kpss_truncation_lag(n: usize) -> usize {
    (4.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize
}

/// KPSS test with a constant-only regression (null: level stationarity).
pub fn kpss_level(values: &[f64]) -> Result<KpssResult> {
    let n = values.len();
    if n < 20 {
        return Err(Error::InsufficientData(format!(
            "KPSS needs at least 20 observations, got {n}"
        )));
    }
    ensure_finite(values, "KPSS input")?;
    let t = n as f64;
    let mean = values.iter().sum::<f64>() / t;
    let e: Vec<f64> = values.iter().map(|v| v - mean).collect();

    let mut partial = 0.0;
    let mut sum_sq_partial = 0.0;
    for v in &e {
        partial += v;
        sum_sq_partial += partial * partial;
    }

    let lag = kpss_truncation_lag(n);
    let autocov = |j: usize| e[j..].iter().zip(&e).map(|(a, b)| a * b).sum::<f64>() / t;
    let gamma0 = autocov(0);
    if gamma0 <= 0.0 {
        return Err(Error::Degenerate("KPSS on a constant series".into()));
    }
    let long_run = gamma0
        + 2.0
            * (1..=lag)
                .map(|j| (1.0 - j as f64 / (lag as f64 + 1.0)) * autocov(j))
                .sum::<f64>();
    if !(long_run > 0.0) {
        return Err(Error::Degenerate(
            "KPSS long-run variance is not positive".into(),
        ));
    }

    let statistic = sum_sq_partial / (t * t * long_run);
    let critical_values: BTreeMap<String, f64> = KPSS_LEVEL_CRITICAL
        .iter()
        .map(|(a, c)| (level_key(*a), *c))
        .collect();
    let five = KPSS_LEVEL_CRITICAL[1].1;
    Ok(KpssResult {
        statistic,
        truncation_lag: lag,
        critical_values,
        reject_at_5pct: statistic > five,
    })
}

/// Forecast error summary. `r_squared` is `None` when the actuals have zero
/// variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats {
    pub mean_error: f64,
    pub mean_squared_error: f64,
    pub r_squared: Option<f64>,
}

/// Errors are `actual - predicted`.
pub fn error_stats(actual: &[f64], predicted: &[f64]) -> Result<ErrorStats> {
    if actual.len() != predicted.len() {
        return Err(Error::DimensionMismatch {
            expected: actual.len(),
            actual: predicted.len(),
        });
    }
    if actual.is_empty() {
        return Err(Error::InsufficientData(
            "error statistics of an empty sample".into(),
        ));
    }
    ensure_finite(actual, "actual values")?;
    ensure_finite(predicted, "predicted values")?;
    let n = actual.len() as f64;
    let mean_actual = actual.iter().sum::<f64>() / n;
    let (mut sum_e, mut sse, mut sst) = (0.0, 0.0, 0.0);
    for (a, p) in actual.iter().zip(predicted) {
        let e = a - p;
        sum_e += e;
        sse += e * e;
        sst += (a - mean_actual).powi(2);
    }
    Ok(ErrorStats {
        mean_error: sum_e / n,
        mean_squared_error: sse / n,
        r_squared: (sst > 0.0).then(|| 1.0 - sse / sst),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub t_statistic: f64,
    pub degrees_of_freedom: f64,
    pub p_value: f64,
    pub reject_at_5pct: bool,
}

impl TTestResult {
    fn new(t_statistic: f64, degrees_of_freedom: f64) -> Self {
        let p_value = student_t_two_sided(t_statistic, degrees_of_freedom);
        Self {
            t_statistic,
            degrees_of_freedom,
            p_value,
            reject_at_5pct: p_value < SIGNIFICANCE,
        }
    }
}

fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Welch's unequal-variance t-test of equal means, two-sided.
pub fn two_sample_ttest(a: &[f64], b: &[f64]) -> Result<TTestResult> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::InsufficientData(
            "two-sample t-test needs at least 2 values per sample".into(),
        ));
    }
    ensure_finite(a, "first sample")?;
    ensure_finite(b, "second sample")?;
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (sa, sb) = (va / na, vb / nb);
    let se2 = sa + sb;
    if se2 <= 0.0 {
        return Err(Error::Degenerate("both samples have zero variance".into()));
    }
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2 / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    Ok(TTestResult::new(t, df))
}

/// One-sample t-test of `a - b` against zero mean, two-sided.
pub fn paired_ttest(a: &[f64], b: &[f64]) -> Result<TTestResult> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(Error::InsufficientData(
            "paired t-test needs at least 2 pairs".into(),
        ));
    }
    ensure_finite(a, "first sample")?;
    ensure_finite(b, "second sample")?;
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n = d.len() as f64;
    let (md, vd) = mean_var(&d);
    let df = n - 1.0;
    if vd <= 0.0 {
        let t = if md == 0.0 {
            0.0
        } else {
            md.signum() * f64::INFINITY
        };
        return Ok(TTestResult::new(t, df));
    }
    Ok(TTestResult::new(md / (vd / n).sqrt(), df))
}
