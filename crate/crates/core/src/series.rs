//! Stationarizing, scaling and windowing a VRP series.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

/// First differences of a series plus the value needed to rebuild it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifferencedSeries {
    pub residuals: Vec<f64>,
    /// First original observation.
    pub anchor: f64,
}

impl DifferencedSeries {
    /// The original series, `anchor` followed by the cumulative sums.
    pub fn reconstruct(&self) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.residuals.len() + 1);
        out.push(self.anchor);
        out.extend(undifference(&self.residuals, self.anchor)?);
        Ok(out)
    }
}

pub fn difference(values: &[f64]) -> Result<DifferencedSeries> {
    if values.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "differencing needs at least 2 observations, got {}",
            values.len()
        )));
    }
    ensure_finite(values, "series")?;
    Ok(DifferencedSeries {
        residuals: values.windows(2).map(|w| w[1] - w[0]).collect(),
        anchor: values[0],
    })
}

/// `out[k] = last_observed + Σ_{j<=k} increments[j]`, with compensated
/// summation so long horizons do not drift.
pub fn undifference(increments: &[f64], last_observed: f64) -> Result<Vec<f64>> {
    ensure_finite(increments, "increments")?;
    if !last_observed.is_finite() {
        return Err(Error::NonFinite("last observed value".into()));
    }
    let mut sum = last_observed;
    let mut comp = 0.0;
    Ok(increments
        .iter()
        .map(|&x| {
            // Neumaier's variant of Kahan summation.
            let t = sum + x;
            if sum.abs() >= x.abs() {
                comp += (sum - t) + x;
            } else {
                comp += (x - t) + sum;
            }
            sum = t;
            sum + comp
        })
        .collect())
}

/// Min-max scaling onto `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormParams {
    pub min: f64,
    pub max: f64,
}

impl NormParams {
    pub fn fit(values: &[f64]) -> Result<Self> {
        ensure_finite(values, "normalizer input")?;
        let (min, max) = values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        Self::new(min, max)
    }

    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite()) {
            return Err(Error::NonFinite("normalizer bounds".into()));
        }
        if !(max > min) {
            return Err(Error::Degenerate(format!(
                "cannot normalize: max ({max}) must exceed min ({min})"
            )));
        }
        Ok(Self { min, max })
    }

    pub fn range(&self) -> f64 {
        self.max - self.min
    }

    /// Values outside `[min, max]` map outside `[0, 1]`; they are not clamped.
    pub fn apply(&self, x: f64) -> f64 {
        (x - self.min) / self.range()
    }

    pub fn invert(&self, n: f64) -> f64 {
        n * self.range() + self.min
    }

    /// Maps a difference of normalized values back to original units.
    pub fn invert_delta(&self, dn: f64) -> f64 {
        dn * self.range()
    }
}

/// Lagged input windows with one-step targets, normalized and split
/// chronologically into a training block followed by a test block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternSet {
    pub lag: usize,
    pub norm: NormParams,
    /// Rows `[0, split_index)` are training patterns.
    pub split_index: usize,
    /// Row-major, one row of `lag` normalized residuals per pattern.
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
}

impl PatternSet {
    pub fn n_patterns(&self) -> usize {
        self.targets.len()
    }

    pub fn train_inputs(&self) -> &[Vec<f64>] {
        &self.inputs[..self.split_index]
    }

    pub fn train_targets(&self) -> &[f64] {
        &self.targets[..self.split_index]
    }

    pub fn test_inputs(&self) -> &[Vec<f64>] {
        &self.inputs[self.split_index..]
    }

    pub fn test_targets(&self) -> &[f64] {
        &self.targets[self.split_index..]
    }

    /// Number of test-block input values outside `[0, 1]`.
    pub fn out_of_range_test_inputs(&self) -> usize {
        self.test_inputs()
            .iter()
            .flatten()
            .filter(|v| !(0.0..=1.0).contains(*v))
            .count()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let set: PatternSet = serde_json::from_str(text)?;
        set.validate()?;
        Ok(set)
    }

    fn validate(&self) -> Result<()> {
        NormParams::new(self.norm.min, self.norm.max)?;
        if self.inputs.len() != self.targets.len() {
            return Err(Error::DimensionMismatch {
                expected: self.targets.len(),
                actual: self.inputs.len(),
            });
        }
        if let Some(row) = self.inputs.iter().find(|r| r.len() != self.lag) {
            return Err(Error::DimensionMismatch {
                expected: self.lag,
                actual: row.len(),
            });
        }
        if !(0 < self.split_index && self.split_index < self.n_patterns()) {
            return Err(Error::InvalidConfig(format!(
                "split index {} outside (0, {})",
                self.split_index,
                self.n_patterns()
            )));
        }
        Ok(())
    }
}

/// Raw (unnormalized) sliding windows: row `i` is `residuals[i..i+p]` and its
/// target is `residuals[i+p]`, giving `len - p` patterns.
pub fn lag_windows(residuals: &[f64], p: usize) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    if p == 0 {
        return Err(Error::InvalidConfig("lag must be at least 1".into()));
    }
    if residuals.len() <= p {
        return Err(Error::InsufficientData(format!(
            "{} residuals cannot form a single window of lag {p}",
            residuals.len()
        )));
    }
    let inputs = residuals.windows(p + 1).map(|w| w[..p].to_vec()).collect();
    let targets = residuals[p..].to_vec();
    Ok((inputs, targets))
}

/// Chronological training size for `n` patterns.
pub fn split_index_for(n_patterns: usize, train_fraction: f64) -> usize {
    (train_fraction * n_patterns as f64).round() as usize
}

pub fn extract_patterns(residuals: &[f64], p: usize, train_fraction: f64) -> Result<PatternSet> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    ensure_finite(residuals, "residuals")?;
    if p >= 1 && residuals.len() <= p + 1 {
        return Err(Error::InsufficientData(format!(
            "need more than {} residuals for lag {p}, got {}",
            p + 1,
            residuals.len()
        )));
    }
    let (raw_inputs, raw_targets) = lag_windows(residuals, p)?;
    let n = raw_targets.len();
    let split_index = split_index_for(n, train_fraction);
    if split_index == 0 || split_index >= n {
        return Err(Error::InsufficientData(format!(
            "{n} patterns cannot be split at fraction {train_fraction} (split index {split_index})"
        )));
    }

    // The training block touches residuals[0 .. split_index + p].
    let norm = NormParams::fit(&residuals[..split_index + p])?;
    let inputs: Vec<Vec<f64>> = raw_inputs
        .iter()
        .map(|row| row.iter().map(|&v| norm.apply(v)).collect())
        .collect();
    let targets = raw_targets.iter().map(|&v| norm.apply(v)).collect();

    let set = PatternSet {
        lag: p,
        norm,
        split_index,
        inputs,
        targets,
    };
    let outside = set.out_of_range_test_inputs();
    if outside > 0 {
        log::info!(
            "{outside} of {} test inputs fall outside the training range [0, 1]",
            (n - split_index) * p
        );
    }
    Ok(set)
}

/// Sample autocorrelation for lags `0..=max_lag` (biased autocovariance,
/// divided by `n`).
pub fn acf(values: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    if values.len() <= max_lag {
        return Err(Error::InsufficientData(format!(
            "acf up to lag {max_lag} needs more than {max_lag} values, got {}",
            values.len()
        )));
    }
    ensure_finite(values, "acf input")?;
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let c0: f64 = centered.iter().map(|v| v * v).sum();
    if c0 <= 0.0 {
        return Err(Error::Degenerate("acf of a constant series".into()));
    }
    Ok((0..=max_lag)
        .map(|k| {
            if k == 0 {
                1.0
            } else {
                centered[k..]
                    .iter()
                    .zip(&centered)
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
                    / c0
            }
        })
        .collect())
}
