//! Equal-width histogram plug-in entropy estimates.

use crate::error::{ensure_finite, Error, Result};

/// Plug-in Shannon entropy in nats.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyEstimate {
    pub nats: f64,
    /// All samples fell into a single bin (constant input).
    pub degenerate: bool,
}

fn check_sample(samples: &[f64], bins: usize) -> Result<()> {
    if bins < 2 {
        return Err(Error::InvalidConfig(format!(
            "bins must be at least 2, got {bins}"
        )));
    }
    if samples.len() < 4 * bins {
        return Err(Error::InsufficientData(format!(
            "{} samples for {bins} bins; need at least {}",
            samples.len(),
            4 * bins
        )));
    }
    ensure_finite(samples, "entropy samples")
}

/// Bin index of every sample over `bins` equal-width bins spanning
/// `[min, max]`. `None` when the sample is constant.
pub(crate) fn bin_indices(samples: &[f64], bins: usize) -> Option<Vec<usize>> {
    let (lo, hi) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if hi <= lo {
        return None;
    }
    let width = hi - lo;
    Some(
        samples
            .iter()
            .map(|&v| (((v - lo) / width * bins as f64) as usize).min(bins - 1))
            .collect(),
    )
}

/// `-sum p log p` from raw counts. Counts are sorted first so that equal
/// count multisets give bitwise-equal results.
fn entropy_from_counts(mut counts: Vec<usize>, total: usize) -> f64 {
    counts.retain(|&c| c > 0);
    counts.sort_unstable();
    let n = total as f64;
    let sum: f64 = counts.iter().map(|&c| c as f64 * (c as f64).ln()).sum();
    (n.ln() - sum / n).max(0.0)
}

pub fn shannon_entropy(samples: &[f64], bins: usize) -> Result<EntropyEstimate> {
    check_sample(samples, bins)?;
    let Some(idx) = bin_indices(samples, bins) else {
        return Ok(EntropyEstimate {
            nats: 0.0,
            degenerate: true,
        });
    };
    let mut counts = vec![0; bins];
    for i in idx {
        counts[i] += 1;
    }
    Ok(EntropyEstimate {
        nats: entropy_from_counts(counts, samples.len()),
        degenerate: false,
    })
}

/// `H(x) + H(y) - H(x, y)` with per-argument bin edges and a `bins x bins`
/// joint histogram.
pub fn relative_entropy_pair(x: &[f64], y: &[f64], bins: usize) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            actual: y.len(),
        });
    }
    check_sample(x, bins)?;
    check_sample(y, bins)?;
    let bx = bin_indices(x, bins).ok_or_else(|| Error::Degenerate("constant x marginal".into()))?;
    let by = bin_indices(y, bins).ok_or_else(|| Error::Degenerate("constant y marginal".into()))?;
    let mut cx = vec![0; bins];
    let mut cy = vec![0; bins];
    let mut cxy = vec![0; bins * bins];
    for (&i, &j) in bx.iter().zip(&by) {
        cx[i] += 1;
        cy[j] += 1;
        cxy[i * bins + j] += 1;
    }
    let n = x.len();
    let hx = entropy_from_counts(cx, n);
    let hy = entropy_from_counts(cy, n);
    let hxy = entropy_from_counts(cxy, n);
    Ok(hx + hy - hxy)
}
