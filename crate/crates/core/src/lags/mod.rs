//! Entropy estimates on lagged data and the choice of the window length `p`.
//!
//! The profile `delta[p]` measures how much the last `p` residuals tell about
//! the next one. Two estimators are available:
//!
//! - [`ProfileEstimator::JointKnn`] (default): k-nearest-neighbour estimate of
//!   the mutual information between the target and the whole `p`-dimensional
//!   window.
//! - [`ProfileEstimator::PairwiseHistogram`]: running mean over `k = 1..=p` of
//!   the histogram mutual information between the series and its lag-`k`
//!   shift.
//!
//! The window is chosen as the smallest `p` after which no further lag adds
//! information beyond `max(stabilization * max|delta[..=q]|, noise_floor)`.
//! The noise floor comes from the same estimator run on a shuffled copy of the
//! series, where every gain is pure estimator noise.

mod histogram;
mod knn;

use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

pub use histogram::{relative_entropy_pair, shannon_entropy, EntropyEstimate};

/// Fixed seed for the tie-breaking jitter and the shuffled surrogate, so a
/// profile depends only on its inputs.
const SURROGATE_SEED: u64 = 0x6c61_6773;
/// Jitter amplitude relative to a unit-variance series.
const TIE_JITTER: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum ProfileEstimator {
    JointKnn { neighbors: usize },
    PairwiseHistogram { bins: usize },
}

impl Default for ProfileEstimator {
    fn default() -> Self {
        ProfileEstimator::JointKnn { neighbors: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileConfig {
    pub max_lag: usize,
    /// Relative gain below which the profile counts as stable.
    pub stabilization: f64,
    /// Multiple of the surrogate gain RMS used as the absolute noise floor.
    /// Zero disables the floor.
    pub noise_floor_multiplier: f64,
    pub estimator: ProfileEstimator,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        Self {
            max_lag: 12,
            stabilization: 0.02,
            noise_floor_multiplier: 3.0,
            estimator: ProfileEstimator::default(),
        }
    }
}

impl ProfileConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_lag == 0 {
            return Err(Error::InvalidConfig("max_lag must be at least 1".into()));
        }
        if !(self.stabilization >= 0.0 && self.stabilization.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "stabilization threshold must be finite and non-negative, got {}",
                self.stabilization
            )));
        }
        if !(self.noise_floor_multiplier >= 0.0 && self.noise_floor_multiplier.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "noise floor multiplier must be finite and non-negative, got {}",
                self.noise_floor_multiplier
            )));
        }
        match self.estimator {
            ProfileEstimator::JointKnn { neighbors: 0 } => {
                Err(Error::InvalidConfig("neighbors must be at least 1".into()))
            }
            ProfileEstimator::PairwiseHistogram { bins } if bins < 2 => Err(Error::InvalidConfig(
                format!("bins must be at least 2, got {bins}"),
            )),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyProfile {
    /// `1..=max_lag`.
    pub lags: Vec<usize>,
    /// Nats, one value per entry of `lags`.
    pub delta: Vec<f64>,
    pub selected_lag: usize,
    pub noise_floor: f64,
    pub estimator: ProfileEstimator,
}

impl EntropyProfile {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = Vec::new();
        self.write_csv_to(&mut out)
            .map_err(|e| Error::io(path, e))?;
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    pub fn write_csv_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "lag,delta")?;
        for (lag, d) in self.lags.iter().zip(&self.delta) {
            writeln!(w, "{lag},{}", crate::ingest::format_value(*d))?;
        }
        Ok(())
    }
}

/// Smallest `p` such that every later gain `delta[q + 1] - delta[q]`,
/// `q >= p`, stays below `max(stabilization * max|delta[..=q]|, noise_floor)`.
/// `delta[0]` is the value for lag 1.
pub fn select_lag(delta: &[f64], stabilization: f64, noise_floor: f64) -> usize {
    let l = delta.len();
    let stable_after = |q: usize| {
        let scale = delta[..q].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let gain = delta[q] - delta[q - 1];
        gain <= 0.0 || gain < (stabilization * scale).max(noise_floor)
    };
    (1..=l).find(|&p| (p..l).all(stable_after)).unwrap_or(l)
}

/// Profile over lags `1..=config.max_lag` with the selected window length.
pub fn entropy_profile(residuals: &[f64], config: &ProfileConfig) -> Result<EntropyProfile> {
    config.validate()?;
    ensure_finite(residuals, "residuals")?;
    let n = residuals.len();
    let max_lag = config.max_lag;
    if n <= max_lag + 1 {
        return Err(Error::InsufficientData(format!(
            "{n} residuals for max_lag {max_lag}; need more than {}",
            max_lag + 1
        )));
    }
    let z = standardize(residuals)?;

    let delta = raw_profile(&z, max_lag, config.estimator)?;
    let noise_floor = if config.noise_floor_multiplier > 0.0 {
        let mut shuffled = z.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(SURROGATE_SEED));
        let null = raw_profile(&shuffled, max_lag, config.estimator)?;
        let gains: Vec<f64> = null.windows(2).map(|w| w[1] - w[0]).collect();
        let rms = if gains.is_empty() {
            0.0
        } else {
            (gains.iter().map(|g| g * g).sum::<f64>() / gains.len() as f64).sqrt()
        };
        config.noise_floor_multiplier * rms
    } else {
        0.0
    };
    if let Some(bad) = delta.iter().position(|d| !d.is_finite()) {
        return Err(Error::Numerical(format!(
            "entropy estimate at lag {} is not finite",
            bad + 1
        )));
    }
    let selected_lag = select_lag(&delta, config.stabilization, noise_floor);
    log::debug!(
        "entropy profile {delta:?}, noise floor {noise_floor:.4}, selected lag {selected_lag}"
    );
    Ok(EntropyProfile {
        lags: (1..=max_lag).collect(),
        delta,
        selected_lag,
        noise_floor,
        estimator: config.estimator,
    })
}

/// Zero mean, unit variance, plus a tiny seeded jitter that breaks exact ties
/// for the neighbour search without changing histogram bins in practice.
fn standardize(values: &[f64]) -> Result<Vec<f64>> {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    if !(sd > 0.0) {
        return Err(Error::Degenerate("constant residual series".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SURROGATE_SEED);
    Ok(values
        .iter()
        .map(|v| {
            let e: f64 = StandardNormal.sample(&mut rng);
            (v - mean) / sd + TIE_JITTER * e
        })
        .collect())
}

fn raw_profile(z: &[f64], max_lag: usize, estimator: ProfileEstimator) -> Result<Vec<f64>> {
    match estimator {
        ProfileEstimator::JointKnn { neighbors } => {
            let m = z.len() - max_lag;
            if m <= neighbors {
                return Err(Error::InsufficientData(format!(
                    "{m} windows for {neighbors} neighbours"
                )));
            }
            Ok(knn::window_mutual_information(z, max_lag, neighbors))
        }
        ProfileEstimator::PairwiseHistogram { bins } => {
            let pair: Vec<f64> = (1..=max_lag)
                .into_par_iter()
                .map(|k| relative_entropy_pair(&z[..z.len() - k], &z[k..], bins))
                .collect::<Result<_>>()?;
            let mut running = 0.0;
            Ok(pair
                .iter()
                .enumerate()
                .map(|(i, d)| {
                    running += d;
                    running / (i + 1) as f64
                })
                .collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{generate_synthetic, GeneratorConfig, GeneratorKind};

    fn white(seed: u64, n: usize) -> Vec<f64> {
        let cfg = GeneratorConfig::new(
            n,
            GeneratorKind::WhiteNoise {
                mean: 0.0,
                sigma: 1.0,
            },
        );
        generate_synthetic(&cfg, seed).unwrap().values().to_vec()
    }

    #[test]
    fn select_lag_rules() {
        assert_eq!(select_lag(&[0.0; 5], 0.02, 0.0), 1);
        assert_eq!(select_lag(&[0.1, 0.2, 0.3, 0.3, 0.3], 0.02, 0.0), 3);
        // A late jump resets the choice.
        assert_eq!(select_lag(&[0.1, 0.1, 0.1, 0.5, 0.5], 0.02, 0.0), 4);
        // Declines count as stable.
        assert_eq!(select_lag(&[0.5, 0.3, 0.2, 0.1], 0.02, 0.0), 1);
        // Gains under the floor count as stable.
        assert_eq!(select_lag(&[0.1, 0.12, 0.13, 0.5], 0.0, 0.05), 4);
        assert_eq!(select_lag(&[0.1, 0.3, 0.31, 0.33], 0.0, 0.05), 2);
        assert_eq!(select_lag(&[0.1, 0.12, 0.13, 0.5], 0.0, 0.5), 1);
        assert_eq!(select_lag(&[0.4], 0.02, 0.0), 1);
    }

    #[test]
    fn white_noise_selects_one() {
        for method in [
            ProfileEstimator::JointKnn { neighbors: 4 },
            ProfileEstimator::PairwiseHistogram { bins: 16 },
        ] {
            let cfg = ProfileConfig {
                estimator: method,
                ..ProfileConfig::default()
            };
            let p = entropy_profile(&white(5, 2000), &cfg).unwrap();
            assert_eq!(p.lags, (1..=12).collect::<Vec<_>>());
            assert!(
                p.delta.iter().all(|d| d.is_finite() && d.abs() < 0.08),
                "{p:?}"
            );
            assert_eq!(p.selected_lag, 1, "{method:?}: {p:?}");
        }
    }

    #[test]
    fn ar_profile_stabilizes_after_order() {
        let cfg = GeneratorConfig::new(
            3000,
            GeneratorKind::Ar {
                coefficients: vec![0.4, -0.3, 0.25, -0.2, 0.15, 0.3],
                sigma: 1.0,
                mean: 0.0,
            },
        );
        let r = generate_synthetic(&cfg, 8).unwrap().values().to_vec();
        let p = entropy_profile(&r, &ProfileConfig::default()).unwrap();
        assert!((5..=7).contains(&p.selected_lag), "{p:?}");
        assert!(p.delta[6..].iter().all(|d| *d < p.delta[5]), "{p:?}");
    }

    #[test]
    fn deterministic_and_csv() {
        let r = white(2, 500);
        let cfg = ProfileConfig {
            max_lag: 4,
            ..ProfileConfig::default()
        };
        let a = entropy_profile(&r, &cfg).unwrap();
        assert_eq!(a, entropy_profile(&r, &cfg).unwrap());
        let mut buf = Vec::new();
        a.write_csv_to(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("lag,delta\n1,"));
        assert_eq!(text.lines().count(), 5);
    }

    #[test]
    fn rejects_bad_inputs() {
        let cfg = ProfileConfig::default();
        assert!(matches!(
            entropy_profile(&white(1, 13), &cfg),
            Err(Error::InsufficientData(_))
        ));
        assert!(matches!(
            entropy_profile(&[1.0; 100], &cfg),
            Err(Error::Degenerate(_))
        ));
        let bad = ProfileConfig {
            max_lag: 0,
            ..ProfileConfig::default()
        };
        assert!(matches!(
            entropy_profile(&white(1, 100), &bad),
            Err(Error::InvalidConfig(_))
        ));
        let hist = ProfileConfig {
            estimator: ProfileEstimator::PairwiseHistogram { bins: 16 },
            ..ProfileConfig::default()
        };
        // 40 points cannot fill 16 bins four times over.
        assert!(matches!(
            entropy_profile(&white(1, 40), &hist),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn config_json() {
        let cfg: ProfileConfig = serde_json::from_str(
            r#"{"max_lag": 8, "estimator": {"method": "pairwise_histogram", "bins": 12}}"#,
        )
        .unwrap();
        assert_eq!(cfg.max_lag, 8);
        assert_eq!(
            cfg.estimator,
            ProfileEstimator::PairwiseHistogram { bins: 12 }
        );
        assert_eq!(cfg.stabilization, 0.02);
    }
}
