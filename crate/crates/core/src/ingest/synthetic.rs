//! Seeded synthetic series used as test fixtures and demo inputs.

use chrono::NaiveDate;
use nalgebra::{DMatrix, Schur};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};

use super::TimeSeries;
use crate::error::{Error, Result};

const AR_BURN_IN: usize = 1000;

/// Generator configuration, read from JSON such as
/// `{"kind": "ar", "n": 2000, "coefficients": [0.9], "sigma": 1.0}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub n: usize,
    /// First (daily) timestamp.
    #[serde(default = "default_start")]
    pub start: NaiveDate,
    #[serde(flatten)]
    pub kind: GeneratorKind,
}

fn default_start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2000, 4, 1).expect("valid date")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorKind {
    WhiteNoise {
        #[serde(default)]
        mean: f64,
        #[serde(default = "one")]
        sigma: f64,
    },
    /// `start` plus the cumulative sum of zero-mean white noise drawn exactly
    /// as `WhiteNoise` would with the same seed.
    RandomWalk {
        #[serde(default)]
        start: f64,
        #[serde(default = "one")]
        sigma: f64,
    },
    /// `x_t = mean + Σ φ_j (x_{t-j} - mean) + ε_t` after a discarded burn-in.
    Ar {
        coefficients: Vec<f64>,
        #[serde(default = "one")]
        sigma: f64,
        #[serde(default)]
        mean: f64,
    },
    /// Non-negative VRP-like signal: a reflected random-walk baseline plus
    /// geometrically decaying thermal bursts and observation noise, in watts.
    Bursts {
        #[serde(default = "bursts_baseline")]
        baseline: f64,
        #[serde(default = "bursts_level_sigma")]
        level_sigma: f64,
        #[serde(default = "bursts_probability")]
        burst_probability: f64,
        #[serde(default = "bursts_mean")]
        burst_mean: f64,
        #[serde(default = "bursts_decay")]
        decay: f64,
        #[serde(default = "bursts_noise")]
        noise_sigma: f64,
    },
}

fn one() -> f64 {
    1.0
}
fn bursts_baseline() -> f64 {
    2.0e8
}
fn bursts_level_sigma() -> f64 {
    5.0e6
}
fn bursts_probability() -> f64 {
    0.05
}
fn bursts_mean() -> f64 {
    1.0e9
}
fn bursts_decay() -> f64 {
    0.6
}
fn bursts_noise() -> f64 {
    2.0e7
}

impl GeneratorKind {
    /// VRP-like defaults for the `Bursts` generator.
    pub fn bursts() -> Self {
        GeneratorKind::Bursts {
            baseline: bursts_baseline(),
            level_sigma: bursts_level_sigma(),
            burst_probability: bursts_probability(),
            burst_mean: bursts_mean(),
            decay: bursts_decay(),
            noise_sigma: bursts_noise(),
        }
    }
}

impl GeneratorConfig {
    pub fn new(n: usize, kind: GeneratorKind) -> Self {
        Self {
            n,
            start: default_start(),
            kind,
        }
    }
}

/// Deterministic for a given `(config, seed)`.
pub fn generate_synthetic(config: &GeneratorConfig, seed: u64) -> Result<TimeSeries> {
    if config.n == 0 {
        return Err(Error::InvalidConfig(
            "synthetic series length must be positive".into(),
        ));
    }
    let values = generate_values(config, seed)?;
    TimeSeries::daily(config.start, values)
}

fn generate_values(config: &GeneratorConfig, seed: u64) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = config.n;
    match &config.kind {
        GeneratorKind::WhiteNoise { mean, sigma } => {
            let eps = normal_draws(&mut rng, n, *sigma)?;
            Ok(eps.into_iter().map(|e| mean + e).collect())
        }
        GeneratorKind::RandomWalk { start, sigma } => {
            let eps = normal_draws(&mut rng, n, *sigma)?;
            let mut level = *start;
            Ok(eps
                .into_iter()
                .map(|e| {
                    level += e;
                    level
                })
                .collect())
        }
        GeneratorKind::Ar {
            coefficients,
            sigma,
            mean,
        } => {
            if !is_stationary_ar(coefficients) {
                return Err(Error::UnstableAr(spectral_radius(coefficients)));
            }
            let q = coefficients.len();
            let eps = normal_draws(&mut rng, n + AR_BURN_IN, *sigma)?;
            let mut x = vec![0.0; n + AR_BURN_IN];
            for t in 0..x.len() {
                let ar: f64 = coefficients
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j < t)
                    .map(|(j, phi)| phi * x[t - 1 - j])
                    .sum();
                x[t] = ar + eps[t];
            }
            debug_assert!(q == 0 || x.len() > q);
            Ok(x[AR_BURN_IN..].iter().map(|v| v + mean).collect())
        }
        GeneratorKind::Bursts {
            baseline,
            level_sigma,
            burst_probability,
            burst_mean,
            decay,
            noise_sigma,
        } => {
            if !(0.0..=1.0).contains(burst_probability) || !(0.0..1.0).contains(decay) {
                return Err(Error::InvalidConfig(
                    "bursts: probability must be in [0, 1] and decay in [0, 1)".into(),
                ));
            }
            if !(*burst_mean > 0.0) {
                return Err(Error::InvalidConfig(
                    "bursts: burst_mean must be positive".into(),
                ));
            }
            let step = normal(*level_sigma)?;
            let noise = normal(*noise_sigma)?;
            let size = Exp::new(1.0 / burst_mean)
                .map_err(|e| Error::InvalidConfig(format!("bursts: {e}")))?;
            let mut level = *baseline;
            let mut burst = 0.0;
            let mut out = Vec::with_capacity(n);
            for _ in 0..n {
                level = (level + step.sample(&mut rng)).abs();
                burst *= decay;
                if rng.random_bool(*burst_probability) {
                    burst += size.sample(&mut rng);
                }
                out.push((level + burst + noise.sample(&mut rng)).max(0.0));
            }
            Ok(out)
        }
    }
}

fn normal(sigma: f64) -> Result<Normal<f64>> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "sigma must be finite and >= 0, got {sigma}"
        )));
    }
    Normal::new(0.0, sigma).map_err(|e| Error::InvalidConfig(e.to_string()))
}

fn normal_draws(rng: &mut ChaCha8Rng, n: usize, sigma: f64) -> Result<Vec<f64>> {
    let dist = normal(sigma)?;
    Ok((0..n).map(|_| dist.sample(rng)).collect())
}

/// Largest modulus among the roots of the AR companion matrix.
pub(crate) fn spectral_radius(coefficients: &[f64]) -> f64 {
    let q = coefficients.len();
    if q == 0 {
        return 0.0;
    }
    if coefficients.iter().any(|c| !c.is_finite()) {
        return f64::INFINITY;
    }
    let mut companion = DMatrix::<f64>::zeros(q, q);
    for (j, phi) in coefficients.iter().enumerate() {
        companion[(0, j)] = *phi;
    }
    for i in 1..q {
        companion[(i, i - 1)] = 1.0;
    }
    match Schur::try_new(companion, f64::EPSILON, 10_000) {
        Some(schur) => schur
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max),
        None => f64::NAN,
    }
}

/// Step-down (Schur-Cohn) test: all roots of `1 - sum phi_j z^j` lie outside
/// the unit circle iff every reflection coefficient has magnitude below one.
pub(crate) fn is_stationary_ar(coefficients: &[f64]) -> bool {
    if coefficients.iter().any(|c| !c.is_finite()) {
        return false;
    }
    let mut phi = coefficients.to_vec();
    while let Some(&k) = phi.last() {
        if k.abs() >= 1.0 {
            return false;
        }
        let m = phi.len();
        let scale = 1.0 - k * k;
        phi = (0..m - 1)
            .map(|j| (phi[j] + k * phi[m - 2 - j]) / scale)
            .collect();
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_acf1(x: &[f64]) -> f64 {
        let n = x.len() as f64;
        let m = x.iter().sum::<f64>() / n;
        let var: f64 = x.iter().map(|v| (v - m).powi(2)).sum();
        let cov: f64 = x.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum();
        cov / var
    }

    #[test]
    fn white_noise_is_deterministic() {
        let cfg = GeneratorConfig::new(
            500,
            GeneratorKind::WhiteNoise {
                mean: 0.0,
                sigma: 1.0,
            },
        );
        let a = generate_synthetic(&cfg, 1).unwrap();
        let b = generate_synthetic(&cfg, 1).unwrap();
        assert_eq!(a, b);
        let c = generate_synthetic(&cfg, 2).unwrap();
        assert_ne!(a.values(), c.values());
        assert_eq!(a.len(), 500);
    }

    #[test]
    fn random_walk_is_cumsum_of_white_noise() {
        let wn = generate_synthetic(
            &GeneratorConfig::new(
                500,
                GeneratorKind::WhiteNoise {
                    mean: 0.0,
                    sigma: 2.0,
                },
            ),
            7,
        )
        .unwrap();
        let rw = generate_synthetic(
            &GeneratorConfig::new(
                500,
                GeneratorKind::RandomWalk {
                    start: 0.0,
                    sigma: 2.0,
                },
            ),
            7,
        )
        .unwrap();
        let mut acc = 0.0;
        for (w, r) in wn.values().iter().zip(rw.values()) {
            acc += w;
            assert_eq!(acc, *r);
        }
    }

    #[test]
    fn ar1_lag_one_autocorrelation() {
        let cfg = GeneratorConfig::new(
            2000,
            GeneratorKind::Ar {
                coefficients: vec![0.9],
                sigma: 1.0,
                mean: 0.0,
            },
        );
        let s = generate_synthetic(&cfg, 3).unwrap();
        let r1 = sample_acf1(s.values());
        assert!((r1 - 0.9).abs() < 0.05, "lag-1 acf {r1}");
    }

    #[test]
    fn unstable_ar_rejected() {
        for coeffs in [
            vec![1.0],
            vec![1.2],
            vec![0.5, 0.6],
            vec![0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
        ] {
            let cfg = GeneratorConfig::new(
                100,
                GeneratorKind::Ar {
                    coefficients: coeffs.clone(),
                    sigma: 1.0,
                    mean: 0.0,
                },
            );
            assert!(
                matches!(generate_synthetic(&cfg, 0), Err(Error::UnstableAr(_))),
                "{coeffs:?}"
            );
        }
        assert!((spectral_radius(&[0.5]) - 0.5).abs() < 1e-12);
        assert!(is_stationary_ar(&[0.4, -0.3, 0.25, -0.2, 0.15, 0.3]));
        assert!(is_stationary_ar(&[1.5, -0.56]));
        assert!(!is_stationary_ar(&[1.5, -0.5]));
        assert!(!is_stationary_ar(&[0.0, 0.0, 0.0, 0.0, 0.0, 1.0]));
        // x² - 0.5x - 0.3: roots (0.5 ± sqrt(1.45)) / 2
        let expect = (0.5 + 1.45f64.sqrt()) / 2.0;
        assert!((spectral_radius(&[0.5, 0.3]) - expect).abs() < 1e-10);
    }

    #[test]
    fn bursts_are_non_negative_and_json_configurable() {
        let cfg: GeneratorConfig =
            serde_json::from_str(r#"{"kind": "bursts", "n": 1000, "decay": 0.5}"#).unwrap();
        let s = generate_synthetic(&cfg, 11).unwrap();
        assert_eq!(s.len(), 1000);
        assert!(s.values().iter().all(|v| *v >= 0.0 && v.is_finite()));

        let ar: GeneratorConfig =
            serde_json::from_str(r#"{"kind": "ar", "n": 10, "coefficients": [0.2, 0.1]}"#).unwrap();
        assert_eq!(ar.start, default_start());
        let round = serde_json::to_string(&ar).unwrap();
        assert_eq!(serde_json::from_str::<GeneratorConfig>(&round).unwrap(), ar);
    }
}
