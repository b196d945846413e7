//! Training algorithms for the `p -> h -> 1` network.
//!
//! - [`train_lm`]: Levenberg-Marquardt on the sum of squared errors `E_D`.
//! - [`train_brnn`]: Levenberg-Marquardt on `F = beta * E_D + alpha * E_w`
//!   with `alpha` and `beta` re-estimated from the Gauss-Newton Hessian.
//! - [`train_scg`]: Møller's scaled conjugate gradient on `E_D`.
//! - [`grid_search_hidden`]: one model per hidden-layer size.
//!
//! The optimizers work on any [`ResidualProblem`], so they can be checked on
//! problems with known minimizers.

mod grid;
mod lm;
mod scg;

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mlp::{self, MlpModel};

pub use grid::{grid_search_hidden, GridEntry, GridSearch};
pub use lm::{minimize_damped, Regularization};
pub use scg::minimize_scg;

/// Seed used when the caller does not pick one.
pub const DEFAULT_SEED: u64 = 20_140_601;

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize, PartialOrd, Ord,
)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Lm,
    Scg,
    #[default]
    Brnn,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Lm, Algorithm::Scg, Algorithm::Brnn];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Lm => "lm",
            Algorithm::Scg => "scg",
            Algorithm::Brnn => "brnn",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lm" => Ok(Algorithm::Lm),
            "scg" => Ok(Algorithm::Scg),
            "brnn" | "br" => Ok(Algorithm::Brnn),
            other => Err(Error::InvalidConfig(format!(
                "unknown algorithm {other:?} (expected lm, scg or brnn)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub algorithm: Algorithm,
    pub max_epochs: usize,
    /// Relative objective change below which training stops.
    pub objective_tolerance: f64,
    /// Infinity-norm of the objective gradient below which training stops.
    pub gradient_tolerance: f64,
    pub mu_init: f64,
    pub mu_factor: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Brnn,
            max_epochs: 1000,
            objective_tolerance: 1e-7,
            gradient_tolerance: 1e-6,
            mu_init: 1e-3,
            mu_factor: 10.0,
            seed: DEFAULT_SEED,
        }
    }
}

impl TrainConfig {
    pub fn with_algorithm(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.objective_tolerance) || !positive(self.gradient_tolerance) {
            return Err(Error::InvalidConfig(format!(
                "tolerances must be positive, got objective {} and gradient {}",
                self.objective_tolerance, self.gradient_tolerance
            )));
        }
        if !positive(self.mu_init) {
            return Err(Error::InvalidConfig(format!(
                "mu_init must be positive, got {}",
                self.mu_init
            )));
        }
        if !(self.mu_factor > 1.0 && self.mu_factor.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "mu_factor must be greater than 1, got {}",
                self.mu_factor
            )));
        }
        if self.max_epochs == 0 {
            return Err(Error::InvalidConfig("max_epochs must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    GradientTolerance,
    ObjectiveTolerance,
    HyperparametersStable,
    MaxEpochs,
    DampingOverflow,
}

impl StopReason {
    pub fn converged(self) -> bool {
        matches!(
            self,
            StopReason::GradientTolerance
                | StopReason::ObjectiveTolerance
                | StopReason::HyperparametersStable
        )
    }
}

/// One optimizer iteration. `objective_start` and `objective` are both
/// evaluated under the hyperparameters in force during the step, so
/// `objective <= objective_start` whenever the step was accepted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub objective_start: f64,
    pub objective: f64,
    pub accepted: bool,
    /// `mu` for the damped Gauss-Newton trainers, `lambda` for SCG.
    pub damping: f64,
    /// Hyperparameters after re-estimation (BRNN only).
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub algorithm: Algorithm,
    /// `E_D` for LM and SCG, `F = beta * E_D + alpha * E_w` for BRNN.
    pub final_objective: f64,
    /// Sum of squared residuals at the returned parameters.
    pub e_d: f64,
    /// Sum of squared parameters.
    pub e_w: f64,
    /// `e_d / n_patterns`.
    pub mse: f64,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma_effective: Option<f64>,
    pub converged: bool,
    pub stop_reason: StopReason,
    pub epochs_used: usize,
    pub epoch_trace: Vec<EpochRecord>,
}

impl TrainReport {
    pub fn objective_trace(&self) -> Vec<f64> {
        self.epoch_trace.iter().map(|e| e.objective).collect()
    }
}

/// Least-squares problem in residual form: minimize `sum r_i(theta)^2`.
pub trait ResidualProblem: Sync {
    fn n_params(&self) -> usize;
    fn n_residuals(&self) -> usize;
    fn residuals(&self, theta: &[f64]) -> DVector<f64>;
    /// Residuals and their Jacobian `d r / d theta`.
    fn residuals_and_jacobian(&self, theta: &[f64]) -> (DVector<f64>, DMatrix<f64>);

    /// Gradient of `sum r^2`.
    fn gradient(&self, theta: &[f64]) -> DVector<f64> {
        let (r, j) = self.residuals_and_jacobian(theta);
        2.0 * j.tr_mul(&r)
    }
}

/// Network residuals `target - output` over a fixed pattern batch.
#[derive(Debug, Clone, Copy)]
pub struct NetworkProblem<'a> {
    input_dim: usize,
    hidden_dim: usize,
    inputs: &'a [Vec<f64>],
    targets: &'a [f64],
}

impl<'a> NetworkProblem<'a> {
    pub fn new(model: &MlpModel, inputs: &'a [Vec<f64>], targets: &'a [f64]) -> Result<Self> {
        mlp::check_batch(model.input_dim, inputs, targets)?;
        if targets.is_empty() {
            return Err(Error::InsufficientData("no training patterns".into()));
        }
        for row in inputs {
            crate::error::ensure_finite(row, "training inputs")?;
        }
        crate::error::ensure_finite(targets, "training targets")?;
        Ok(Self {
            input_dim: model.input_dim,
            hidden_dim: model.hidden_dim,
            inputs,
            targets,
        })
    }
}

impl ResidualProblem for NetworkProblem<'_> {
    fn n_params(&self) -> usize {
        mlp::param_count(self.input_dim, self.hidden_dim)
    }

    fn n_residuals(&self) -> usize {
        self.targets.len()
    }

    fn residuals(&self, theta: &[f64]) -> DVector<f64> {
        mlp::residuals_and_jacobian(
            self.input_dim,
            self.hidden_dim,
            theta,
            self.inputs,
            self.targets,
            false,
        )
        .0
    }

    fn residuals_and_jacobian(&self, theta: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
        let (r, j) = mlp::residuals_and_jacobian(
            self.input_dim,
            self.hidden_dim,
            theta,
            self.inputs,
            self.targets,
            true,
        );
        (r, j.expect("jacobian requested"))
    }
}

/// Linear residuals `b - A theta`.
#[derive(Debug, Clone)]
pub struct LinearProblem {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
}

impl ResidualProblem for LinearProblem {
    fn n_params(&self) -> usize {
        self.a.ncols()
    }

    fn n_residuals(&self) -> usize {
        self.a.nrows()
    }

    fn residuals(&self, theta: &[f64]) -> DVector<f64> {
        &self.b - &self.a * DVector::from_column_slice(theta)
    }

    fn residuals_and_jacobian(&self, theta: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
        (self.residuals(theta), -&self.a)
    }
}

fn train_model(
    model: &MlpModel,
    inputs: &[Vec<f64>],
    targets: &[f64],
    config: &TrainConfig,
    algorithm: Algorithm,
) -> Result<(MlpModel, TrainReport)> {
    config.validate()?;
    let problem = NetworkProblem::new(model, inputs, targets)?;
    let theta0 = model.flatten().0;
    let (theta, report) = match algorithm {
        Algorithm::Lm => minimize_damped(&problem, &theta0, config, Regularization::None)?,
        Algorithm::Brnn => minimize_damped(&problem, &theta0, config, Regularization::bayesian())?,
        Algorithm::Scg => minimize_scg(&problem, &theta0, config)?,
    };
    Ok((model.with_params(&mlp::FlatParams(theta))?, report))
}

pub fn train_lm(
    model: &MlpModel,
    inputs: &[Vec<f64>],
    targets: &[f64],
    config: &TrainConfig,
) -> Result<(MlpModel, TrainReport)> {
    train_model(model, inputs, targets, config, Algorithm::Lm)
}

pub fn train_brnn(
    model: &MlpModel,
    inputs: &[Vec<f64>],
    targets: &[f64],
    config: &TrainConfig,
) -> Result<(MlpModel, TrainReport)> {
    train_model(model, inputs, targets, config, Algorithm::Brnn)
}

pub fn train_scg(
    model: &MlpModel,
    inputs: &[Vec<f64>],
    targets: &[f64],
    config: &TrainConfig,
) -> Result<(MlpModel, TrainReport)> {
    train_model(model, inputs, targets, config, Algorithm::Scg)
}

/// Trains with `config.algorithm`.
pub fn train(
    model: &MlpModel,
    inputs: &[Vec<f64>],
    targets: &[f64],
    config: &TrainConfig,
) -> Result<(MlpModel, TrainReport)> {
    train_model(model, inputs, targets, config, config.algorithm)
}

fn sum_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

fn inf_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// `|a - b| <= tol * max(|a|, |b|)`.
fn relatively_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        let bad = [
            TrainConfig {
                mu_factor: 1.0,
                ..TrainConfig::default()
            },
            TrainConfig {
                objective_tolerance: 0.0,
                ..TrainConfig::default()
            },
            TrainConfig {
                gradient_tolerance: -1.0,
                ..TrainConfig::default()
            },
            TrainConfig {
                max_epochs: 0,
                ..TrainConfig::default()
            },
        ];
        for c in bad {
            assert!(
                matches!(c.validate(), Err(Error::InvalidConfig(_))),
                "{c:?}"
            );
        }
    }

    #[test]
    fn algorithm_names() {
        for a in Algorithm::ALL {
            assert_eq!(a.as_str().parse::<Algorithm>().unwrap(), a);
            assert_eq!(serde_json::to_string(&a).unwrap(), format!("\"{a}\""));
        }
        assert!("adam".parse::<Algorithm>().is_err());
    }

    #[test]
    fn linear_problem_gradient() {
        let (p, x) = test_support::linear_problem(8, 3, 1);
        assert!(p.residuals(&x).iter().all(|v| v.abs() < 1e-12));
        let g = p.gradient(&[0.0; 3]);
        let expect = -2.0 * p.a.tr_mul(&p.b);
        assert!((g - expect).norm() < 1e-12);
    }

    #[test]
    fn rejects_empty_or_mismatched_batches() {
        let m = MlpModel::init(2, 3, 1).unwrap();
        let cfg = TrainConfig::default();
        assert!(train_lm(&m, &[], &[], &cfg).is_err());
        assert!(train_lm(&m, &[vec![0.1, 0.2]], &[0.1, 0.2], &cfg).is_err());
        assert!(train_scg(&m, &[vec![0.1]], &[0.1], &cfg).is_err());
        assert!(train_brnn(&m, &[vec![0.1, f64::NAN]], &[0.1], &cfg).is_err());
    }
}
