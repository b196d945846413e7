//! Damped Gauss-Newton (Levenberg-Marquardt) minimization of
//! `F = beta * E_D + alpha * E_w`, with optional evidence-based re-estimation
//! of `alpha` and `beta`.
//!
//! With residuals `r` and Jacobian `J = dr/dtheta` the step is
//! `delta = -(beta J'J + (beta mu + alpha) I)^-1 (beta J'r + alpha theta)`.

use nalgebra::{DMatrix, DVector};

use super::{
    inf_norm, relatively_close, sum_sq, Algorithm, EpochRecord, ResidualProblem, StopReason,
    TrainConfig, TrainReport,
};
use crate::error::{Error, Result};

/// Damping above which the step is considered hopeless.
const MU_MAX: f64 = 1e10;
/// Damping never drops below this, keeping the normal matrix positive definite.
const MU_MIN: f64 = 1e-20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regularization {
    /// Plain least squares: `alpha = 0`, `beta = 1`.
    None,
    /// Start from `alpha = 0`, `beta = 1` and re-estimate after every accepted
    /// step. With `reestimate_alpha = false`, `alpha` stays at zero and only
    /// `beta` is updated.
    Bayesian { reestimate_alpha: bool },
}

impl Regularization {
    pub fn bayesian() -> Self {
        Regularization::Bayesian {
            reestimate_alpha: true,
        }
    }
}

struct Point {
    theta: Vec<f64>,
    r: DVector<f64>,
    jac: DMatrix<f64>,
    e_d: f64,
    e_w: f64,
}

impl Point {
    fn new<P: ResidualProblem>(problem: &P, theta: Vec<f64>) -> Self {
        let (r, jac) = problem.residuals_and_jacobian(&theta);
        let e_d = r.norm_squared();
        let e_w = sum_sq(&theta);
        Self {
            theta,
            r,
            jac,
            e_d,
            e_w,
        }
    }

    fn objective(&self, alpha: f64, beta: f64) -> f64 {
        beta * self.e_d + alpha * self.e_w
    }
}

/// Effective number of parameters `N_w - alpha tr((beta J'J + alpha I)^-1)`,
/// clamped to `[0, N_w]`.
///
/// Evaluated as `sum k l / (k l + 1)` over the eigenvalues `l` of `J'J` with
/// `k = beta / alpha`, which stays well conditioned when `beta` is huge
/// (near-perfect fits) and needs no factorization that could fail.
fn effective_parameters(jtj: &DMatrix<f64>, alpha: f64, beta: f64) -> Result<f64> {
    let n_w = jtj.nrows() as f64;
    if alpha == 0.0 {
        return Ok(n_w);
    }
    let ratio = beta / alpha;
    let gamma: f64 = jtj
        .clone()
        .symmetric_eigenvalues()
        .iter()
        .map(|&l| {
            let kl = ratio * l.max(0.0);
            if kl.is_infinite() {
                1.0
            } else {
                kl / (kl + 1.0)
            }
        })
        .sum();
    if !gamma.is_finite() {
        return Err(Error::Numerical(
            "effective number of parameters is not finite".into(),
        ));
    }
    Ok(gamma.clamp(0.0, n_w))
}

pub fn minimize_damped<P: ResidualProblem>(
    problem: &P,
    theta0: &[f64],
    config: &TrainConfig,
    regularization: Regularization,
) -> Result<(Vec<f64>, TrainReport)> {
    config.validate()?;
    let n_w = problem.n_params();
    if theta0.len() != n_w {
        return Err(Error::DimensionMismatch {
            expected: n_w,
            actual: theta0.len(),
        });
    }
    let n_d = problem.n_residuals();
    if n_d == 0 {
        return Err(Error::InsufficientData("no residuals to fit".into()));
    }
    let bayesian = matches!(regularization, Regularization::Bayesian { .. });
    let reestimate_alpha = matches!(
        regularization,
        Regularization::Bayesian {
            reestimate_alpha: true
        }
    );

    let mut point = Point::new(problem, theta0.to_vec());
    if !point.e_d.is_finite() {
        return Err(Error::Numerical("initial objective is not finite".into()));
    }
    let (mut alpha, mut beta) = (0.0, 1.0);
    let mut gamma = bayesian.then_some(n_w as f64);
    let mut mu = config.mu_init;
    let mut trace = Vec::new();
    let mut stop = StopReason::MaxEpochs;

    for _ in 0..config.max_epochs {
        let f = point.objective(alpha, beta);
        let jtj = point.jac.tr_mul(&point.jac);
        let half_grad =
            point.jac.tr_mul(&point.r) * beta + DVector::from_column_slice(&point.theta) * alpha;
        if 2.0 * inf_norm(&half_grad) < config.gradient_tolerance {
            stop = StopReason::GradientTolerance;
            break;
        }

        // Raise the damping until the step lowers F.
        let mut accepted = None;
        while mu <= MU_MAX {
            let mut normal = &jtj * beta;
            for k in 0..n_w {
                normal[(k, k)] += beta * mu + alpha;
            }
            if let Some(chol) = normal.cholesky() {
                let step = chol.solve(&half_grad);
                let trial: Vec<f64> = point
                    .theta
                    .iter()
                    .zip(step.iter())
                    .map(|(t, s)| t - s)
                    .collect();
                let r = problem.residuals(&trial);
                let f_trial = beta * r.norm_squared() + alpha * sum_sq(&trial);
                if f_trial.is_finite() && f_trial < f {
                    accepted = Some((trial, f_trial));
                    break;
                }
            }
            mu *= config.mu_factor;
        }

        let Some((theta, f_new)) = accepted else {
            trace.push(EpochRecord {
                objective_start: f,
                objective: f,
                accepted: false,
                damping: mu,
                alpha: bayesian.then_some(alpha),
                beta: bayesian.then_some(beta),
                gamma,
            });
            stop = StopReason::DampingOverflow;
            break;
        };
        let damping = mu;
        mu = (mu / config.mu_factor).max(MU_MIN);
        point = Point::new(problem, theta);

        let mut record = EpochRecord {
            objective_start: f,
            objective: f_new,
            accepted: true,
            damping,
            alpha: None,
            beta: None,
            gamma: None,
        };

        if !bayesian {
            trace.push(record);
            if f - f_new <= config.objective_tolerance * f {
                stop = StopReason::ObjectiveTolerance;
                break;
            }
            continue;
        }

        let jtj = point.jac.tr_mul(&point.jac);
        let g = effective_parameters(&jtj, alpha, beta)?;
        let new_alpha = if reestimate_alpha && point.e_w > 0.0 {
            g / (2.0 * point.e_w)
        } else {
            alpha
        };
        let new_beta = if point.e_d > 0.0 {
            (n_d as f64 - g.min(n_d as f64 - 1.0)).max(0.0) / (2.0 * point.e_d)
        } else {
            beta
        };
        if !(new_alpha.is_finite() && new_beta.is_finite()) || new_beta <= 0.0 {
            return Err(Error::Numerical(format!(
                "hyperparameter re-estimation failed (alpha {new_alpha}, beta {new_beta})"
            )));
        }
        let f_next = point.objective(new_alpha, new_beta);
        let stable = relatively_close(alpha, new_alpha, config.objective_tolerance)
            && relatively_close(beta, new_beta, config.objective_tolerance)
            && relatively_close(f, f_next, config.objective_tolerance);
        alpha = new_alpha;
        beta = new_beta;
        gamma = Some(g);
        record.alpha = Some(alpha);
        record.beta = Some(beta);
        record.gamma = gamma;
        trace.push(record);
        if stable {
            stop = StopReason::HyperparametersStable;
            break;
        }
    }

    let algorithm = if bayesian {
        Algorithm::Brnn
    } else {
        Algorithm::Lm
    };
    let report = TrainReport {
        algorithm,
        final_objective: point.objective(alpha, beta),
        e_d: point.e_d,
        e_w: point.e_w,
        mse: point.e_d / n_d as f64,
        alpha: bayesian.then_some(alpha),
        beta: bayesian.then_some(beta),
        gamma_effective: gamma,
        converged: stop.converged(),
        stop_reason: stop,
        epochs_used: trace.len(),
        epoch_trace: trace,
    };
    log::debug!(
        "{algorithm}: {} epochs, stop {:?}, E_D {:.6e}",
        report.epochs_used,
        report.stop_reason,
        report.e_d
    );
    Ok((point.theta, report))
}
