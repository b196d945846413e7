//! Møller's scaled conjugate gradient on `E_D = sum r^2`.
//!
//! Curvature along the search direction comes from a finite difference of
//! gradients, and a Levenberg-style scale `lambda` replaces the line search.

use nalgebra::DVector;

use super::{
    inf_norm, Algorithm, EpochRecord, ResidualProblem, StopReason, TrainConfig, TrainReport,
};
use crate::error::{Error, Result};

const SIGMA: f64 = 1e-4;
const LAMBDA_INIT: f64 = 1e-6;
const LAMBDA_MAX: f64 = 1e100;

pub fn minimize_scg<P: ResidualProblem>(
    problem: &P,
    theta0: &[f64],
    config: &TrainConfig,
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
    let objective = |w: &DVector<f64>| problem.residuals(w.as_slice()).norm_squared();
    let gradient = |w: &DVector<f64>| problem.gradient(w.as_slice());

    let mut w = DVector::from_column_slice(theta0);
    let mut e = objective(&w);
    if !e.is_finite() {
        return Err(Error::Numerical("initial objective is not finite".into()));
    }
    // r is the negative gradient, p the search direction.
    let mut r = -gradient(&w);
    let mut p = r.clone();
    let mut lambda = LAMBDA_INIT;
    let mut lambda_bar = 0.0;
    let mut success = true;
    let mut since_restart = 0usize;
    let mut delta = 0.0;
    let mut p_sq = 0.0;
    let mut trace = Vec::new();
    let mut stop = StopReason::MaxEpochs;
    // Objective at the start of the current conjugate cycle. A single SCG
    // step can stall on a plateau, so the objective tolerance is applied to
    // the progress of a whole cycle.
    let mut cycle_start = e;
    let mut cycle_done = false;

    for _ in 0..config.max_epochs {
        if inf_norm(&r) < config.gradient_tolerance {
            stop = StopReason::GradientTolerance;
            break;
        }
        if success {
            p_sq = p.norm_squared();
            let sigma_k = SIGMA / p_sq.sqrt();
            let s = (gradient(&(&w + &p * sigma_k)) + &r) / sigma_k;
            delta = p.dot(&s);
        }
        delta += (lambda - lambda_bar) * p_sq;
        if delta <= 0.0 {
            lambda_bar = 2.0 * (lambda - delta / p_sq);
            delta = -delta + lambda * p_sq;
            lambda = lambda_bar;
        }
        let mu = p.dot(&r);
        if mu <= 0.0 {
            // Not a descent direction; restart along the gradient.
            p = r.clone();
            since_restart = 0;
            cycle_start = e;
            success = true;
            lambda_bar = 0.0;
            trace.push(EpochRecord {
                objective_start: e,
                objective: e,
                accepted: false,
                damping: lambda,
                alpha: None,
                beta: None,
                gamma: None,
            });
            continue;
        }
        let step = mu / delta;
        let w_new = &w + &p * step;
        let e_new = objective(&w_new);
        let comparison = if e_new.is_finite() {
            2.0 * delta * (e - e_new) / (mu * mu)
        } else {
            f64::NEG_INFINITY
        };

        let e_start = e;
        if comparison >= 0.0 {
            w = w_new;
            e = e_new;
            let r_new = -gradient(&w);
            lambda_bar = 0.0;
            success = true;
            since_restart += 1;
            if since_restart >= n_w {
                p = r_new.clone();
                since_restart = 0;
                cycle_done = true;
            } else {
                let beta = (r_new.norm_squared() - r_new.dot(&r)) / mu;
                p = &r_new + &p * beta;
            }
            r = r_new;
            if comparison >= 0.75 {
                lambda /= 4.0;
            }
        } else {
            lambda_bar = lambda;
            success = false;
        }
        if comparison < 0.25 {
            let inc = if comparison.is_finite() {
                delta * (1.0 - comparison) / p_sq
            } else {
                lambda * 4.0
            };
            lambda += inc;
        }
        trace.push(EpochRecord {
            objective_start: e_start,
            objective: e,
            accepted: success,
            damping: lambda,
            alpha: None,
            beta: None,
            gamma: None,
        });
        if !(lambda <= LAMBDA_MAX) {
            stop = StopReason::DampingOverflow;
            break;
        }
        if cycle_done {
            cycle_done = false;
            if cycle_start - e <= config.objective_tolerance * cycle_start {
                stop = StopReason::ObjectiveTolerance;
                break;
            }
            cycle_start = e;
        }
    }

    let theta: Vec<f64> = w.iter().copied().collect();
    let e_w = theta.iter().map(|v| v * v).sum();
    let report = TrainReport {
        algorithm: Algorithm::Scg,
        final_objective: e,
        e_d: e,
        e_w,
        mse: e / n_d as f64,
        alpha: None,
        beta: None,
        gamma_effective: None,
        converged: stop.converged(),
        stop_reason: stop,
        epochs_used: trace.len(),
        epoch_trace: trace,
    };
    log::debug!(
        "scg: {} epochs, stop {:?}, E_D {:.6e}",
        report.epochs_used,
        report.stop_reason,
        e
    );
    Ok((theta, report))
}
