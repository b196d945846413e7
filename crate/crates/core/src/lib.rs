//! One-step-ahead forecasting of volcanic radiative power (VRP) time series.
//!
//! The crate covers the full modelling chain:
//!
//! - [`ingest`]: CSV loading, MIR radiance to power conversion, synthetic series.
//! - [`series`]: differencing, `[0, 1]` normalization, lag windows, autocorrelation.
//! - [`stats`]: KPSS level-stationarity test, error statistics, t-tests.
//! - [`lags`]: histogram and k-nearest-neighbour entropy estimators and the
//!   lag-window selection rule.
//! - [`mlp`]: the `p -> h -> 1` tanh network with an analytic residual Jacobian.
//! - [`train`]: Levenberg-Marquardt, scaled conjugate gradient and
//!   Bayesian-regularized training, plus the hidden-layer grid search.
//! - [`pipeline`]: end-to-end orchestration, multi-step forecasting and the
//!   three-algorithm comparison.

// Guards such as `!(x > 0.0)` are written that way so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod ingest;
pub mod lags;
pub mod mlp;
pub mod pipeline;
pub mod series;
pub mod special;
pub mod stats;
pub mod train;

pub use error::{Error, Result};
