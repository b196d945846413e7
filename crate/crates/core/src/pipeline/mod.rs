//! End-to-end runs: load, test stationarity, difference, choose the window,
//! build patterns, size and train the network, and evaluate in watts.
//!
//! Everything that is fitted (normalization, lag choice, hidden size, the
//! network itself) sees only the training block. The test block is touched
//! only for evaluation.

mod artifacts;
mod config;
mod forecast;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, StageExt};
use crate::ingest::{format_timestamp, load_csv, TimeSeries};
use crate::lags::{entropy_profile, EntropyProfile};
use crate::mlp::MlpModel;
use crate::series::{
    acf, difference, extract_patterns, split_index_for, DifferencedSeries, PatternSet,
};
use crate::stats::{
    error_stats, kpss_level, paired_ttest, two_sample_ttest, ErrorStats, KpssResult, TTestResult,
};
use crate::train::{grid_search_hidden, train, Algorithm, GridSearch, StopReason, TrainReport};

pub use artifacts::{write_comparison_artifacts, write_forecast_csv, write_pipeline_artifacts};
pub use config::{HiddenChoice, LagChoice, PipelineConfig};
pub use forecast::{forecast_multi_step, ForecastModel, Provenance};

/// Largest lag of the reported autocorrelation functions.
pub const ACF_MAX_LAG: usize = 20;

/// Stages shared by every algorithm: the data and the patterns built from it.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub series: TimeSeries,
    pub kpss_raw: KpssResult,
    pub kpss_residuals: KpssResult,
    pub differenced: DifferencedSeries,
    /// Computed on the training prefix of the residuals. Absent when the
    /// lag is fixed and the profile could not be estimated.
    pub profile: Option<EntropyProfile>,
    pub lag: usize,
    pub patterns: PatternSet,
    pub grid: Option<GridSearch>,
    pub hidden: usize,
}

/// Training outcome without the per-epoch trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSummary {
    pub algorithm: Algorithm,
    pub final_objective: f64,
    pub e_d: f64,
    pub e_w: f64,
    pub mse: f64,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma_effective: Option<f64>,
    pub converged: bool,
    pub stop_reason: StopReason,
    pub epochs_used: usize,
}

impl From<&TrainReport> for TrainingSummary {
    fn from(r: &TrainReport) -> Self {
        Self {
            algorithm: r.algorithm,
            final_objective: r.final_objective,
            e_d: r.e_d,
            e_w: r.e_w,
            mse: r.mse,
            alpha: r.alpha,
            beta: r.beta,
            gamma_effective: r.gamma_effective,
            converged: r.converged,
            stop_reason: r.stop_reason,
            epochs_used: r.epochs_used,
        }
    }
}

/// One-step predictions for every pattern, in watts.
#[derive(Debug, Clone, PartialEq)]
pub struct Predictions {
    /// Timestamp of the predicted observation.
    pub timestamps: Vec<String>,
    pub actual: Vec<f64>,
    pub predicted: Vec<f64>,
    pub actual_residual: Vec<f64>,
    pub predicted_residual: Vec<f64>,
    /// Rows `[0, split_index)` are training patterns.
    pub split_index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n_observations: usize,
    pub n_patterns: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub kpss_raw: KpssResult,
    pub kpss_residuals: KpssResult,
    /// Error statistics in watts.
    pub train: ErrorStats,
    pub test: ErrorStats,
    /// Test-block autocorrelations of the actual and the predicted watt
    /// series, lags `0..=20` (fewer for short test blocks).
    pub acf_actual: Vec<f64>,
    pub acf_forecast: Vec<f64>,
    /// Mean absolute ACF difference over lags `1..`.
    pub acf_fidelity: f64,
    /// Test block, actual against predicted.
    pub paired_ttest: TTestResult,
    /// Actual values, training block against test block.
    pub two_sample_ttest: TTestResult,
    pub training: TrainingSummary,
    pub provenance: Provenance,
}

#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub prepared: Prepared,
    pub model: ForecastModel,
    pub training: TrainReport,
    pub predictions: Predictions,
    pub report: EvalReport,
    /// Iterated forecast past the end of the series, in watts.
    pub forecast: Vec<f64>,
}

/// KPSS results for a series and its first differences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stationarity {
    pub raw: KpssResult,
    pub differenced: KpssResult,
}

pub fn stationarity(series: &TimeSeries) -> Result<Stationarity> {
    let raw = kpss_level(series.values()).stage("stationarity (raw)")?;
    let residuals = difference(series.values()).stage("differencing")?.residuals;
    let differenced = kpss_level(&residuals).stage("stationarity (residuals)")?;
    Ok(Stationarity { raw, differenced })
}

/// Entropy profile of the training prefix of the first differences: the
/// leading `train_fraction` of the residuals.
pub fn lag_profile(residuals: &[f64], config: &PipelineConfig) -> Result<EntropyProfile> {
    if !(config.train_fraction > 0.0 && config.train_fraction < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "train fraction must lie in (0, 1), got {}",
            config.train_fraction
        )));
    }
    let prefix = &residuals[..split_index_for(residuals.len(), config.train_fraction)];
    entropy_profile(prefix, &config.lag_selection)
}

/// Stationarity checks, differencing, window choice, patterns and, for a
/// hidden-size range, the grid search.
pub fn prepare(series: &TimeSeries, config: &PipelineConfig) -> Result<Prepared> {
    config.validate()?;
    let Stationarity {
        raw: kpss_raw,
        differenced: kpss_residuals,
    } = stationarity(series)?;
    if !kpss_raw.reject_at_5pct {
        log::info!(
            "raw series is not rejected as level-stationary (KPSS {:.4})",
            kpss_raw.statistic
        );
    }
    let differenced = difference(series.values()).stage("differencing")?;
    if kpss_residuals.reject_at_5pct {
        return Err(Error::NonStationaryResiduals {
            statistic: kpss_residuals.statistic,
            critical: kpss_residuals.critical_value(0.05).unwrap_or(f64::NAN),
        });
    }

    let residuals = &differenced.residuals;
    let profile = match (lag_profile(residuals, config), config.lag) {
        (Ok(p), _) => Some(p),
        (Err(e), LagChoice::Auto) => return Err(e).stage("lag selection"),
        (Err(e), LagChoice::Fixed(_)) => {
            log::warn!("entropy profile unavailable: {e}");
            None
        }
    };
    let lag = match (config.lag, &profile) {
        (LagChoice::Fixed(p), _) => p,
        (LagChoice::Auto, Some(p)) => p.selected_lag,
        (LagChoice::Auto, None) => unreachable!("auto lag without a profile"),
    };
    let patterns =
        extract_patterns(residuals, lag, config.train_fraction).stage("pattern extraction")?;

    let (grid, hidden) = match config.hidden {
        HiddenChoice::Fixed(h) => (None, h),
        HiddenChoice::Range { min, max } => {
            let g = grid_search_hidden(
                patterns.train_inputs(),
                patterns.train_targets(),
                min..=max,
                &config.training(),
            )
            .stage("grid search")?;
            let h = g.best_hidden;
            (Some(g), h)
        }
    };
    Ok(Prepared {
        series: series.clone(),
        kpss_raw,
        kpss_residuals,
        differenced,
        profile,
        lag,
        patterns,
        grid,
        hidden,
    })
}

/// Initializes with the pipeline seed and trains on the training block.
pub fn fit(
    prepared: &Prepared,
    config: &PipelineConfig,
    algorithm: Algorithm,
) -> Result<(ForecastModel, TrainReport)> {
    let mut cfg = config.training();
    cfg.algorithm = algorithm;
    let patterns = &prepared.patterns;
    let init = MlpModel::init(prepared.lag, prepared.hidden, cfg.seed).stage("training")?;
    let (network, report) = train(
        &init,
        patterns.train_inputs(),
        patterns.train_targets(),
        &cfg,
    )
    .stage("training")?;

    let residuals = &prepared.differenced.residuals;
    let norm = patterns.norm;
    let values = prepared.series.values();
    let provenance = Provenance {
        algorithm,
        lag: prepared.lag,
        hidden: prepared.hidden,
        seed: cfg.seed,
        train_fraction: config.train_fraction,
        norm,
        last_window: residuals[residuals.len() - prepared.lag..]
            .iter()
            .map(|&r| norm.apply(r))
            .collect(),
        last_observed: *values.last().expect("non-empty series"),
        last_timestamp: format_timestamp(
            prepared
                .series
                .timestamps()
                .last()
                .expect("non-empty series"),
        ),
        n_observations: values.len(),
    };
    Ok((
        ForecastModel {
            network,
            provenance,
        },
        report,
    ))
}

/// One-step watt predictions: the previous actual value plus the
/// de-normalized predicted residual.
pub fn predict_watts(prepared: &Prepared, model: &ForecastModel) -> Result<Predictions> {
    let patterns = &prepared.patterns;
    let p = prepared.lag;
    let values = prepared.series.values();
    let norm = patterns.norm;
    let predicted_norm = model.network.predict(&patterns.inputs)?;
    let predicted_residual: Vec<f64> = predicted_norm.iter().map(|&y| norm.invert(y)).collect();
    let n = patterns.n_patterns();
    // Pattern i targets residual i + p = x[i + p + 1] - x[i + p].
    let predicted: Vec<f64> = (0..n)
        .map(|i| values[i + p] + predicted_residual[i])
        .collect();
    if let Some(i) = predicted.iter().position(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!(
            "non-finite prediction for pattern {i}"
        )));
    }
    Ok(Predictions {
        timestamps: prepared.series.timestamps()[p + 1..]
            .iter()
            .map(format_timestamp)
            .collect(),
        actual: values[p + 1..].to_vec(),
        predicted,
        actual_residual: prepared.differenced.residuals[p..].to_vec(),
        predicted_residual,
        split_index: patterns.split_index,
    })
}

pub fn evaluate(
    prepared: &Prepared,
    model: &ForecastModel,
    training: &TrainReport,
    predictions: &Predictions,
) -> Result<EvalReport> {
    let s = predictions.split_index;
    let (train_actual, test_actual) = predictions.actual.split_at(s);
    let (train_pred, test_pred) = predictions.predicted.split_at(s);
    let max_lag = ACF_MAX_LAG.min(test_actual.len().saturating_sub(1));
    let acf_actual = acf(test_actual, max_lag)?;
    let acf_forecast = acf(test_pred, max_lag)?;
    let acf_fidelity = if max_lag == 0 {
        0.0
    } else {
        acf_actual[1..]
            .iter()
            .zip(&acf_forecast[1..])
            .map(|(a, f)| (a - f).abs())
            .sum::<f64>()
            / max_lag as f64
    };
    Ok(EvalReport {
        n_observations: prepared.series.len(),
        n_patterns: prepared.patterns.n_patterns(),
        n_train: s,
        n_test: test_actual.len(),
        kpss_raw: prepared.kpss_raw.clone(),
        kpss_residuals: prepared.kpss_residuals.clone(),
        train: error_stats(train_actual, train_pred)?,
        test: error_stats(test_actual, test_pred)?,
        acf_actual,
        acf_forecast,
        acf_fidelity,
        paired_ttest: paired_ttest(test_actual, test_pred)?,
        two_sample_ttest: two_sample_ttest(train_actual, test_actual)?,
        training: TrainingSummary::from(training),
        provenance: model.provenance.clone(),
    })
}

/// Full run on an in-memory series with `config.train.algorithm`.
pub fn run_pipeline_on(series: &TimeSeries, config: &PipelineConfig) -> Result<PipelineRun> {
    let prepared = prepare(series, config)?;
    run_prepared(prepared, config, config.train.algorithm)
}

fn run_prepared(
    prepared: Prepared,
    config: &PipelineConfig,
    algorithm: Algorithm,
) -> Result<PipelineRun> {
    let (model, training) = fit(&prepared, config, algorithm)?;
    let predictions = predict_watts(&prepared, &model).stage("prediction")?;
    let report = evaluate(&prepared, &model, &training, &predictions).stage("evaluation")?;
    let forecast = model.forecast(config.horizon).stage("forecast")?;
    Ok(PipelineRun {
        prepared,
        model,
        training,
        predictions,
        report,
        forecast,
    })
}

fn load_input(config: &PipelineConfig) -> Result<TimeSeries> {
    let path = config
        .input
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("no input file given".into()))?;
    let (series, summary) = load_csv(path, config.mode).stage("ingest")?;
    log::info!(
        "loaded {} rows ({} missing, {} duplicates replaced)",
        summary.rows_kept,
        summary.rows_missing,
        summary.duplicates_replaced
    );
    Ok(series)
}

/// Loads `config.input`, runs every stage and writes the artifacts to
/// `config.out` when set.
pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineRun> {
    config.validate()?;
    let series = load_input(config)?;
    let run = run_pipeline_on(&series, config)?;
    if let Some(dir) = &config.out {
        write_pipeline_artifacts(&run, dir)?;
    }
    Ok(run)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub algorithm: Algorithm,
    pub train: Option<ErrorStats>,
    pub test: Option<ErrorStats>,
    pub training: Option<TrainingSummary>,
    pub error: Option<String>,
}

/// Test-block error statistics per algorithm on identical patterns, hidden
/// size and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub lag: usize,
    pub hidden: usize,
    pub seed: u64,
    pub n_train: usize,
    pub n_test: usize,
    pub rows: Vec<ComparisonRow>,
}

pub fn compare_algorithms_on(series: &TimeSeries, config: &PipelineConfig) -> Result<Comparison> {
    let prepared = prepare(series, config)?;
    let rows = Algorithm::ALL
        .iter()
        .map(
            |&algorithm| match run_prepared(prepared.clone(), config, algorithm) {
                Ok(run) => ComparisonRow {
                    algorithm,
                    train: Some(run.report.train),
                    test: Some(run.report.test),
                    training: Some(run.report.training),
                    error: None,
                },
                Err(e) => {
                    log::warn!("{algorithm} failed: {e}");
                    ComparisonRow {
                        algorithm,
                        train: None,
                        test: None,
                        training: None,
                        error: Some(e.to_string()),
                    }
                }
            },
        )
        .collect();
    Ok(Comparison {
        lag: prepared.lag,
        hidden: prepared.hidden,
        seed: config.seed,
        n_train: prepared.patterns.split_index,
        n_test: prepared.patterns.n_patterns() - prepared.patterns.split_index,
        rows,
    })
}

/// Loads `config.input`, compares the three algorithms and writes the
/// comparison to `config.out` when set.
pub fn compare_algorithms(config: &PipelineConfig) -> Result<Comparison> {
    config.validate()?;
    let series = load_input(config)?;
    let comparison = compare_algorithms_on(&series, config)?;
    if let Some(dir) = &config.out {
        write_comparison_artifacts(&comparison, dir)?;
    }
    Ok(comparison)
}
