//! On-disk outputs. JSON files are pretty-printed with sorted map keys and
//! carry no run timestamps, so identical runs give identical bytes.

use std::fs;
use std::path::Path;

use serde::Serialize;

use super::{Comparison, PipelineRun};
use crate::error::{Error, Result};
use crate::ingest::{format_timestamp, format_value};

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let path = dir.join(name);
    let text = serde_json::to_string_pretty(value)? + "\n";
    fs::write(&path, text).map_err(|e| Error::io(path, e))
}

fn write_csv(
    dir: &Path,
    name: &str,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    write_csv_file(&dir.join(name), header, rows)
}

fn write_csv_file(
    path: &Path,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// `step,predicted_watts`, steps counted from 1.
pub fn write_forecast_csv(path: &Path, forecast: &[f64]) -> Result<()> {
    write_csv_file(
        path,
        &["step", "predicted_watts"],
        forecast
            .iter()
            .enumerate()
            .map(|(i, v)| vec![(i + 1).to_string(), format_value(*v)]),
    )
}

fn opt(v: Option<f64>) -> String {
    v.map(format_value).unwrap_or_default()
}

/// Writes, under `dir`:
///
/// | file | content |
/// |------|---------|
/// | `series.csv` | `timestamp,vrp_watts` |
/// | `residuals.csv` | `timestamp,residual` (first differences) |
/// | `entropy_profile.csv` | `lag,delta` |
/// | `grid_search.csv` | `hidden,objective,converged,epochs_used` (hidden range only) |
/// | `training_trace.csv` | one row per optimizer epoch |
/// | `predictions.csv` | one-step predictions per pattern, in watts and residuals |
/// | `acf.csv` | `lag,actual,forecast` on the test block |
/// | `forecast.csv` | `step,predicted_watts` past the end of the series |
/// | `model.json` | network and forecasting provenance |
/// | `report.json` | evaluation report |
pub fn write_pipeline_artifacts(run: &PipelineRun, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let series = &run.prepared.series;
    write_csv(
        dir,
        "series.csv",
        &["timestamp", "vrp_watts"],
        series
            .timestamps()
            .iter()
            .zip(series.values())
            .map(|(t, v)| vec![format_timestamp(t), format_value(*v)]),
    )?;
    write_csv(
        dir,
        "residuals.csv",
        &["timestamp", "residual"],
        series.timestamps()[1..]
            .iter()
            .zip(&run.prepared.differenced.residuals)
            .map(|(t, r)| vec![format_timestamp(t), format_value(*r)]),
    )?;
    if let Some(profile) = &run.prepared.profile {
        profile.write_csv(&dir.join("entropy_profile.csv"))?;
    }
    if let Some(grid) = &run.prepared.grid {
        grid.write_csv(&dir.join("grid_search.csv"))?;
    }
    write_csv(
        dir,
        "training_trace.csv",
        &[
            "epoch",
            "objective_start",
            "objective",
            "accepted",
            "damping",
            "alpha",
            "beta",
            "gamma",
        ],
        run.training.epoch_trace.iter().enumerate().map(|(i, e)| {
            vec![
                (i + 1).to_string(),
                format_value(e.objective_start),
                format_value(e.objective),
                e.accepted.to_string(),
                format_value(e.damping),
                opt(e.alpha),
                opt(e.beta),
                opt(e.gamma),
            ]
        }),
    )?;
    let p = &run.predictions;
    write_csv(
        dir,
        "predictions.csv",
        &[
            "timestamp",
            "partition",
            "actual_watts",
            "predicted_watts",
            "actual_residual",
            "predicted_residual",
        ],
        (0..p.actual.len()).map(|i| {
            vec![
                p.timestamps[i].clone(),
                if i < p.split_index { "train" } else { "test" }.to_string(),
                format_value(p.actual[i]),
                format_value(p.predicted[i]),
                format_value(p.actual_residual[i]),
                format_value(p.predicted_residual[i]),
            ]
        }),
    )?;
    let r = &run.report;
    write_csv(
        dir,
        "acf.csv",
        &["lag", "actual", "forecast"],
        r.acf_actual
            .iter()
            .zip(&r.acf_forecast)
            .enumerate()
            .map(|(k, (a, f))| vec![k.to_string(), format_value(*a), format_value(*f)]),
    )?;
    write_forecast_csv(&dir.join("forecast.csv"), &run.forecast)?;
    write_json(dir, "model.json", &run.model)?;
    write_json(dir, "report.json", &run.report)
}

/// Writes `comparison.json` and `comparison.csv`
/// (`algorithm,mean_error,mean_squared_error,r_squared,error`, test block).
pub fn write_comparison_artifacts(comparison: &Comparison, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_json(dir, "comparison.json", comparison)?;
    write_csv(
        dir,
        "comparison.csv",
        &[
            "algorithm",
            "mean_error",
            "mean_squared_error",
            "r_squared",
            "error",
        ],
        comparison.rows.iter().map(|row| {
            let (me, mse, r2) = match &row.test {
                Some(s) => (
                    format_value(s.mean_error),
                    format_value(s.mean_squared_error),
                    opt(s.r_squared),
                ),
                None => Default::default(),
            };
            vec![
                row.algorithm.to_string(),
                me,
                mse,
                r2,
                row.error.clone().unwrap_or_default(),
            ]
        }),
    )
}
