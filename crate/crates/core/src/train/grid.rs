//! Hidden-layer size sweep.

use std::io::Write;
use std::ops::RangeInclusive;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{train, TrainConfig};
use crate::error::{Error, Result};
use crate::mlp::MlpModel;

/// Training MSEs within this relative distance of the best count as ties.
const TIE_RELATIVE: f64 = 1e-6;
/// Absolute tie width for objectives at the noise level of double precision.
const TIE_ABSOLUTE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridEntry {
    pub hidden: usize,
    pub seed: u64,
    /// Training MSE, absent when training failed.
    pub objective: Option<f64>,
    pub converged: bool,
    pub epochs_used: usize,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearch {
    pub best_hidden: usize,
    pub entries: Vec<GridEntry>,
}

impl GridSearch {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = Vec::new();
        self.write_csv_to(&mut out)
            .map_err(|e| Error::io(path, e))?;
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    pub fn write_csv_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "hidden,objective,converged,epochs_used")?;
        for e in &self.entries {
            let obj = e
                .objective
                .map(crate::ingest::format_value)
                .unwrap_or_default();
            writeln!(w, "{},{obj},{},{}", e.hidden, e.converged, e.epochs_used)?;
        }
        Ok(())
    }
}

/// Smallest `h` whose objective ties with the minimum.
fn pick_best(entries: &[GridEntry]) -> Option<usize> {
    let min = entries
        .iter()
        .filter_map(|e| e.objective)
        .fold(f64::INFINITY, f64::min);
    if !min.is_finite() {
        return None;
    }
    let width = (TIE_RELATIVE * min.abs()).max(TIE_ABSOLUTE);
    entries
        .iter()
        .find(|e| e.objective.is_some_and(|o| o <= min + width))
        .map(|e| e.hidden)
}

/// Trains one network per hidden size, seeded with `config.seed + h`, and
/// returns the size with the lowest training MSE. A failed run is recorded
/// and left out of the choice.
pub fn grid_search_hidden(
    inputs: &[Vec<f64>],
    targets: &[f64],
    hidden: RangeInclusive<usize>,
    config: &TrainConfig,
) -> Result<GridSearch> {
    config.validate()?;
    if hidden.is_empty() || *hidden.start() == 0 {
        return Err(Error::InvalidConfig(format!(
            "hidden range {}..={} must be non-empty and start at 1 or more",
            hidden.start(),
            hidden.end()
        )));
    }
    let input_dim = inputs.first().map(Vec::len).ok_or_else(|| {
        Error::InsufficientData("grid search needs at least one training pattern".into())
    })?;
    let hs: Vec<usize> = hidden.collect();
    let entries: Vec<GridEntry> = hs
        .par_iter()
        .map(|&h| {
            let seed = config.seed.wrapping_add(h as u64);
            let cfg = TrainConfig {
                seed,
                ..config.clone()
            };
            let run =
                MlpModel::init(input_dim, h, seed).and_then(|m| train(&m, inputs, targets, &cfg));
            match run {
                Ok((_, report)) => GridEntry {
                    hidden: h,
                    seed,
                    objective: Some(report.mse),
                    converged: report.converged,
                    epochs_used: report.epochs_used,
                    error: None,
                },
                Err(e) => {
                    log::warn!("grid search: h = {h} failed: {e}");
                    GridEntry {
                        hidden: h,
                        seed,
                        objective: None,
                        converged: false,
                        epochs_used: 0,
                        error: Some(e.to_string()),
                    }
                }
            }
        })
        .collect();
    let best_hidden = pick_best(&entries)
        .ok_or_else(|| Error::Numerical("training failed for every hidden-layer size".into()))?;
    Ok(GridSearch {
        best_hidden,
        entries,
    })
}
