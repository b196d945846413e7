use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::mlp::MlpModel;
use crate::series::{undifference, NormParams};
use crate::train::Algorithm;

/// What a saved network needs to forecast on its own, and where it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub algorithm: Algorithm,
    pub lag: usize,
    pub hidden: usize,
    pub seed: u64,
    pub train_fraction: f64,
    pub norm: NormParams,
    /// The last `lag` residuals of the series, normalized, oldest first.
    pub last_window: Vec<f64>,
    /// Last observed value in watts.
    pub last_observed: f64,
    pub last_timestamp: String,
    pub n_observations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastModel {
    pub network: MlpModel,
    pub provenance: Provenance,
}

impl ForecastModel {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: ForecastModel = serde_json::from_str(text)?;
        if m.provenance.last_window.len() != m.network.input_dim
            || m.provenance.lag != m.network.input_dim
        {
            return Err(Error::DimensionMismatch {
                expected: m.network.input_dim,
                actual: m.provenance.last_window.len(),
            });
        }
        NormParams::new(m.provenance.norm.min, m.provenance.norm.max)?;
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// Iterated forecast for the `horizon` steps after the end of the series.
    pub fn forecast(&self, horizon: usize) -> Result<Vec<f64>> {
        let p = &self.provenance;
        forecast_multi_step(
            &self.network,
            &p.last_window,
            horizon,
            &p.norm,
            p.last_observed,
        )
    }
}

/// Feeds each normalized one-step prediction back into the window and turns
/// the predicted residual path into watt levels starting from
/// `last_observed`.
pub fn forecast_multi_step(
    model: &MlpModel,
    last_window: &[f64],
    horizon: usize,
    norm: &NormParams,
    last_observed: f64,
) -> Result<Vec<f64>> {
    if horizon == 0 {
        return Err(Error::InvalidConfig(
            "forecast horizon must be at least 1".into(),
        ));
    }
    if last_window.len() != model.input_dim {
        return Err(Error::DimensionMismatch {
            expected: model.input_dim,
            actual: last_window.len(),
        });
    }
    ensure_finite(last_window, "forecast window")?;
    if !last_observed.is_finite() {
        return Err(Error::NonFinite("last observed value".into()));
    }
    let mut window = last_window.to_vec();
    let mut residuals = Vec::with_capacity(horizon);
    for step in 1..=horizon {
        let next = model.forward(&window)?;
        if !next.is_finite() {
            return Err(Error::Numerical(format!(
                "non-finite prediction at horizon step {step}"
            )));
        }
        residuals.push(norm.invert(next));
        window.remove(0);
        window.push(next);
    }
    undifference(&residuals, last_observed)
}
