use std::fmt;
use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::InputMode;
use crate::lags::ProfileConfig;
use crate::train::{TrainConfig, DEFAULT_SEED};

/// Window length: chosen from the entropy profile or fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ChoiceRepr", into = "ChoiceRepr")]
pub enum LagChoice {
    Auto,
    Fixed(usize),
}

impl Default for LagChoice {
    fn default() -> Self {
        LagChoice::Fixed(6)
    }
}

/// Hidden-layer size: one value or a grid-search range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ChoiceRepr", into = "ChoiceRepr")]
pub enum HiddenChoice {
    Fixed(usize),
    Range { min: usize, max: usize },
}

impl Default for HiddenChoice {
    fn default() -> Self {
        HiddenChoice::Fixed(9)
    }
}

impl HiddenChoice {
    pub fn range(self) -> Option<RangeInclusive<usize>> {
        match self {
            HiddenChoice::Fixed(_) => None,
            HiddenChoice::Range { min, max } => Some(min..=max),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ChoiceRepr {
    Number(usize),
    Text(String),
}

fn positive(n: usize, what: &str) -> Result<usize> {
    if n == 0 {
        return Err(Error::InvalidConfig(format!("{what} must be at least 1")));
    }
    Ok(n)
}

impl FromStr for LagChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("auto") {
            return Ok(LagChoice::Auto);
        }
        let n = s.parse::<usize>().map_err(|_| {
            Error::InvalidConfig(format!(
                "lag must be 'auto' or a positive integer, got {s:?}"
            ))
        })?;
        Ok(LagChoice::Fixed(positive(n, "lag")?))
    }
}

impl fmt::Display for LagChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LagChoice::Auto => f.write_str("auto"),
            LagChoice::Fixed(n) => write!(f, "{n}"),
        }
    }
}

impl TryFrom<ChoiceRepr> for LagChoice {
    type Error = Error;

    fn try_from(r: ChoiceRepr) -> Result<Self> {
        match r {
            ChoiceRepr::Number(n) => Ok(LagChoice::Fixed(positive(n, "lag")?)),
            ChoiceRepr::Text(s) => s.parse(),
        }
    }
}

impl From<LagChoice> for ChoiceRepr {
    fn from(c: LagChoice) -> Self {
        match c {
            LagChoice::Auto => ChoiceRepr::Text("auto".into()),
            LagChoice::Fixed(n) => ChoiceRepr::Number(n),
        }
    }
}

impl FromStr for HiddenChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidConfig(format!("hidden must be 'n' or 'a:b', got {s:?}"));
        let s = s.trim();
        match s.split_once(':') {
            Some((a, b)) => {
                let min = positive(a.trim().parse().map_err(|_| bad())?, "hidden")?;
                let max: usize = b.trim().parse().map_err(|_| bad())?;
                if max < min {
                    return Err(Error::InvalidConfig(format!(
                        "hidden range {min}:{max} is empty"
                    )));
                }
                Ok(HiddenChoice::Range { min, max })
            }
            None => Ok(HiddenChoice::Fixed(positive(
                s.parse().map_err(|_| bad())?,
                "hidden",
            )?)),
        }
    }
}

impl fmt::Display for HiddenChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HiddenChoice::Fixed(n) => write!(f, "{n}"),
            HiddenChoice::Range { min, max } => write!(f, "{min}:{max}"),
        }
    }
}

impl TryFrom<ChoiceRepr> for HiddenChoice {
    type Error = Error;

    fn try_from(r: ChoiceRepr) -> Result<Self> {
        match r {
            ChoiceRepr::Number(n) => Ok(HiddenChoice::Fixed(positive(n, "hidden")?)),
            ChoiceRepr::Text(s) => s.parse(),
        }
    }
}

impl From<HiddenChoice> for ChoiceRepr {
    fn from(c: HiddenChoice) -> Self {
        match c {
            HiddenChoice::Fixed(n) => ChoiceRepr::Number(n),
            HiddenChoice::Range { .. } => ChoiceRepr::Text(c.to_string()),
        }
    }
}

/// Everything one pipeline run needs. Read from JSON with every field
/// optional, e.g. `{"input": "vrp.csv", "lag": "auto", "hidden": "2:25"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub input: Option<PathBuf>,
    pub mode: InputMode,
    pub train_fraction: f64,
    pub lag: LagChoice,
    pub lag_selection: ProfileConfig,
    pub hidden: HiddenChoice,
    /// Training settings. Its `seed` is replaced by the pipeline `seed`.
    pub train: TrainConfig,
    /// Steps of the iterated forecast past the end of the series.
    pub horizon: usize,
    pub out: Option<PathBuf>,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            input: None,
            mode: InputMode::Power,
            train_fraction: 0.8,
            lag: LagChoice::default(),
            lag_selection: ProfileConfig::default(),
            hidden: HiddenChoice::default(),
            train: TrainConfig::default(),
            horizon: 5,
            out: None,
            seed: DEFAULT_SEED,
        }
    }
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: PipelineConfig = serde_json::from_str(text)?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "train fraction must lie in (0, 1), got {}",
                self.train_fraction
            )));
        }
        if self.horizon == 0 {
            return Err(Error::InvalidConfig(
                "forecast horizon must be at least 1".into(),
            ));
        }
        self.lag_selection.validate()?;
        self.training().validate()
    }

    /// Training settings with the pipeline seed applied.
    pub fn training(&self) -> TrainConfig {
        TrainConfig {
            seed: self.seed,
            ..self.train.clone()
        }
    }
}
