//! Loading VRP observations.
//!
//! Two CSV layouts are accepted, both with a header row:
//!
//! ```text
//! timestamp,vrp_watts
//! timestamp,l_mir,l_mir_bk
//! ```
//!
//! Blank, `NA`/`NaN`/`null` and non-finite values mark a sample as missing; such
//! rows are dropped. Anything else that fails to parse is an error carrying the
//! file line number.

mod synthetic;

use std::collections::HashMap;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use chrono::{DateTime, NaiveDate, NaiveDateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use synthetic::{generate_synthetic, GeneratorConfig, GeneratorKind};

/// Regression coefficient (m² sr µm) linking excess MIR radiance to radiant power.
pub const MIR_POWER_COEFFICIENT: f64 = 1.89e7;

/// Volcanic radiative power in watts from hot-spot and background MIR radiance
/// (W m⁻¹ sr⁻¹ µm⁻¹).
pub fn radiance_to_vrp(l_mir: f64, l_mir_bk: f64) -> Result<f64> {
    if !l_mir.is_finite() || !l_mir_bk.is_finite() {
        return Err(Error::NonFinite(format!(
            "radiance pair ({l_mir}, {l_mir_bk})"
        )));
    }
    Ok(MIR_POWER_COEFFICIENT * (l_mir - l_mir_bk))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputMode {
    /// `timestamp,vrp_watts`
    #[default]
    Power,
    /// `timestamp,l_mir,l_mir_bk`
    Radiance,
}

impl InputMode {
    fn columns(self) -> usize {
        match self {
            InputMode::Power => 2,
            InputMode::Radiance => 3,
        }
    }

    fn header(self) -> &'static [&'static str] {
        match self {
            InputMode::Power => &["timestamp", "vrp_watts"],
            InputMode::Radiance => &["timestamp", "l_mir", "l_mir_bk"],
        }
    }
}

impl FromStr for InputMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "power" => Ok(InputMode::Power),
            "radiance" => Ok(InputMode::Radiance),
            other => Err(Error::InvalidConfig(format!(
                "unknown input mode `{other}` (expected power or radiance)"
            ))),
        }
    }
}

impl fmt::Display for InputMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InputMode::Power => "power",
            InputMode::Radiance => "radiance",
        })
    }
}

/// One parsed CSV row. In radiance mode `value` already holds the converted power.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRecord {
    /// File line number (the header is line 1).
    pub line: usize,
    pub timestamp: DateTime<Utc>,
    pub value: f64,
    pub missing: bool,
}

/// Finite observations in watts with strictly increasing timestamps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    timestamps: Vec<DateTime<Utc>>,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(timestamps: Vec<DateTime<Utc>>, values: Vec<f64>) -> Result<Self> {
        if timestamps.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: timestamps.len(),
                actual: values.len(),
            });
        }
        crate::error::ensure_finite(&values, "series values")?;
        if let Some(i) = timestamps.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(format!(
                "timestamps not strictly increasing at index {}",
                i + 1
            )));
        }
        Ok(Self { timestamps, values })
    }

    /// Daily timestamps starting at midnight UTC of `start`.
    pub fn daily(start: NaiveDate, values: Vec<f64>) -> Result<Self> {
        let origin = start.and_hms_opt(0, 0, 0).expect("midnight").and_utc();
        let timestamps = (0..values.len())
            .map(|i| origin + chrono::Duration::days(i as i64))
            .collect();
        Self::new(timestamps, values)
    }

    pub fn timestamps(&self) -> &[DateTime<Utc>] {
        &self.timestamps
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The first `n` observations.
    pub fn prefix(&self, n: usize) -> TimeSeries {
        let n = n.min(self.len());
        TimeSeries {
            timestamps: self.timestamps[..n].to_vec(),
            values: self.values[..n].to_vec(),
        }
    }

    /// Writes the series in the power-mode layout.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(InputMode::Power.header())?;
        for (t, v) in self.timestamps.iter().zip(&self.values) {
            w.write_record([format_timestamp(t), format_value(*v)])?;
        }
        w.flush().map_err(|e| Error::io("csv output", e))?;
        Ok(())
    }
}

/// Row accounting for a CSV load.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LoadSummary {
    pub rows_read: usize,
    pub rows_missing: usize,
    pub duplicates_replaced: usize,
    pub rows_kept: usize,
}

pub fn load_csv(path: impl AsRef<Path>, mode: InputMode) -> Result<(TimeSeries, LoadSummary)> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(std::io::BufReader::new(file), mode)
}

pub fn read_csv<R: Read>(reader: R, mode: InputMode) -> Result<(TimeSeries, LoadSummary)> {
    let records = parse_records(reader, mode)?;
    let mut summary = LoadSummary {
        rows_read: records.len(),
        ..LoadSummary::default()
    };

    let mut kept: Vec<RawRecord> = Vec::with_capacity(records.len());
    let mut slot_of: HashMap<DateTime<Utc>, usize> = HashMap::new();
    for rec in records {
        if rec.missing {
            summary.rows_missing += 1;
            continue;
        }
        match slot_of.get(&rec.timestamp) {
            Some(&slot) => {
                log::warn!(
                    "duplicate timestamp {} on line {} replaces line {}",
                    format_timestamp(&rec.timestamp),
                    rec.line,
                    kept[slot].line
                );
                summary.duplicates_replaced += 1;
                kept[slot] = rec;
            }
            None => {
                slot_of.insert(rec.timestamp, kept.len());
                kept.push(rec);
            }
        }
    }
    if kept.is_empty() {
        return Err(Error::NoUsableRows);
    }
    if kept.windows(2).any(|w| w[0].timestamp > w[1].timestamp) {
        log::info!("input rows are not in chronological order; sorting");
        kept.sort_by_key(|r| r.timestamp);
    }
    summary.rows_kept = kept.len();
    log::info!(
        "loaded {} rows: {} kept, {} missing dropped, {} duplicates replaced",
        summary.rows_read,
        summary.rows_kept,
        summary.rows_missing,
        summary.duplicates_replaced
    );

    let (timestamps, values) = kept.into_iter().map(|r| (r.timestamp, r.value)).unzip();
    Ok((TimeSeries::new(timestamps, values)?, summary))
}

fn parse_records<R: Read>(reader: R, mode: InputMode) -> Result<Vec<RawRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let header = rdr.headers()?.clone();
    if header.is_empty() || header.iter().all(str::is_empty) {
        return Err(Error::MalformedRow {
            row: 1,
            reason: "missing header row".into(),
        });
    }
    if header.len() != mode.columns() {
        return Err(Error::MalformedRow {
            row: 1,
            reason: format!(
                "expected {} columns ({}) for {mode} mode, found {}",
                mode.columns(),
                mode.header().join(","),
                header.len()
            ),
        });
    }
    if !header
        .iter()
        .zip(mode.header())
        .all(|(got, want)| got.eq_ignore_ascii_case(want))
    {
        log::warn!(
            "header `{}` differs from expected `{}`; using column positions",
            header.iter().collect::<Vec<_>>().join(","),
            mode.header().join(",")
        );
    }

    let mut out = Vec::new();
    for result in rdr.records() {
        let record = result?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        if record.len() != mode.columns() {
            return Err(Error::MalformedRow {
                row: line,
                reason: format!("expected {} fields, found {}", mode.columns(), record.len()),
            });
        }
        let timestamp = parse_timestamp(&record[0]).ok_or_else(|| Error::MalformedRow {
            row: line,
            reason: format!("unparseable timestamp `{}`", &record[0]),
        })?;
        let fields = (1..record.len())
            .map(|i| parse_value(&record[i], line))
            .collect::<Result<Vec<_>>>()?;

        let value = match (mode, fields.as_slice()) {
            (InputMode::Power, [Some(v)]) => Some(*v),
            (InputMode::Radiance, [Some(a), Some(b)]) => Some(radiance_to_vrp(*a, *b)?),
            _ => None,
        };
        out.push(RawRecord {
            line,
            timestamp,
            value: value.unwrap_or(f64::NAN),
            missing: value.is_none(),
        });
    }
    Ok(out)
}

/// `Ok(None)` marks a missing sample.
fn parse_value(field: &str, line: usize) -> Result<Option<f64>> {
    if field.is_empty()
        || ["na", "nan", "null", "n/a"].contains(&field.to_ascii_lowercase().as_str())
    {
        return Ok(None);
    }
    let v: f64 = field.parse().map_err(|_| Error::MalformedRow {
        row: line,
        reason: format!("unparseable value `{field}`"),
    })?;
    Ok(v.is_finite().then_some(v))
}

/// ISO-8601 date or date-time; dates map to midnight UTC and naive date-times
/// are taken as UTC.
pub fn parse_timestamp(s: &str) -> Option<DateTime<Utc>> {
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Some(dt.with_timezone(&Utc));
    }
    for fmt in [
        "%Y-%m-%dT%H:%M:%S%.f",
        "%Y-%m-%d %H:%M:%S%.f",
        "%Y-%m-%dT%H:%M",
    ] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(dt.and_utc());
        }
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .map(|dt| dt.and_utc())
}

pub fn format_timestamp(t: &DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Secs, true)
}

/// Shortest representation that parses back to the same `f64`.
pub(crate) fn format_value(v: f64) -> String {
    format!("{v:?}")
}
