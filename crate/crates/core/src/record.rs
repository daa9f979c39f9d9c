//! Shared record types and the canonical missing-value rules.
//!
//! A [`SampleRecord`] is one (plant, date) row of the training or inference
//! table. Missing values are always `None`; zero placeholders in the ocean
//! colour drivers `chlor_a`, `kd490` and `nflh` are converted to `None` during
//! validation. `sst` zeros are kept as genuine values.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Column order of the tabular interchange format.
pub const TABLE_HEADER: [&str; 15] = [
    "plant_id",
    "timestamp",
    "group_key",
    "chlor_a",
    "kd490",
    "nflh",
    "sst",
    "fai_mean",
    "ndwi_mean",
    "rednir_mean",
    "det_mean",
    "hab_prob",
    "y_trusted",
    "y_weak",
    "y_final",
];

/// The four ocean-colour / thermal drivers, in operational-weight order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Driver {
    ChlorA,
    Nflh,
    Kd490,
    Sst,
}

impl Driver {
    pub const ALL: [Driver; 4] = [Driver::ChlorA, Driver::Nflh, Driver::Kd490, Driver::Sst];

    pub fn name(self) -> &'static str {
        match self {
            Driver::ChlorA => "chlor_a",
            Driver::Nflh => "nflh",
            Driver::Kd490 => "kd490",
            Driver::Sst => "sst",
        }
    }

    pub fn index(self) -> usize {
        match self {
            Driver::ChlorA => 0,
            Driver::Nflh => 1,
            Driver::Kd490 => 2,
            Driver::Sst => 3,
        }
    }
}

impl fmt::Display for Driver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Two-tier alert state. Ordering is `Normal < Watch < Action`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AlertState {
    Normal,
    Watch,
    Action,
}

impl AlertState {
    pub fn as_str(self) -> &'static str {
        match self {
            AlertState::Normal => "NORMAL",
            AlertState::Watch => "WATCH",
            AlertState::Action => "ACTION",
        }
    }
}

impl fmt::Display for AlertState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AlertState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "NORMAL" => Ok(AlertState::Normal),
            "WATCH" => Ok(AlertState::Watch),
            "ACTION" => Ok(AlertState::Action),
            other => Err(Error::InvalidInput(format!(
                "unknown alert state `{other}`"
            ))),
        }
    }
}

/// Label columns plus the intermediate products of label mining.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LabelSet {
    pub y_trusted: Option<bool>,
    pub y_weak: Option<bool>,
    pub y_final: Option<bool>,
    /// Heuristic anomaly score; 0 or 1 for the chlorophyll threshold rule.
    pub h_score: f64,
    pub quality_pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub plant_id: String,
    pub timestamp: NaiveDate,
    pub month: u32,
    pub group_key: String,
    pub chlor_a: Option<f64>,
    pub kd490: Option<f64>,
    pub nflh: Option<f64>,
    pub sst: Option<f64>,
    pub fai_mean: Option<f64>,
    pub ndwi_mean: Option<f64>,
    pub rednir_mean: Option<f64>,
    pub det_mean: Option<f64>,
    pub hab_prob: Option<f64>,
    pub y_trusted: Option<bool>,
    pub y_weak: Option<bool>,
    pub y_final: Option<bool>,
}

impl SampleRecord {
    /// Builds a record with every optional field missing.
    pub fn new(
        plant_id: impl Into<String>,
        timestamp: NaiveDate,
        group_key: impl Into<String>,
    ) -> Self {
        SampleRecord {
            plant_id: plant_id.into(),
            timestamp,
            month: timestamp.month(),
            group_key: group_key.into(),
            chlor_a: None,
            kd490: None,
            nflh: None,
            sst: None,
            fai_mean: None,
            ndwi_mean: None,
            rednir_mean: None,
            det_mean: None,
            hab_prob: None,
            y_trusted: None,
            y_weak: None,
            y_final: None,
        }
    }

    pub fn driver(&self, d: Driver) -> Option<f64> {
        match d {
            Driver::ChlorA => self.chlor_a,
            Driver::Nflh => self.nflh,
            Driver::Kd490 => self.kd490,
            Driver::Sst => self.sst,
        }
    }

    pub fn drivers(&self) -> [Option<f64>; 4] {
        Driver::ALL.map(|d| self.driver(d))
    }

    /// Value of a numeric column by its table name.
    pub fn numeric(&self, column: &str) -> Option<f64> {
        match column {
            "chlor_a" => self.chlor_a,
            "kd490" => self.kd490,
            "nflh" => self.nflh,
            "sst" => self.sst,
            "fai_mean" => self.fai_mean,
            "ndwi_mean" => self.ndwi_mean,
            "rednir_mean" => self.rednir_mean,
            "det_mean" => self.det_mean,
            "hab_prob" => self.hab_prob,
            _ => None,
        }
    }

    pub fn labels(&self) -> LabelSet {
        LabelSet {
            y_trusted: self.y_trusted,
            y_weak: self.y_weak,
            y_final: self.y_final,
            ..LabelSet::default()
        }
    }

    /// Validates a raw field map (column name to cell text).
    ///
    /// Empty or absent optional cells are missing. Zero `chlor_a`, `kd490`
    /// and `nflh` are placeholders and become missing.
    pub fn from_fields(raw: &HashMap<String, String>) -> Result<Self> {
        let get = |k: &str| raw.get(k).map(|v| v.trim()).filter(|v| !v.is_empty());
        Self::from_lookup(get)
    }

    /// Validates one CSV row laid out in [`TABLE_HEADER`] order.
    pub fn from_row(row: &csv::StringRecord) -> Result<Self> {
        let get = |k: &str| {
            TABLE_HEADER
                .iter()
                .position(|h| *h == k)
                .and_then(|i| row.get(i))
                .map(str::trim)
                .filter(|v| !v.is_empty())
        };
        Self::from_lookup(get)
    }

    fn from_lookup<'a>(get: impl Fn(&str) -> Option<&'a str>) -> Result<Self> {
        let plant_id = get("plant_id").ok_or(Error::MissingField("plant_id"))?;
        let ts = get("timestamp").ok_or(Error::MissingField("timestamp"))?;
        let group_key = get("group_key").ok_or(Error::MissingField("group_key"))?;
        let timestamp = parse_date(ts)?;

        let mut r = SampleRecord::new(plant_id, timestamp, group_key);
        r.chlor_a = placeholder_zero(number(&get, "chlor_a")?);
        r.kd490 = placeholder_zero(number(&get, "kd490")?);
        r.nflh = placeholder_zero(number(&get, "nflh")?);
        r.sst = number(&get, "sst")?;
        r.fai_mean = number(&get, "fai_mean")?;
        r.ndwi_mean = number(&get, "ndwi_mean")?;
        r.rednir_mean = number(&get, "rednir_mean")?;
        r.det_mean = probability(&get, "det_mean")?;
        r.hab_prob = probability(&get, "hab_prob")?;
        r.y_trusted = label(&get, "y_trusted")?;
        r.y_weak = label(&get, "y_weak")?;
        r.y_final = label(&get, "y_final")?;
        Ok(r)
    }

    /// Cells in [`TABLE_HEADER`] order; missing values are empty strings.
    pub fn to_row(&self) -> Vec<String> {
        vec![
            self.plant_id.clone(),
            self.timestamp.format("%Y-%m-%d").to_string(),
            self.group_key.clone(),
            fmt_opt(self.chlor_a),
            fmt_opt(self.kd490),
            fmt_opt(self.nflh),
            fmt_opt(self.sst),
            fmt_opt(self.fai_mean),
            fmt_opt(self.ndwi_mean),
            fmt_opt(self.rednir_mean),
            fmt_opt(self.det_mean),
            fmt_opt(self.hab_prob),
            fmt_label(self.y_trusted),
            fmt_label(self.y_weak),
            fmt_label(self.y_final),
        ]
    }
}

/// Accepts `YYYY-MM-DD`, optionally followed by a time part (`T...` or ` ...`).
pub fn parse_date(s: &str) -> Result<NaiveDate> {
    let day = match s.char_indices().nth(10) {
        Some((i, 'T')) | Some((i, ' ')) => &s[..i],
        _ => s,
    };
    NaiveDate::parse_from_str(day, "%Y-%m-%d").map_err(|_| Error::BadDate(s.to_string()))
}

pub(crate) fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub(crate) fn fmt_label(v: Option<bool>) -> String {
    match v {
        Some(true) => "1".into(),
        Some(false) => "0".into(),
        None => String::new(),
    }
}

fn placeholder_zero(v: Option<f64>) -> Option<f64> {
    v.filter(|x| *x != 0.0)
}

fn number<'a>(get: &impl Fn(&str) -> Option<&'a str>, field: &'static str) -> Result<Option<f64>> {
    let Some(s) = get(field) else {
        return Ok(None);
    };
    let v: f64 = s.parse().map_err(|_| Error::BadNumber {
        field,
        value: s.to_string(),
    })?;
    if !v.is_finite() {
        return Err(Error::BadNumber {
            field,
            value: s.to_string(),
        });
    }
    Ok(Some(v))
}

fn probability<'a>(
    get: &impl Fn(&str) -> Option<&'a str>,
    field: &'static str,
) -> Result<Option<f64>> {
    let v = number(get, field)?;
    match v {
        Some(p) if !(0.0..=1.0).contains(&p) => Err(Error::OutOfRange { field, value: p }),
        _ => Ok(v),
    }
}

fn label<'a>(get: &impl Fn(&str) -> Option<&'a str>, field: &'static str) -> Result<Option<bool>> {
    get(field).map(|s| parse_label(field, s)).transpose()
}

/// Binary label cell: `1`, `1.0`, `true`, `0`, `0.0` or `false`.
pub fn parse_label(field: &'static str, s: &str) -> Result<bool> {
    match s {
        "1" | "1.0" | "true" => Ok(true),
        "0" | "0.0" | "false" => Ok(false),
        _ => Err(Error::BadLabel {
            field,
            value: s.to_string(),
        }),
    }
}
