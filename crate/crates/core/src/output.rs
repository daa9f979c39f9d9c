//! Scored output table (`ops.csv`) and JSON artifact helpers.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ops_risk::{alert_state, OpsRiskRow, ThresholdSet};
use crate::record::{parse_label, AlertState, SampleRecord};

/// One row of the per-plant output series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredRow {
    pub plant_id: String,
    pub timestamp: NaiveDate,
    pub group_key: String,
    pub hab_prob: Option<f64>,
    pub det_mean: Option<f64>,
    pub oci: Option<f64>,
    pub coverage: f64,
    pub oci_adj: f64,
    pub season_adj: f64,
    pub blend: Option<f64>,
    pub discount: Option<f64>,
    pub ops_risk: Option<f64>,
    /// Empty for unscorable rows.
    pub state: Option<AlertState>,
    pub used_fallback: bool,
    pub chlor_a: Option<f64>,
    pub nflh: Option<f64>,
    pub kd490: Option<f64>,
    pub sst: Option<f64>,
    pub y_final: Option<bool>,
}

impl ScoredRow {
    /// `hab_prob` is taken from the record; the record is expected to carry
    /// the scorer output already.
    pub fn new(r: &SampleRecord, ops: &OpsRiskRow, thresholds: &ThresholdSet) -> Self {
        ScoredRow {
            plant_id: r.plant_id.clone(),
            timestamp: r.timestamp,
            group_key: r.group_key.clone(),
            hab_prob: r.hab_prob,
            det_mean: r.det_mean,
            oci: ops.oci,
            coverage: ops.coverage,
            oci_adj: ops.oci_adj,
            season_adj: ops.season_adj,
            blend: ops.blend,
            discount: ops.discount,
            ops_risk: ops.ops_risk,
            state: ops.ops_risk.map(|p| alert_state(p, thresholds)),
            used_fallback: ops.used_fallback,
            chlor_a: r.chlor_a,
            nflh: r.nflh,
            kd490: r.kd490,
            sst: r.sst,
            y_final: r.y_final,
        }
    }

    /// `YYYY-MM` key used for monthly aggregation.
    pub fn year_month(&self) -> String {
        self.timestamp.format("%Y-%m").to_string()
    }
}

pub fn read_scored<R: Read>(reader: R) -> Result<Vec<ScoredRow>> {
    let mut rdr = csv::Reader::from_reader(reader);
    rdr.deserialize()
        .enumerate()
        .map(|(i, row)| row.map_err(|e| Error::from(e).at_row(i + 1)))
        .collect()
}

pub fn load_scored(path: impl AsRef<Path>) -> Result<Vec<ScoredRow>> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    read_scored(f)
}

pub fn write_scored_to<W: Write>(writer: W, rows: &[ScoredRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn write_scored(path: impl AsRef<Path>, rows: &[ScoredRow]) -> Result<()> {
    let path = path.as_ref();
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    write_scored_to(BufWriter::new(f), rows)
}

/// `(score, label)` pairs from two named columns of any CSV; rows where
/// either cell is empty are skipped.
pub fn read_score_columns(
    path: impl AsRef<Path>,
    score_col: &str,
    label_col: &str,
) -> Result<(Vec<f64>, Vec<bool>)> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(f);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| {
            Error::InvalidInput(format!("column `{name}` not found in {}", path.display()))
        })
    };
    let (si, li) = (col(score_col)?, col(label_col)?);
    let (mut scores, mut labels) = (Vec::new(), Vec::new());
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let (s, l) = (
            row.get(si).unwrap_or("").trim(),
            row.get(li).unwrap_or("").trim(),
        );
        if s.is_empty() || l.is_empty() {
            continue;
        }
        let score: f64 = s.parse().map_err(|_| {
            Error::BadNumber {
                field: "score",
                value: s.to_string(),
            }
            .at_row(i + 1)
        })?;
        scores.push(score);
        labels.push(parse_label("label", l).map_err(|e| e.at_row(i + 1))?);
    }
    Ok((scores, labels))
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    std::fs::write(path, s).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops_risk::{blend_and_discount, OpsRiskConfig};

    #[test]
    fn scored_rows_round_trip_through_csv() {
        let cfg = OpsRiskConfig::default();
        let t = cfg.base_thresholds();
        let mut r = SampleRecord::new(
            "A",
            NaiveDate::from_ymd_opt(2025, 3, 4).unwrap(),
            "S2_20250304_T40Q",
        );
        r.hab_prob = Some(0.1 + 0.2);
        r.det_mean = Some(0.9);
        r.chlor_a = Some(3.25);
        let unscorable = SampleRecord::new("B", r.timestamp, "S2_20250304_T40Q");
        let rows = vec![
            ScoredRow::new(
                &r,
                &blend_and_discount(r.hab_prob, r.det_mean, 0.5, 0.6, &cfg),
                &t,
            ),
            ScoredRow::new(
                &unscorable,
                &blend_and_discount(None, None, 0.5, 0.5, &cfg),
                &t,
            ),
        ];
        let mut buf = Vec::new();
        write_scored_to(&mut buf, &rows).unwrap();
        let back = read_scored(buf.as_slice()).unwrap();
        assert_eq!(back, rows);
        assert_eq!(back[1].state, None);
        assert_eq!(back[0].year_month(), "2025-03");
    }
}
