//! Table loading, the feature-range report and month seasonality encoding.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::record::{SampleRecord, TABLE_HEADER};
use crate::stats;

/// Numeric columns reported by [`summarize_ranges`], in table order.
pub const RANGE_COLUMNS: [&str; 9] = [
    "chlor_a",
    "kd490",
    "nflh",
    "sst",
    "fai_mean",
    "ndwi_mean",
    "rednir_mean",
    "det_mean",
    "hab_prob",
];

/// Per-column statistics over present values. The statistics are `None`
/// when a column has no present values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnRange {
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub mean: Option<f64>,
    pub sd: Option<f64>,
    pub n_present: usize,
}

impl ColumnRange {
    pub fn from_values(values: &[f64]) -> Self {
        let min = values.iter().copied().reduce(f64::min);
        let max = values.iter().copied().reduce(f64::max);
        ColumnRange {
            min,
            max,
            mean: stats::mean(values),
            sd: stats::sample_sd(values),
            n_present: values.len(),
        }
    }
}

/// Serialized as `{column: {min, max, mean, sd, n_present}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(transparent)]
pub struct RangeSummary {
    pub columns: IndexMap<String, ColumnRange>,
}

impl RangeSummary {
    pub fn get(&self, column: &str) -> Option<&ColumnRange> {
        self.columns.get(column)
    }
}

pub fn summarize_ranges(records: &[SampleRecord]) -> RangeSummary {
    let columns = RANGE_COLUMNS
        .iter()
        .map(|&c| {
            let mut values: Vec<f64> = records.iter().filter_map(|r| r.numeric(c)).collect();
            // Sorting makes the floating-point sums independent of row order.
            values.sort_by(f64::total_cmp);
            (c.to_string(), ColumnRange::from_values(&values))
        })
        .collect();
    RangeSummary { columns }
}

/// `(sin(2πm/12), cos(2πm/12))` for a calendar month 1..=12.
pub fn season_encode(month: u32) -> Result<(f64, f64)> {
    if !(1..=12).contains(&month) {
        return Err(Error::InvalidInput(format!("month {month} outside 1..=12")));
    }
    let angle = 2.0 * PI * month as f64 / 12.0;
    Ok((angle.sin(), angle.cos()))
}

pub fn load_table(path: impl AsRef<Path>) -> Result<Vec<SampleRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_table(file)
}

/// Reads a table from any reader. The header must match [`TABLE_HEADER`]
/// exactly; row errors carry the 1-based data row index.
pub fn read_table<R: Read>(reader: R) -> Result<Vec<SampleRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    let found: Vec<&str> = header.iter().map(str::trim).collect();
    if found != TABLE_HEADER {
        return Err(Error::HeaderMismatch {
            expected: TABLE_HEADER.join(","),
            found: found.join(","),
        });
    }
    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| Error::from(e).at_row(i + 1))?;
        out.push(SampleRecord::from_row(&row).map_err(|e| e.at_row(i + 1))?);
    }
    Ok(out)
}

pub fn write_table(path: impl AsRef<Path>, records: &[SampleRecord]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_table_to(file, records)
}

pub fn write_table_to<W: Write>(writer: W, records: &[SampleRecord]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(TABLE_HEADER)?;
    for r in records {
        wtr.write_record(r.to_row())?;
    }
    wtr.flush().map_err(|e| Error::io("<table>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use chrono::NaiveDate;
    use proptest::prelude::*;

    const CSV3: &str = "\
plant_id,timestamp,group_key,chlor_a,kd490,nflh,sst,fai_mean,ndwi_mean,rednir_mean,det_mean,hab_prob,y_trusted,y_weak,y_final
A,2024-01-02,g1,0.3,0.05,0.1,27.0,0.02,-0.1,0.9,0.2,,1,,
A,2024-01-05,g2,0,0.06,0.12,27.5,,,,,,,,
B,2024-01-05,g2,0.0,0.07,0.0,28.0,0.03,-0.2,0.85,0.4,0.5,0,0,0
";

    #[test]
    fn loads_rows_in_order() {
        let recs = read_table(CSV3.as_bytes()).unwrap();
        assert_eq!(recs.len(), 3);
        assert_eq!(recs[0].chlor_a, Some(0.3));
        assert_eq!(recs[2].plant_id, "B");
    }

    #[test]
    fn zero_chlorophyll_column_becomes_missing() {
        let recs = read_table(CSV3.as_bytes()).unwrap();
        assert_eq!(recs[1].chlor_a, None);
        assert_eq!(recs[2].chlor_a, None);
        assert_eq!(recs[2].nflh, None);
    }

    #[test]
    fn missing_group_key_header_is_rejected() {
        let bad = CSV3.replacen("group_key,", "", 1);
        assert!(matches!(
            read_table(bad.as_bytes()),
            Err(Error::HeaderMismatch { .. })
        ));
    }

    #[test]
    fn row_errors_carry_index() {
        let bad = CSV3.replace("0.5,0,0,0", "1.5,0,0,0");
        match read_table(bad.as_bytes()) {
            Err(Error::Row { row, .. }) => assert_eq!(row, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    fn with_chlor(values: &[f64]) -> Vec<SampleRecord> {
        let d = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
        values
            .iter()
            .map(|&v| {
                let mut r = SampleRecord::new("A", d, "g");
                r.chlor_a = Some(v);
                r
            })
            .collect()
    }

    #[test]
    fn constant_column() {
        let s = summarize_ranges(&with_chlor(&[1.0, 1.0, 1.0]));
        let c = s.get("chlor_a").unwrap();
        assert_eq!(
            (c.min, c.max, c.mean, c.sd),
            (Some(1.0), Some(1.0), Some(1.0), Some(0.0))
        );
        assert_eq!(c.n_present, 3);
        let k = s.get("kd490").unwrap();
        assert_eq!(k.n_present, 0);
        assert_eq!(k.min, None);
    }

    #[test]
    fn envelope_min_max() {
        let s = summarize_ranges(&with_chlor(&[0.044, 9.972]));
        let c = s.get("chlor_a").unwrap();
        assert_eq!(c.min, Some(0.044));
        assert_eq!(c.max, Some(9.972));
    }

    #[test]
    fn sample_sd_convention() {
        let s = summarize_ranges(&with_chlor(&[1.0, 3.0]));
        let c = s.get("chlor_a").unwrap();
        assert_eq!(c.mean, Some(2.0));
        // sqrt(((1-2)^2 + (3-2)^2) / (2-1))
        assert_abs_diff_eq!(c.sd.unwrap(), 2f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn season_encoding_values() {
        let (s, c) = season_encode(3).unwrap();
        assert_abs_diff_eq!(s, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c, 0.0, epsilon = 1e-12);
        let (s, c) = season_encode(12).unwrap();
        assert_abs_diff_eq!(s, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c, 1.0, epsilon = 1e-12);
        let (s, c) = season_encode(1).unwrap();
        assert_abs_diff_eq!(s, 0.5, epsilon = 1e-7);
        assert_abs_diff_eq!(c, 0.8660254, epsilon = 1e-7);
        assert!(season_encode(0).is_err());
        assert!(season_encode(13).is_err());
    }

    #[test]
    fn unit_circle_for_all_months() {
        for m in 1..=12 {
            let (s, c) = season_encode(m).unwrap();
            assert!((s * s + c * c - 1.0).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn ranges_are_permutation_invariant(
            values in proptest::collection::vec(-100.0f64..100.0, 1..40),
            seed in any::<u64>(),
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut shuffled = values.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            // zero would be read as a placeholder only at validation time; here it is a value
            let a = summarize_ranges(&with_chlor(&values));
            let b = summarize_ranges(&with_chlor(&shuffled));
            prop_assert_eq!(&a, &b);
            let c = a.get("chlor_a").unwrap();
            prop_assert!(c.min.unwrap() <= c.mean.unwrap() + 1e-12);
            prop_assert!(c.mean.unwrap() <= c.max.unwrap() + 1e-12);
            prop_assert!(c.sd.unwrap() >= 0.0);
        }
    }
}
