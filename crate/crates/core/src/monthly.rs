//! Per-(driver, calendar month) median and IQR, the basis of every monthly
//! anomaly z-score in the crate.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::record::{Driver, SampleRecord};
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonthCell {
    pub median: f64,
    pub iqr: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MonthlyStats {
    pub cells: BTreeMap<Driver, BTreeMap<u32, MonthCell>>,
}

impl MonthlyStats {
    /// Fits median and IQR (linear-interpolation quartiles) from present values.
    pub fn fit<'a>(records: impl IntoIterator<Item = &'a SampleRecord>) -> Self {
        let mut pools: BTreeMap<(Driver, u32), Vec<f64>> = BTreeMap::new();
        for r in records {
            for d in Driver::ALL {
                if let Some(x) = r.driver(d) {
                    pools.entry((d, r.month)).or_default().push(x);
                }
            }
        }
        let mut cells: BTreeMap<Driver, BTreeMap<u32, MonthCell>> = BTreeMap::new();
        for ((d, m), values) in pools {
            let sorted = stats::sorted_finite(&values);
            if sorted.is_empty() {
                continue;
            }
            let q = |p| stats::quantile_linear(&sorted, p).unwrap();
            cells.entry(d).or_default().insert(
                m,
                MonthCell {
                    median: q(0.5),
                    iqr: q(0.75) - q(0.25),
                    n: sorted.len(),
                },
            );
        }
        MonthlyStats { cells }
    }

    pub fn cell(&self, driver: Driver, month: u32) -> Option<&MonthCell> {
        self.cells.get(&driver)?.get(&month)
    }

    pub fn insert(&mut self, driver: Driver, month: u32, cell: MonthCell) {
        self.cells.entry(driver).or_default().insert(month, cell);
    }

    /// Unclipped `(x - median) / IQR`. A zero IQR gives z = 0; a missing
    /// month cell gives `None`.
    pub fn z(&self, driver: Driver, month: u32, x: f64) -> Option<f64> {
        let c = self.cell(driver, month)?;
        if c.iqr > 0.0 {
            Some((x - c.median) / c.iqr)
        } else {
            Some(0.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    #[test]
    fn fits_median_and_iqr_per_month() {
        let d = NaiveDate::from_ymd_opt(2020, 5, 1).unwrap();
        let recs: Vec<SampleRecord> = [1.0, 2.0, 3.0, 4.0, 5.0]
            .iter()
            .map(|&v| {
                let mut r = SampleRecord::new("A", d, "g");
                r.chlor_a = Some(v);
                r
            })
            .collect();
        let s = MonthlyStats::fit(&recs);
        let c = s.cell(Driver::ChlorA, 5).unwrap();
        assert_eq!((c.median, c.iqr, c.n), (3.0, 2.0, 5));
        assert!(s.cell(Driver::ChlorA, 6).is_none());
        assert!(s.cell(Driver::Sst, 5).is_none());
        assert_eq!(s.z(Driver::ChlorA, 5, 7.0), Some(2.0));
    }

    #[test]
    fn zero_iqr_gives_zero_z() {
        let mut s = MonthlyStats::default();
        s.insert(
            Driver::Sst,
            1,
            MonthCell {
                median: 28.0,
                iqr: 0.0,
                n: 3,
            },
        );
        assert_eq!(s.z(Driver::Sst, 1, 35.0), Some(0.0));
    }

    #[test]
    fn serializes_as_nested_maps() {
        let mut s = MonthlyStats::default();
        s.insert(
            Driver::ChlorA,
            3,
            MonthCell {
                median: 0.3,
                iqr: 0.1,
                n: 10,
            },
        );
        let json = serde_json::to_string(&s).unwrap();
        assert!(json.contains("\"chlor_a\":{\"3\""), "{json}");
        let back: MonthlyStats = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
    }
}
