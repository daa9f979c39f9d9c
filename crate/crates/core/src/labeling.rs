//! Heuristic label mining and the trusted/weak label merge.
//!
//! The heuristic flags a record when its chlorophyll-a monthly anomaly
//! z-score reaches `z_hi`. A flagged record becomes a weak positive only if
//! enough drivers are present. The final label is the OR of the trusted and
//! weak labels, with a missing trusted label counting as 0. Trusted labels
//! are carried through unchanged.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::monthly::MonthlyStats;
use crate::record::{Driver, LabelSet, SampleRecord};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MiningConfig {
    pub z_hi: f64,
    pub min_quality: usize,
}

impl Default for MiningConfig {
    fn default() -> Self {
        MiningConfig {
            z_hi: 2.0,
            min_quality: 2,
        }
    }
}

impl MiningConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.z_hi > 0.0 && self.z_hi.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "z_hi must be > 0, got {}",
                self.z_hi
            )));
        }
        if !(1..=4).contains(&self.min_quality) {
            return Err(Error::InvalidInput(format!(
                "min_quality must be in 1..=4, got {}",
                self.min_quality
            )));
        }
        Ok(())
    }
}

/// 1 when the chlorophyll-a monthly z-score is at least `z_hi`.
pub fn heuristic_score(record: &SampleRecord, stats: &MonthlyStats, cfg: &MiningConfig) -> bool {
    record
        .chlor_a
        .and_then(|x| stats.z(Driver::ChlorA, record.month, x))
        .is_some_and(|z| z >= cfg.z_hi)
}

/// Driver availability check: at least `min_quality` of the four drivers present.
pub fn quality(record: &SampleRecord, cfg: &MiningConfig) -> bool {
    record.drivers().iter().filter(|d| d.is_some()).count() >= cfg.min_quality
}

pub fn label_record(record: &SampleRecord, stats: &MonthlyStats, cfg: &MiningConfig) -> LabelSet {
    let h = heuristic_score(record, stats, cfg);
    let q = quality(record, cfg);
    let weak = h && q;
    LabelSet {
        y_trusted: record.y_trusted,
        y_weak: Some(weak),
        y_final: Some(record.y_trusted == Some(true) || weak),
        h_score: if h { 1.0 } else { 0.0 },
        quality_pass: q,
    }
}

/// Mines labels using monthly statistics fitted on the given records.
pub fn mine_labels(records: &[SampleRecord], cfg: &MiningConfig) -> Result<Vec<SampleRecord>> {
    let stats = MonthlyStats::fit(records);
    mine_labels_with(records, &stats, cfg)
}

/// Mines labels with externally fitted statistics, e.g. from a training
/// partition only.
pub fn mine_labels_with(
    records: &[SampleRecord],
    stats: &MonthlyStats,
    cfg: &MiningConfig,
) -> Result<Vec<SampleRecord>> {
    cfg.validate()?;
    Ok(records
        .iter()
        .map(|r| {
            let l = label_record(r, stats, cfg);
            SampleRecord {
                y_weak: l.y_weak,
                y_final: l.y_final,
                ..r.clone()
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monthly::MonthCell;
    use chrono::NaiveDate;
    use proptest::prelude::*;

    fn rec(chlor: Option<f64>) -> SampleRecord {
        let mut r = SampleRecord::new("A", NaiveDate::from_ymd_opt(2021, 7, 3).unwrap(), "g");
        r.chlor_a = chlor;
        r
    }

    fn july(median: f64, iqr: f64) -> MonthlyStats {
        let mut s = MonthlyStats::default();
        s.insert(Driver::ChlorA, 7, MonthCell { median, iqr, n: 20 });
        s
    }

    #[test]
    fn heuristic_cases() {
        let cfg = MiningConfig::default();
        let s = july(0.3, 0.1);
        assert!(!heuristic_score(&rec(Some(0.3)), &s, &cfg));
        // z = (0.55 - 0.3) / 0.1 = 2.5
        assert!(heuristic_score(&rec(Some(0.55)), &s, &cfg));
        assert!(!heuristic_score(&rec(None), &s, &cfg));
    }

    #[test]
    fn quality_cases() {
        let cfg = MiningConfig::default();
        let mut r = rec(Some(1.0));
        assert!(!quality(&r, &cfg));
        r.sst = Some(28.0);
        assert!(quality(&r, &cfg), "boundary is inclusive");
        r.kd490 = Some(0.1);
        r.nflh = Some(0.1);
        assert!(quality(&r, &cfg));
    }

    #[test]
    fn or_merge_cases() {
        let cfg = MiningConfig::default();
        let s = july(0.3, 0.1);
        let mut quiet = rec(Some(0.3));
        quiet.sst = Some(28.0);
        let mut flagged = rec(Some(0.9));
        flagged.sst = Some(28.0);

        quiet.y_trusted = Some(true);
        assert_eq!(label_record(&quiet, &s, &cfg).y_final, Some(true));

        flagged.y_trusted = None;
        let l = label_record(&flagged, &s, &cfg);
        assert_eq!((l.y_weak, l.y_final), (Some(true), Some(true)));

        quiet.y_trusted = Some(false);
        assert_eq!(label_record(&quiet, &s, &cfg).y_final, Some(false));

        // trusted negative does not veto a weak positive
        flagged.y_trusted = Some(false);
        let l = label_record(&flagged, &s, &cfg);
        assert_eq!((l.y_trusted, l.y_final), (Some(false), Some(true)));
    }

    #[test]
    fn weak_needs_quality() {
        let cfg = MiningConfig::default();
        let l = label_record(&rec(Some(0.9)), &july(0.3, 0.1), &cfg);
        assert_eq!(l.h_score, 1.0);
        assert!(!l.quality_pass);
        assert_eq!(l.y_weak, Some(false));
    }

    #[test]
    fn config_validation() {
        assert!(MiningConfig {
            z_hi: 0.0,
            min_quality: 2
        }
        .validate()
        .is_err());
        assert!(MiningConfig {
            z_hi: 2.0,
            min_quality: 5
        }
        .validate()
        .is_err());
        assert!(MiningConfig {
            z_hi: 2.0,
            min_quality: 0
        }
        .validate()
        .is_err());
    }

    fn arb_records() -> impl Strategy<Value = Vec<SampleRecord>> {
        proptest::collection::vec(
            (
                1u32..=12,
                proptest::option::of(0.05f64..10.0),
                proptest::option::of(20.0f64..33.0),
                proptest::option::of(any::<bool>()),
            ),
            1..60,
        )
        .prop_map(|rows| {
            rows.into_iter()
                .map(|(m, c, sst, t)| {
                    let mut r =
                        SampleRecord::new("A", NaiveDate::from_ymd_opt(2020, m, 1).unwrap(), "g");
                    r.chlor_a = c;
                    r.sst = sst;
                    r.kd490 = Some(0.05);
                    r.y_trusted = t;
                    r
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn raising_threshold_never_adds_weak_positives(recs in arb_records(), lo in 0.1f64..3.0, extra in 0.0f64..3.0) {
            let count = |z_hi| mine_labels(&recs, &MiningConfig { z_hi, min_quality: 2 })
                .unwrap().iter().filter(|r| r.y_weak == Some(true)).count();
            prop_assert!(count(lo + extra) <= count(lo));
        }

        #[test]
        fn final_dominates_and_is_idempotent(recs in arb_records()) {
            let cfg = MiningConfig::default();
            let once = mine_labels(&recs, &cfg).unwrap();
            for (r, orig) in once.iter().zip(&recs) {
                let fin = r.y_final == Some(true);
                prop_assert!(fin || r.y_trusted != Some(true));
                prop_assert!(fin || r.y_weak != Some(true));
                prop_assert_eq!(r.y_trusted, orig.y_trusted);
            }
            prop_assert_eq!(&mine_labels(&once, &cfg).unwrap(), &once);
        }
    }
}
