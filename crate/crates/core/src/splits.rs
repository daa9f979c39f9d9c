//! Leakage-safe cross-validation assignments.
//!
//! Group-safe folds keep every scene group (`group_key`) inside one fold.
//! Temporal folds are expanding-window forward splits: each pair trains on
//! everything up to a cutoff and tests on the window up to the next cutoff.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::record::SampleRecord;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    pub k: usize,
    pub seed: u64,
    /// Fold id for each record index.
    pub fold_of: Vec<usize>,
}

impl FoldAssignment {
    /// `(train, test)` record indices for fold `f`.
    pub fn split(&self, f: usize) -> (Vec<usize>, Vec<usize>) {
        (0..self.fold_of.len()).partition(|&i| self.fold_of[i] != f)
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.fold_of {
            sizes[f] += 1;
        }
        sizes
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemporalFold {
    pub cutoff: NaiveDate,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemporalSplit {
    pub pairs: Vec<TemporalFold>,
    /// One entry per skipped (empty) window.
    pub warnings: Vec<String>,
}

/// On-disk form of either split mode.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Folds {
    GroupSafe(FoldAssignment),
    Temporal(TemporalSplit),
}

impl Folds {
    /// `(train, test)` index pairs in fold order.
    pub fn pairs(&self) -> Vec<(Vec<usize>, Vec<usize>)> {
        match self {
            Folds::GroupSafe(a) => (0..a.k).map(|f| a.split(f)).collect(),
            Folds::Temporal(t) => t
                .pairs
                .iter()
                .map(|p| (p.train.clone(), p.test.clone()))
                .collect(),
        }
    }
}

/// Greedy group-safe K-fold assignment.
///
/// Groups are ordered by size, largest first; equal-size groups are ordered
/// by a seeded shuffle. Each group goes to the fold with the fewest records so
/// far, ties to the lower fold id.
pub fn group_safe_folds(records: &[SampleRecord], k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(Error::InvalidInput(format!(
            "fold count must be >= 2, got {k}"
        )));
    }
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        groups.entry(r.group_key.as_str()).or_default().push(i);
    }
    if groups.len() < k {
        return Err(Error::TooFewGroups {
            needed: k,
            found: groups.len(),
        });
    }
    let mut order: Vec<Vec<usize>> = groups.into_values().collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    order.sort_by_key(|g| std::cmp::Reverse(g.len()));

    let mut sizes = vec![0usize; k];
    let mut fold_of = vec![0usize; records.len()];
    for members in order {
        let target = (0..k).min_by_key(|&f| (sizes[f], f)).unwrap();
        sizes[target] += members.len();
        for i in members {
            fold_of[i] = target;
        }
    }
    Ok(FoldAssignment { k, seed, fold_of })
}

/// Expanding-window temporal pairs: train `t <= c_k`, test `c_k < t <= c_{k+1}`
/// (the final window is open-ended). Empty windows are skipped with a warning.
pub fn temporal_folds(records: &[SampleRecord], cutoffs: &[NaiveDate]) -> Result<TemporalSplit> {
    if cutoffs.is_empty() {
        return Err(Error::InvalidInput(
            "temporal split needs at least one cutoff".into(),
        ));
    }
    if cutoffs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput(
            "cutoffs must be strictly increasing".into(),
        ));
    }
    let mut pairs = Vec::new();
    let mut warnings = Vec::new();
    for (k, &cut) in cutoffs.iter().enumerate() {
        let next = cutoffs.get(k + 1).copied();
        let train: Vec<usize> = (0..records.len())
            .filter(|&i| records[i].timestamp <= cut)
            .collect();
        let test: Vec<usize> = (0..records.len())
            .filter(|&i| {
                let t = records[i].timestamp;
                t > cut && next.is_none_or(|n| t <= n)
            })
            .collect();
        if train.is_empty() || test.is_empty() {
            let msg = format!(
                "cutoff {cut}: skipped ({} train, {} test records)",
                train.len(),
                test.len()
            );
            log::warn!("{msg}");
            warnings.push(msg);
            continue;
        }
        pairs.push(TemporalFold {
            cutoff: cut,
            train,
            test,
        });
    }
    Ok(TemporalSplit { pairs, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn date(y: i32, m: u32, d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, d).unwrap()
    }

    fn grouped(sizes: &[usize]) -> Vec<SampleRecord> {
        let mut out = Vec::new();
        for (g, &n) in sizes.iter().enumerate() {
            for _ in 0..n {
                out.push(SampleRecord::new("A", date(2020, 1, 1), format!("g{g}")));
            }
        }
        out
    }

    #[test]
    fn equal_groups_balance_perfectly() {
        let a = group_safe_folds(&grouped(&[10, 10, 10, 10]), 2, 17).unwrap();
        assert_eq!(a.fold_sizes(), vec![20, 20]);
    }

    #[test]
    fn greedy_largest_first() {
        // 5 -> f0, 3 -> f1, 2 -> f1 (3 < 5), 2 -> f0 on the 5/5 tie
        let a = group_safe_folds(&grouped(&[5, 3, 2, 2]), 2, 0).unwrap();
        assert_eq!(a.fold_sizes(), vec![7, 5]);
    }

    #[test]
    fn too_few_groups() {
        assert!(matches!(
            group_safe_folds(&grouped(&[4]), 2, 1),
            Err(Error::TooFewGroups {
                needed: 2,
                found: 1
            })
        ));
        assert!(group_safe_folds(&grouped(&[4, 4]), 1, 1).is_err());
    }

    fn dated(days: &[NaiveDate]) -> Vec<SampleRecord> {
        days.iter()
            .map(|&d| SampleRecord::new("A", d, "g"))
            .collect()
    }

    #[test]
    fn single_cutoff_splits_reference_from_current_year() {
        let days: Vec<NaiveDate> = (2017..=2025).map(|y| date(y, 6, 1)).collect();
        let s = temporal_folds(&dated(&days), &[date(2024, 12, 31)]).unwrap();
        assert_eq!(s.pairs.len(), 1);
        assert_eq!(s.pairs[0].train, (0..8).collect::<Vec<_>>());
        assert_eq!(s.pairs[0].test, vec![8]);
    }

    #[test]
    fn all_before_cutoff_yields_warning() {
        let s = temporal_folds(
            &dated(&[date(2020, 1, 1), date(2020, 2, 1)]),
            &[date(2021, 1, 1)],
        )
        .unwrap();
        assert!(s.pairs.is_empty());
        assert_eq!(s.warnings.len(), 1);
    }

    #[test]
    fn two_cutoffs_nest_train_sets() {
        // six dates, cutoffs after the 2nd and 4th
        let days: Vec<NaiveDate> = (1..=6).map(|m| date(2020, m, 1)).collect();
        let s = temporal_folds(&dated(&days), &[date(2020, 2, 15), date(2020, 4, 15)]).unwrap();
        assert_eq!(s.pairs.len(), 2);
        assert_eq!(
            (s.pairs[0].train.clone(), s.pairs[0].test.clone()),
            (vec![0, 1], vec![2, 3])
        );
        assert_eq!(
            (s.pairs[1].train.clone(), s.pairs[1].test.clone()),
            (vec![0, 1, 2, 3], vec![4, 5])
        );
    }

    #[test]
    fn cutoffs_must_increase() {
        let r = dated(&[date(2020, 1, 1)]);
        assert!(temporal_folds(&r, &[date(2020, 2, 1), date(2020, 2, 1)]).is_err());
        assert!(temporal_folds(&r, &[]).is_err());
    }

    #[test]
    fn folds_json_is_tagged_by_mode() {
        let a = group_safe_folds(&grouped(&[1, 1]), 2, 3).unwrap();
        let json = serde_json::to_string(&Folds::GroupSafe(a)).unwrap();
        assert!(json.starts_with("{\"mode\":\"group_safe\""), "{json}");
    }

    proptest! {
        #[test]
        fn groups_never_split_and_deterministic(
            keys in proptest::collection::vec(0u8..12, 5..120),
            k in 2usize..5,
            seed in any::<u64>(),
        ) {
            let recs: Vec<SampleRecord> = keys.iter()
                .map(|g| SampleRecord::new("A", date(2020, 1, 1), format!("g{g}")))
                .collect();
            let distinct = keys.iter().collect::<std::collections::BTreeSet<_>>().len();
            match group_safe_folds(&recs, k, seed) {
                Ok(a) => {
                    for i in 0..recs.len() {
                        for j in 0..recs.len() {
                            if recs[i].group_key == recs[j].group_key {
                                prop_assert_eq!(a.fold_of[i], a.fold_of[j]);
                            }
                        }
                    }
                    prop_assert_eq!(&a, &group_safe_folds(&recs, k, seed).unwrap());
                }
                Err(_) => prop_assert!(distinct < k),
            }
        }

        #[test]
        fn temporal_train_precedes_test(
            offsets in proptest::collection::vec(0u64..3000, 1..80),
            cuts in proptest::collection::btree_set(0u64..3000, 1..5),
        ) {
            let base = date(2017, 1, 1);
            let recs = dated(&offsets.iter().map(|&o| base + chrono::Days::new(o)).collect::<Vec<_>>());
            let cutoffs: Vec<NaiveDate> = cuts.iter().map(|&o| base + chrono::Days::new(o)).collect();
            let s = temporal_folds(&recs, &cutoffs).unwrap();
            for p in &s.pairs {
                let max_train = p.train.iter().map(|&i| recs[i].timestamp).max().unwrap();
                let min_test = p.test.iter().map(|&i| recs[i].timestamp).min().unwrap();
                prop_assert!(max_train < min_test);
            }
            prop_assert_eq!(s.pairs.len() + s.warnings.len(), cutoffs.len());
        }
    }
}
