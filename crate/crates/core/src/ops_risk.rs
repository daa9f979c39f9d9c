//! Operational risk index (`ops_risk_v2_seasonal`) and its alert thresholds.
//!
//! Per row:
//!
//! 1. each driver is quantile-normalized, `x̃ = clip((x - Q10) / (Q90 - Q10), 0, 1)`;
//! 2. the ocean-colour composite is the availability-weighted mean of `x̃`,
//!    shrunk toward 0.5 by the missing weight mass:
//!    `OCI_adj = OCI·c + 0.5·(1 - c)`;
//! 3. each driver gets a monthly anomaly score `s = σ(1.15·clip(z, -3, 3))`,
//!    with the SST anomaly floored at zero, and the scores are combined with
//!    the same weights and shrinkage into `Season_adj`;
//! 4. `b = 0.40·hab_prob + 0.25·det_mean + 0.20·OCI_adj + 0.15·Season_adj`,
//!    discounted by `d = clip(1 - 0.18·|hab_prob - det_mean|, 0.75, 1)`,
//!    giving `ops_risk = clip(b·d, 0, 1)`.
//!
//! When `b` cannot be formed (a blend input is missing) the row falls back to
//! `hab_prob`. Thresholds are re-fitted so that `ops_risk` exceeds them at the
//! same rates at which `hab_prob` exceeded the legacy base thresholds.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::monthly::MonthlyStats;
use crate::record::{AlertState, Driver, SampleRecord};
use crate::stats::{self, logistic};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriverWeights {
    pub chlor_a: f64,
    pub nflh: f64,
    pub kd490: f64,
    pub sst: f64,
}

impl DriverWeights {
    pub fn get(&self, d: Driver) -> f64 {
        match d {
            Driver::ChlorA => self.chlor_a,
            Driver::Nflh => self.nflh,
            Driver::Kd490 => self.kd490,
            Driver::Sst => self.sst,
        }
    }

    pub fn as_array(&self) -> [f64; 4] {
        Driver::ALL.map(|d| self.get(d))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlendWeights {
    pub hab_prob: f64,
    pub det_mean: f64,
    pub oci_adj: f64,
    pub season_adj: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OpsRiskConfig {
    pub driver_weights: DriverWeights,
    pub blend_weights: BlendWeights,
    pub discount_slope: f64,
    pub discount_floor: f64,
    pub sigmoid_slope: f64,
    pub z_clip: f64,
    pub norm_quantiles: (f64, f64),
    pub base_watch: f64,
    pub base_action: f64,
    pub min_gap: f64,
    pub watch_bounds: (f64, f64),
    pub action_bounds: (f64, f64),
}

impl Default for OpsRiskConfig {
    fn default() -> Self {
        OpsRiskConfig {
            driver_weights: DriverWeights {
                chlor_a: 0.35,
                nflh: 0.35,
                kd490: 0.20,
                sst: 0.10,
            },
            blend_weights: BlendWeights {
                hab_prob: 0.40,
                det_mean: 0.25,
                oci_adj: 0.20,
                season_adj: 0.15,
            },
            discount_slope: 0.18,
            discount_floor: 0.75,
            sigmoid_slope: 1.15,
            z_clip: 3.0,
            norm_quantiles: (0.1, 0.9),
            base_watch: 0.55,
            base_action: 0.6238688594,
            min_gap: 0.04,
            watch_bounds: (0.05, 0.95),
            action_bounds: (0.05, 0.99),
        }
    }
}

const SUM_TOL: f64 = 1e-9;

impl OpsRiskConfig {
    pub fn validate(&self) -> Result<()> {
        let dw = self.driver_weights.as_array();
        let b = &self.blend_weights;
        let bw = [b.hab_prob, b.det_mean, b.oci_adj, b.season_adj];
        let bad = |msg: &str| Err(Error::InvalidInput(format!("ops-risk config: {msg}")));
        if dw.iter().chain(&bw).any(|w| !(*w >= 0.0)) {
            return bad("weights must be non-negative");
        }
        if (dw.iter().sum::<f64>() - 1.0).abs() > SUM_TOL {
            return bad("driver weights must sum to 1");
        }
        if (bw.iter().sum::<f64>() - 1.0).abs() > SUM_TOL {
            return bad("blend weights must sum to 1");
        }
        if !(self.discount_floor < 1.0 && self.discount_floor >= 0.0) {
            return bad("discount floor must lie in [0, 1)");
        }
        let (q_lo, q_hi) = self.norm_quantiles;
        if !(0.0 <= q_lo && q_lo < q_hi && q_hi <= 1.0) {
            return bad("normalization quantiles must be ordered in [0, 1]");
        }
        let ordered = |(lo, hi): (f64, f64)| 0.0 <= lo && lo <= hi && hi <= 1.0;
        if !ordered(self.watch_bounds) || !ordered(self.action_bounds) {
            return bad("threshold bounds must be ordered in [0, 1]");
        }
        if !(self.z_clip > 0.0 && self.sigmoid_slope > 0.0 && self.min_gap >= 0.0) {
            return bad("z_clip, sigmoid_slope must be > 0 and min_gap >= 0");
        }
        Ok(())
    }

    pub fn base_thresholds(&self) -> ThresholdSet {
        ThresholdSet {
            tau_watch: self.base_watch,
            tau_action: self.base_action,
            r_watch: None,
            r_action: None,
            source: ThresholdSource::BaseFallback,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantileRange {
    pub q_lo: f64,
    pub q_hi: f64,
}

/// Normalization anchors and monthly anomaly statistics, fitted on a
/// reference period only.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct NormStats {
    pub quantiles: BTreeMap<Driver, QuantileRange>,
    pub monthly: MonthlyStats,
}

impl NormStats {
    pub fn fit<'a>(
        records: impl IntoIterator<Item = &'a SampleRecord> + Clone,
        cfg: &OpsRiskConfig,
    ) -> Self {
        let mut quantiles = BTreeMap::new();
        for d in Driver::ALL {
            let values: Vec<f64> = records
                .clone()
                .into_iter()
                .filter_map(|r| r.driver(d))
                .collect();
            let sorted = stats::sorted_finite(&values);
            if let (Some(q_lo), Some(q_hi)) = (
                stats::quantile_higher(&sorted, cfg.norm_quantiles.0),
                stats::quantile_higher(&sorted, cfg.norm_quantiles.1),
            ) {
                quantiles.insert(d, QuantileRange { q_lo, q_hi });
            }
        }
        NormStats {
            quantiles,
            monthly: MonthlyStats::fit(records),
        }
    }
}

/// `clip((x - q_lo) / (q_hi - q_lo), 0, 1)`; a degenerate range maps to 0.5.
pub fn normalize_driver(x: f64, q_lo: f64, q_hi: f64) -> f64 {
    if q_hi > q_lo {
        ((x - q_lo) / (q_hi - q_lo)).clamp(0.0, 1.0)
    } else {
        0.5
    }
}

/// Availability-weighted composite with coverage shrinkage toward 0.5.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Composite {
    /// Weighted mean over available drivers; `None` when nothing is available.
    pub value: Option<f64>,
    pub coverage: f64,
    pub adjusted: f64,
}

fn composite(values: [Option<f64>; 4], weights: &DriverWeights) -> Composite {
    let w = weights.as_array();
    let total: f64 = w.iter().sum();
    let mut num = 0.0;
    let mut avail = 0.0;
    for (v, wj) in values.iter().zip(w) {
        if let Some(v) = v {
            num += wj * v;
            avail += wj;
        }
    }
    if avail <= 0.0 {
        return Composite {
            value: None,
            coverage: 0.0,
            adjusted: 0.5,
        };
    }
    let value = num / avail;
    let coverage = avail / total;
    Composite {
        value: Some(value),
        coverage,
        adjusted: (value * coverage + 0.5 * (1.0 - coverage)).clamp(0.0, 1.0),
    }
}

/// Ocean-colour composite from normalized drivers (`None` = unavailable), in
/// [`Driver::ALL`] order.
pub fn compute_oci(normalized: [Option<f64>; 4], cfg: &OpsRiskConfig) -> Composite {
    composite(normalized, &cfg.driver_weights)
}

/// Seasonal composite from per-driver anomaly scores.
pub fn season_adj(scores: [Option<f64>; 4], cfg: &OpsRiskConfig) -> f64 {
    composite(scores, &cfg.driver_weights).adjusted
}

/// Clipped monthly anomaly z-score; SST anomalies are floored at zero.
pub fn seasonal_z(
    x: f64,
    month: u32,
    stats: &NormStats,
    driver: Driver,
    cfg: &OpsRiskConfig,
) -> Option<f64> {
    let z = stats
        .monthly
        .z(driver, month, x)?
        .clamp(-cfg.z_clip, cfg.z_clip);
    Some(if driver == Driver::Sst { z.max(0.0) } else { z })
}

/// `σ(slope · z)` for the clipped monthly anomaly. `None` when the month has
/// no statistics for this driver.
pub fn seasonal_score(
    x: f64,
    month: u32,
    stats: &NormStats,
    driver: Driver,
    cfg: &OpsRiskConfig,
) -> Option<f64> {
    seasonal_z(x, month, stats, driver, cfg).map(|z| logistic(cfg.sigmoid_slope * z))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpsRiskRow {
    pub oci: Option<f64>,
    pub coverage: f64,
    pub oci_adj: f64,
    pub season_adj: f64,
    pub blend: Option<f64>,
    pub discount: Option<f64>,
    /// `None` only when the row is unscorable (blend and fallback both missing).
    pub ops_risk: Option<f64>,
    pub used_fallback: bool,
}

impl OpsRiskRow {
    pub fn is_scorable(&self) -> bool {
        self.ops_risk.is_some()
    }
}

/// Blend, disagreement discount and fallback. `oci` and `coverage` of the
/// returned row are left for the caller to fill.
pub fn blend_and_discount(
    hab_prob: Option<f64>,
    det_mean: Option<f64>,
    oci_adj: f64,
    season_adj: f64,
    cfg: &OpsRiskConfig,
) -> OpsRiskRow {
    let mut row = OpsRiskRow {
        oci: None,
        coverage: 0.0,
        oci_adj,
        season_adj,
        blend: None,
        discount: None,
        ops_risk: None,
        used_fallback: false,
    };
    match (hab_prob, det_mean) {
        (Some(h), Some(det)) => {
            let w = &cfg.blend_weights;
            // Anchored at hab_prob: equal to the plain weighted sum because
            // the weights sum to 1, and exact when all inputs coincide.
            let b = h
                + w.det_mean * (det - h)
                + w.oci_adj * (oci_adj - h)
                + w.season_adj * (season_adj - h);
            let d = (1.0 - cfg.discount_slope * (h - det).abs()).clamp(cfg.discount_floor, 1.0);
            row.blend = Some(b);
            row.discount = Some(d);
            row.ops_risk = Some((b * d).clamp(0.0, 1.0));
        }
        (Some(h), None) => {
            row.ops_risk = Some(h);
            row.used_fallback = true;
        }
        (None, _) => {
            row.used_fallback = true;
        }
    }
    row
}

/// Full per-record computation given frozen statistics.
pub fn score_record(r: &SampleRecord, stats: &NormStats, cfg: &OpsRiskConfig) -> OpsRiskRow {
    let normalized = Driver::ALL.map(|d| {
        let x = r.driver(d)?;
        let q = stats.quantiles.get(&d)?;
        Some(normalize_driver(x, q.q_lo, q.q_hi))
    });
    let scores = Driver::ALL.map(|d| seasonal_score(r.driver(d)?, r.month, stats, d, cfg));
    let oci = compute_oci(normalized, cfg);
    let season = season_adj(scores, cfg);
    let mut row = blend_and_discount(r.hab_prob, r.det_mean, oci.adjusted, season, cfg);
    row.oci = oci.value;
    row.coverage = oci.coverage;
    row
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdSource {
    Calibrated,
    BaseFallback,
    Explicit,
}

/// Serialized as `{tau_watch, tau_action, r_watch, r_action, source}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSet {
    pub tau_watch: f64,
    pub tau_action: f64,
    pub r_watch: Option<f64>,
    pub r_action: Option<f64>,
    pub source: ThresholdSource,
}

impl ThresholdSet {
    /// Operator-supplied thresholds, checked against the gap and bounds invariants.
    pub fn explicit(tau_watch: f64, tau_action: f64, cfg: &OpsRiskConfig) -> Result<Self> {
        let t = ThresholdSet {
            tau_watch,
            tau_action,
            r_watch: None,
            r_action: None,
            source: ThresholdSource::Explicit,
        };
        t.check(cfg)?;
        Ok(t)
    }

    pub fn check(&self, cfg: &OpsRiskConfig) -> Result<()> {
        let within = |v: f64, (lo, hi): (f64, f64)| v >= lo && v <= hi;
        if !within(self.tau_watch, cfg.watch_bounds) {
            return Err(Error::InvalidInput(format!(
                "tau_watch {} outside {:?}",
                self.tau_watch, cfg.watch_bounds
            )));
        }
        if !within(self.tau_action, cfg.action_bounds) {
            return Err(Error::InvalidInput(format!(
                "tau_action {} outside {:?}",
                self.tau_action, cfg.action_bounds
            )));
        }
        if !(self.tau_action - self.tau_watch >= cfg.min_gap) {
            return Err(Error::InvalidInput(format!(
                "tau_action - tau_watch must be >= {}",
                cfg.min_gap
            )));
        }
        Ok(())
    }
}

/// Fraction of `pool` at or above `threshold`.
pub fn exceedance_rate(pool: &[f64], threshold: f64) -> f64 {
    pool.iter().filter(|&&v| v >= threshold).count() as f64 / pool.len() as f64
}

/// Smallest pool value `v` with `fraction{pool >= v} <= rate`, or `None`
/// when even the pool maximum is exceeded too often.
pub fn match_exceedance(pool: &[f64], rate: f64) -> Option<f64> {
    let sorted = stats::sorted_finite(pool);
    let n = sorted.len() as f64;
    let mut i = 0;
    while i < sorted.len() {
        if (sorted.len() - i) as f64 / n <= rate {
            return Some(sorted[i]);
        }
        // jump to the next distinct value
        let v = sorted[i];
        while i < sorted.len() && sorted[i] == v {
            i += 1;
        }
    }
    None
}

/// Clamps to the bounds, then enforces the minimum gap by raising
/// `tau_action` (up to its upper bound) and, if still short, lowering
/// `tau_watch`.
pub fn enforce_constraints(tau_watch: f64, tau_action: f64, cfg: &OpsRiskConfig) -> (f64, f64) {
    let mut tw = tau_watch.clamp(cfg.watch_bounds.0, cfg.watch_bounds.1);
    let mut ta = tau_action.clamp(cfg.action_bounds.0, cfg.action_bounds.1);
    let ceiling = cfg.action_bounds.1;
    if ta - tw < cfg.min_gap {
        ta = (tw + cfg.min_gap).min(ceiling);
        while ta - tw < cfg.min_gap && ta < ceiling {
            ta = ta.next_up().min(ceiling);
        }
    }
    if ta - tw < cfg.min_gap {
        tw = ta - cfg.min_gap;
        while ta - tw < cfg.min_gap {
            tw = tw.next_down();
        }
    }
    (tw, ta)
}

/// Thresholds whose `ops_risk` exceedance rates match the given rates.
pub fn thresholds_for_rates(
    ops_pool: &[f64],
    r_watch: f64,
    r_action: f64,
    cfg: &OpsRiskConfig,
) -> ThresholdSet {
    if ops_pool.is_empty() {
        return cfg.base_thresholds();
    }
    let tw = match_exceedance(ops_pool, r_watch).unwrap_or(cfg.watch_bounds.1);
    let ta = match_exceedance(ops_pool, r_action).unwrap_or(cfg.action_bounds.1);
    let (tau_watch, tau_action) = enforce_constraints(tw, ta, cfg);
    ThresholdSet {
        tau_watch,
        tau_action,
        r_watch: Some(r_watch),
        r_action: Some(r_action),
        source: ThresholdSource::Calibrated,
    }
}

/// Exceedance-rate matching against the legacy base thresholds. Empty pools
/// keep the static base thresholds.
pub fn calibrate_thresholds(
    hab_prob_pool: &[f64],
    ops_risk_pool: &[f64],
    cfg: &OpsRiskConfig,
) -> ThresholdSet {
    if hab_prob_pool.is_empty() || ops_risk_pool.is_empty() {
        return cfg.base_thresholds();
    }
    let r_watch = exceedance_rate(hab_prob_pool, cfg.base_watch);
    let r_action = exceedance_rate(hab_prob_pool, cfg.base_action);
    thresholds_for_rates(ops_risk_pool, r_watch, r_action, cfg)
}

pub fn alert_state(p: f64, t: &ThresholdSet) -> AlertState {
    if p >= t.tau_action {
        AlertState::Action
    } else if p >= t.tau_watch {
        AlertState::Watch
    } else {
        AlertState::Normal
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monthly::MonthCell;
    use approx::assert_abs_diff_eq;
    use chrono::NaiveDate;
    use proptest::prelude::*;

    fn cfg() -> OpsRiskConfig {
        OpsRiskConfig::default()
    }

    #[test]
    fn default_config_is_valid() {
        cfg().validate().unwrap();
        let mut bad = cfg();
        bad.driver_weights.sst = 0.2;
        assert!(bad.validate().is_err());
        let mut bad = cfg();
        bad.discount_floor = 1.0;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn normalization_anchors() {
        assert_eq!(normalize_driver(0.1, 0.1, 0.6), 0.0);
        assert_eq!(normalize_driver(0.6, 0.1, 0.6), 1.0);
        assert_abs_diff_eq!(normalize_driver(0.35, 0.1, 0.6), 0.5, epsilon = 1e-12);
        assert_eq!(normalize_driver(5.0, 0.1, 0.6), 1.0);
        assert_eq!(normalize_driver(3.0, 2.0, 2.0), 0.5);
    }

    #[test]
    fn oci_cases() {
        let all = compute_oci([Some(1.0); 4], &cfg());
        assert_eq!(
            (all.value, all.coverage, all.adjusted),
            (Some(1.0), 1.0, 1.0)
        );

        let chl = compute_oci([Some(0.8), None, None, None], &cfg());
        assert_abs_diff_eq!(chl.value.unwrap(), 0.8, epsilon = 1e-12);
        assert_abs_diff_eq!(chl.coverage, 0.35, epsilon = 1e-12);
        assert_abs_diff_eq!(chl.adjusted, 0.605, epsilon = 1e-12);

        let none = compute_oci([None; 4], &cfg());
        assert_eq!((none.value, none.coverage, none.adjusted), (None, 0.0, 0.5));
    }

    fn stats_with(driver: Driver, median: f64, iqr: f64) -> NormStats {
        let mut s = NormStats::default();
        s.monthly
            .insert(driver, 6, MonthCell { median, iqr, n: 30 });
        s
    }

    #[test]
    fn seasonal_score_cases() {
        let c = cfg();
        let s = stats_with(Driver::ChlorA, 0.5, 0.2);
        assert_eq!(seasonal_score(0.5, 6, &s, Driver::ChlorA, &c), Some(0.5));
        // z = 10 clips to 3 -> σ(3.45)
        assert_abs_diff_eq!(
            seasonal_score(2.5, 6, &s, Driver::ChlorA, &c).unwrap(),
            0.9692,
            epsilon = 1e-4
        );
        assert_abs_diff_eq!(
            seasonal_score(2.5, 6, &s, Driver::ChlorA, &c).unwrap(),
            0.969231140642852,
            epsilon = 1e-12
        );
        assert_eq!(seasonal_score(0.5, 7, &s, Driver::ChlorA, &c), None);

        let sst = stats_with(Driver::Sst, 29.0, 1.0);
        assert_eq!(seasonal_score(27.0, 6, &sst, Driver::Sst, &c), Some(0.5));
        assert!(seasonal_score(30.0, 6, &sst, Driver::Sst, &c).unwrap() > 0.5);
    }

    #[test]
    fn season_adj_cases() {
        let c = cfg();
        assert_eq!(season_adj([Some(0.5); 4], &c), 0.5);
        assert_abs_diff_eq!(
            season_adj([None, Some(1.0), None, None], &c),
            0.675,
            epsilon = 1e-12
        );
        assert_eq!(season_adj([None; 4], &c), 0.5);
    }

    #[test]
    fn blend_cases() {
        let c = cfg();
        let r = blend_and_discount(Some(0.6), Some(0.6), 0.6, 0.6, &c);
        assert_eq!(
            (r.blend, r.discount, r.ops_risk),
            (Some(0.6), Some(1.0), Some(0.6))
        );

        let r = blend_and_discount(Some(1.0), Some(0.0), 0.5, 0.5, &c);
        assert_abs_diff_eq!(r.blend.unwrap(), 0.575, epsilon = 1e-12);
        assert_abs_diff_eq!(r.discount.unwrap(), 0.82, epsilon = 1e-12);
        assert_abs_diff_eq!(r.ops_risk.unwrap(), 0.4715, epsilon = 1e-9);

        let r = blend_and_discount(Some(0.7), None, 0.5, 0.5, &c);
        assert_eq!((r.ops_risk, r.used_fallback), (Some(0.7), true));

        let r = blend_and_discount(None, Some(0.7), 0.5, 0.5, &c);
        assert!(!r.is_scorable());
    }

    #[test]
    fn score_record_uses_frozen_stats() {
        let d = NaiveDate::from_ymd_opt(2024, 6, 10).unwrap();
        let mut r = SampleRecord::new("A", d, "g");
        r.chlor_a = Some(0.35);
        r.hab_prob = Some(0.6);
        r.det_mean = Some(0.6);
        let mut s = stats_with(Driver::ChlorA, 0.35, 0.1);
        s.quantiles.insert(
            Driver::ChlorA,
            QuantileRange {
                q_lo: 0.1,
                q_hi: 0.6,
            },
        );
        let row = score_record(&r, &s, &cfg());
        assert_abs_diff_eq!(row.oci.unwrap(), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(row.coverage, 0.35, epsilon = 1e-12);
        assert_abs_diff_eq!(row.oci_adj, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(row.season_adj, 0.5, epsilon = 1e-12);
        assert!(!row.used_fallback);
    }

    #[test]
    fn empty_pool_keeps_base_thresholds() {
        let t = calibrate_thresholds(&[], &[], &cfg());
        assert_eq!((t.tau_watch, t.tau_action), (0.55, 0.6238688594));
        assert_eq!(t.source, ThresholdSource::BaseFallback);
        let t = calibrate_thresholds(&[0.5], &[], &cfg());
        assert_eq!(t.source, ThresholdSource::BaseFallback);
    }

    #[test]
    fn identical_pools_reproduce_rate() {
        // 200-point pool on a grid, so both thresholds fall on pool values
        let pool: Vec<f64> = (0..200).map(|i| i as f64 / 200.0).collect();
        let t = calibrate_thresholds(&pool, &pool, &cfg());
        let r = t.r_watch.unwrap();
        assert_eq!(exceedance_rate(&pool, t.tau_watch), r);
        assert_eq!(t.tau_watch, 0.55);
    }

    #[test]
    fn close_thresholds_get_minimum_gap() {
        let c = cfg();
        let (tw, ta) = enforce_constraints(0.50, 0.51, &c);
        assert_eq!(tw, 0.50);
        assert!(ta - tw >= 0.04);
        assert_abs_diff_eq!(ta, 0.54, epsilon = 1e-15);

        let (tw, ta) = enforce_constraints(0.97, 0.98, &c);
        assert_eq!(ta, 0.99);
        assert!(ta - tw >= 0.04 && tw <= 0.95);
    }

    #[test]
    fn unmatchable_rate_uses_upper_bound() {
        let pool = vec![0.2; 10];
        assert_eq!(match_exceedance(&pool, 0.0), None);
        let t = thresholds_for_rates(&pool, 0.0, 0.0, &cfg());
        assert_eq!((t.tau_watch, t.tau_action), (0.95, 0.99));
    }

    #[test]
    fn alert_state_cases() {
        let t = cfg().base_thresholds();
        let t = ThresholdSet {
            tau_action: 0.6239,
            ..t
        };
        assert_eq!(alert_state(0.30, &t), AlertState::Normal);
        assert_eq!(alert_state(0.55, &t), AlertState::Watch);
        assert_eq!(alert_state(0.58, &t), AlertState::Watch);
        assert_eq!(alert_state(0.6239, &t), AlertState::Action);
    }

    #[test]
    fn explicit_thresholds_checked() {
        let c = cfg();
        assert!(ThresholdSet::explicit(0.5, 0.7, &c).is_ok());
        assert!(ThresholdSet::explicit(0.5, 0.52, &c).is_err());
        assert!(ThresholdSet::explicit(0.01, 0.7, &c).is_err());
    }

    proptest! {
        #[test]
        fn outputs_stay_in_range(
            h in proptest::option::of(0.0f64..=1.0),
            det in proptest::option::of(0.0f64..=1.0),
            xt in proptest::array::uniform4(proptest::option::of(0.0f64..=1.0)),
            s in proptest::array::uniform4(proptest::option::of(0.0f64..=1.0)),
        ) {
            let c = cfg();
            let oci = compute_oci(xt, &c);
            prop_assert!((0.0..=1.0).contains(&oci.adjusted));
            let row = blend_and_discount(h, det, oci.adjusted, season_adj(s, &c), &c);
            if let Some(p) = row.ops_risk { prop_assert!((0.0..=1.0).contains(&p)); }
            if let Some(d) = row.discount { prop_assert!((0.75..=1.0).contains(&d)); }
        }

        #[test]
        fn oci_monotone_in_each_driver(
            xt in proptest::array::uniform4(proptest::option::of(0.0f64..=1.0)),
            j in 0usize..4,
            bump in 0.0f64..1.0,
        ) {
            let c = cfg();
            let mut raised = xt;
            if let Some(v) = raised[j] { raised[j] = Some((v + bump).min(1.0)); }
            prop_assert!(compute_oci(raised, &c).adjusted >= compute_oci(xt, &c).adjusted - 1e-15);
        }

        #[test]
        fn ops_risk_increasing_in_agreeing_evidence(
            a in 0.0f64..1.0, gap in 1e-6f64..0.5, oci in 0.0f64..=1.0, season in 0.0f64..=1.0,
        ) {
            let c = cfg();
            let b = (a + gap).min(1.0);
            prop_assume!(b > a);
            let lo = blend_and_discount(Some(a), Some(a), oci, season, &c).ops_risk.unwrap();
            let hi = blend_and_discount(Some(b), Some(b), oci, season, &c).ops_risk.unwrap();
            prop_assert!(hi > lo);
        }

        #[test]
        fn alert_state_monotone(p in 0.0f64..=1.0, q in 0.0f64..=1.0) {
            let t = cfg().base_thresholds();
            let (lo, hi) = if p <= q { (p, q) } else { (q, p) };
            prop_assert!(alert_state(lo, &t) <= alert_state(hi, &t));
        }

        #[test]
        fn constraints_always_hold(tw in 0.0f64..=1.0, ta in 0.0f64..=1.0) {
            let c = cfg();
            let (w, a) = enforce_constraints(tw, ta, &c);
            prop_assert!(a - w >= c.min_gap);
            prop_assert!(a <= c.action_bounds.1 && a >= c.action_bounds.0);
            prop_assert!(w <= c.watch_bounds.1);
        }
    }
}
