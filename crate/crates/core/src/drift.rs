//! Distribution shift between a reference and a current period.
//!
//! PSI bins are the deciles of the reference sample (linear interpolation,
//! duplicate edges merged); a value equal to an edge falls in the lower bin.
//! Bin proportions are floored at `eps` before the log, never renormalized.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ops_risk::{alert_state, ThresholdSet};
use crate::output::ScoredRow;
use crate::record::AlertState;
use crate::stats::{quantile_linear, sorted_finite};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DriftParams {
    pub n_bins: usize,
    pub eps: f64,
    pub top_k: usize,
}

impl Default for DriftParams {
    fn default() -> Self {
        DriftParams {
            n_bins: 10,
            eps: 1e-4,
            top_k: 10,
        }
    }
}

impl DriftParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_bins < 2 {
            return Err(Error::InvalidInput("PSI needs at least 2 bins".into()));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::InvalidInput(format!(
                "eps must lie in (0, 1), got {}",
                self.eps
            )));
        }
        if self.top_k == 0 {
            return Err(Error::InvalidInput("top-k needs k >= 1".into()));
        }
        Ok(())
    }
}

/// Interior bin edges from reference quantiles.
pub fn reference_edges(reference: &[f64], n_bins: usize) -> Result<Vec<f64>> {
    let sorted = sorted_finite(reference);
    if sorted.is_empty() {
        return Err(Error::InvalidInput("PSI reference sample is empty".into()));
    }
    let mut edges: Vec<f64> = (1..n_bins)
        .filter_map(|i| quantile_linear(&sorted, i as f64 / n_bins as f64))
        .collect();
    edges.dedup();
    Ok(edges)
}

/// Fraction of `values` in each bin delimited by `edges`.
pub fn bin_proportions(values: &[f64], edges: &[f64]) -> Vec<f64> {
    let mut counts = vec![0usize; edges.len() + 1];
    for &x in values {
        counts[edges.partition_point(|&e| e < x)] += 1;
    }
    counts
        .into_iter()
        .map(|c| c as f64 / values.len() as f64)
        .collect()
}

/// `Σ (q − p) · ln(q / p)` with both proportions floored at `eps`.
pub fn psi_from_proportions(p_ref: &[f64], p_cur: &[f64], eps: f64) -> Result<f64> {
    if p_ref.len() != p_cur.len() || p_ref.is_empty() {
        return Err(Error::InvalidInput(
            "proportion vectors must be non-empty and equal length".into(),
        ));
    }
    Ok(p_ref
        .iter()
        .zip(p_cur)
        .map(|(&p, &q)| {
            let (p, q) = (p.max(eps), q.max(eps));
            (q - p) * (q / p).ln()
        })
        .sum())
}

pub fn psi(reference: &[f64], current: &[f64], n_bins: usize, eps: f64) -> Result<f64> {
    if current.is_empty() {
        return Err(Error::InvalidInput("PSI current sample is empty".into()));
    }
    let edges = reference_edges(reference, n_bins)?;
    psi_from_proportions(
        &bin_proportions(reference, &edges),
        &bin_proportions(current, &edges),
        eps,
    )
}

/// Two-sample Kolmogorov–Smirnov statistic, computed on exact integer counts.
pub fn ks_distance(reference: &[f64], current: &[f64]) -> Result<f64> {
    let a = sorted_finite(reference);
    let b = sorted_finite(current);
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidInput("KS needs two non-empty samples".into()));
    }
    let (n, m) = (a.len() as i128, b.len() as i128);
    let (mut i, mut j) = (0usize, 0usize);
    let mut best: i128 = 0;
    while i < a.len() || j < b.len() {
        let x = match (a.get(i), b.get(j)) {
            (Some(&u), Some(&v)) => u.min(v),
            (Some(&u), None) => u,
            (None, Some(&v)) => v,
            (None, None) => unreachable!(),
        };
        while i < a.len() && a[i] == x {
            i += 1;
        }
        while j < b.len() && b[j] == x {
            j += 1;
        }
        best = best.max((i as i128 * m - j as i128 * n).abs());
    }
    Ok(best as f64 / (n * m) as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonthlyRate {
    pub plant_id: String,
    /// `YYYY-MM`.
    pub month: String,
    pub n: usize,
    pub rate_watch: f64,
    pub rate_action: f64,
}

/// WATCH-or-above and ACTION fractions per (plant, calendar month), states
/// recomputed from `ops_risk` under `thresholds`. Unscorable rows are skipped.
pub fn monthly_alert_rates(rows: &[ScoredRow], thresholds: &ThresholdSet) -> Vec<MonthlyRate> {
    let mut acc: BTreeMap<(&str, String), (usize, usize, usize)> = BTreeMap::new();
    for r in rows {
        let Some(p) = r.ops_risk else { continue };
        let e = acc
            .entry((r.plant_id.as_str(), r.year_month()))
            .or_default();
        e.0 += 1;
        match alert_state(p, thresholds) {
            AlertState::Action => {
                e.1 += 1;
                e.2 += 1;
            }
            AlertState::Watch => e.1 += 1,
            AlertState::Normal => {}
        }
    }
    acc.into_iter()
        .map(|((plant, month), (n, w, a))| MonthlyRate {
            plant_id: plant.to_string(),
            month,
            n,
            rate_watch: w as f64 / n as f64,
            rate_action: a as f64 / n as f64,
        })
        .collect()
}

/// Up to `k` scorable rows per plant, highest `ops_risk` first, later dates first on ties.
pub fn topk_events(rows: &[ScoredRow], k: usize) -> BTreeMap<String, Vec<ScoredRow>> {
    let mut by_plant: BTreeMap<String, Vec<&ScoredRow>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.ops_risk.is_some()) {
        by_plant.entry(r.plant_id.clone()).or_default().push(r);
    }
    by_plant
        .into_iter()
        .map(|(plant, mut v)| {
            v.sort_by(|a, b| {
                b.ops_risk
                    .unwrap()
                    .total_cmp(&a.ops_risk.unwrap())
                    .then(b.timestamp.cmp(&a.timestamp))
            });
            (plant, v.into_iter().take(k).cloned().collect())
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftStats {
    pub n_ref: usize,
    pub n_cur: usize,
    /// `None` when either period has no scorable rows.
    pub psi: Option<f64>,
    pub ks: Option<f64>,
}

impl ShiftStats {
    pub fn compute(reference: &[f64], current: &[f64], params: &DriftParams) -> Result<Self> {
        let both = !reference.is_empty() && !current.is_empty();
        Ok(ShiftStats {
            n_ref: reference.len(),
            n_cur: current.len(),
            psi: if both {
                Some(psi(reference, current, params.n_bins, params.eps)?)
            } else {
                None
            },
            ks: if both {
                Some(ks_distance(reference, current)?)
            } else {
                None
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftMetadata {
    pub score: String,
    pub binning: String,
    pub n_bins: usize,
    pub eps: f64,
    pub top_k: usize,
    pub tau_watch: f64,
    pub tau_action: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub metadata: DriftMetadata,
    pub plants: BTreeMap<String, ShiftStats>,
    pub pooled: ShiftStats,
    /// Over reference and current rows together.
    pub monthly_alert_rates: Vec<MonthlyRate>,
    /// From the current period.
    pub topk: BTreeMap<String, Vec<ScoredRow>>,
}

fn scores_by_plant(rows: &[ScoredRow]) -> BTreeMap<&str, Vec<f64>> {
    let mut out: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for r in rows {
        if let Some(p) = r.ops_risk {
            out.entry(r.plant_id.as_str()).or_default().push(p);
        }
    }
    out
}

/// Per-plant and pooled `ops_risk` shift, monthly alert load and top-k events.
pub fn drift_report(
    reference: &[ScoredRow],
    current: &[ScoredRow],
    thresholds: &ThresholdSet,
    params: &DriftParams,
) -> Result<DriftReport> {
    params.validate()?;
    let ref_by = scores_by_plant(reference);
    let cur_by = scores_by_plant(current);
    let plants: Vec<&str> = ref_by
        .keys()
        .chain(cur_by.keys())
        .copied()
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let empty = Vec::new();
    let per_plant: Vec<(String, ShiftStats)> = plants
        .par_iter()
        .map(|&p| {
            let r = ref_by.get(p).unwrap_or(&empty);
            let c = cur_by.get(p).unwrap_or(&empty);
            ShiftStats::compute(r, c, params).map(|s| (p.to_string(), s))
        })
        .collect::<Result<_>>()?;
    let pooled_ref: Vec<f64> = reference.iter().filter_map(|r| r.ops_risk).collect();
    let pooled_cur: Vec<f64> = current.iter().filter_map(|r| r.ops_risk).collect();
    let mut all: Vec<ScoredRow> = reference.to_vec();
    all.extend_from_slice(current);
    Ok(DriftReport {
        metadata: DriftMetadata {
            score: "ops_risk".into(),
            binning: "reference_deciles".into(),
            n_bins: params.n_bins,
            eps: params.eps,
            top_k: params.top_k,
            tau_watch: thresholds.tau_watch,
            tau_action: thresholds.tau_action,
        },
        plants: per_plant.into_iter().collect(),
        pooled: ShiftStats::compute(&pooled_ref, &pooled_cur, params)?,
        monthly_alert_rates: monthly_alert_rates(&all, thresholds),
        topk: topk_events(current, params.top_k),
    })
}
