//! Deterministic synthetic training table.
//!
//! Rows are (plant, overpass date) samples. Overpasses are shared by all
//! plants, so each date forms one scene group. A latent bloom indicator with
//! a winter-peaked seasonal prevalence shifts every driver inside its
//! envelope; non-bloom rows span the full envelope so the range report
//! reproduces the envelope bounds. From `drift_from` on, each plant enters a
//! persistent bloom regime at its own prevalence, blooms sit closer to the
//! envelope tops, and the detector score gains a spurious upper tail.

use std::f64::consts::PI;
use std::path::Path;

use chrono::{Datelike, Days, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::record::{fmt_label, fmt_opt, SampleRecord, TABLE_HEADER};

/// `(column, low, high, log_scale)` envelopes of the reference training table.
pub const ENVELOPES: [(&str, f64, f64, bool); 7] = [
    ("chlor_a", 0.044, 9.972, true),
    ("kd490", 0.019, 2.244, true),
    ("nflh", -0.026, 0.736, false),
    ("sst", 23.945, 32.995, false),
    ("fai_mean", -0.073, 0.084, false),
    ("ndwi_mean", -0.393, 0.068, false),
    ("rednir_mean", 0.367, 1.088, false),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticConfig {
    pub seed: u64,
    pub plants: Vec<String>,
    pub start: NaiveDate,
    pub end: NaiveDate,
    /// Overpass spacing is uniform on `1..=max_revisit_days`.
    pub max_revisit_days: u32,
    /// Probability that a given plant is observed on an overpass.
    pub plant_coverage: f64,
    /// Mean bloom prevalence over the year.
    pub prevalence: f64,
    /// Fraction of rows carrying a trusted label.
    pub trusted_fraction: f64,
    /// Probability that a trusted label disagrees with the latent state.
    pub trusted_noise: f64,
    /// Per-column missingness rate.
    pub missing_rate: f64,
    /// First day of the shifted regime (persistent blooms, detector warp).
    pub drift_from: Option<NaiveDate>,
    /// Bloom prevalence per plant from `drift_from` on, cycled over `plants`.
    pub drift_prevalence: Vec<f64>,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            seed: 17,
            plants: ["A", "B", "C", "D"].map(String::from).to_vec(),
            start: NaiveDate::from_ymd_opt(2017, 1, 1).unwrap(),
            end: NaiveDate::from_ymd_opt(2025, 12, 31).unwrap(),
            max_revisit_days: 4,
            plant_coverage: 0.95,
            prevalence: 0.27,
            trusted_fraction: 0.6,
            trusted_noise: 0.03,
            missing_rate: 0.05,
            drift_from: NaiveDate::from_ymd_opt(2025, 1, 1),
            drift_prevalence: vec![0.75, 0.8, 0.86, 0.9],
        }
    }
}

impl SyntheticConfig {
    fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::InvalidInput(format!(
                    "synthetic {name} {v} outside [0, 1]"
                )))
            }
        };
        unit("plant_coverage", self.plant_coverage)?;
        unit("prevalence", self.prevalence)?;
        unit("trusted_fraction", self.trusted_fraction)?;
        unit("trusted_noise", self.trusted_noise)?;
        unit("missing_rate", self.missing_rate)?;
        for &p in &self.drift_prevalence {
            unit("drift_prevalence", p)?;
        }
        if self.drift_from.is_some() && self.drift_prevalence.is_empty() {
            return Err(Error::InvalidInput(
                "drift_from needs at least one drift_prevalence".into(),
            ));
        }
        if self.plants.is_empty() || self.max_revisit_days == 0 || self.end < self.start {
            return Err(Error::InvalidInput(
                "synthetic table needs plants, a positive revisit and start <= end".into(),
            ));
        }
        Ok(())
    }
}

/// Generates the table. Identical configs give identical tables.
pub fn generate(cfg: &SyntheticConfig) -> Result<Vec<SampleRecord>> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = Vec::new();
    let mut date = cfg.start;
    while date <= cfg.end {
        let group_key = format!("S2_{}_T40Q", date.format("%Y%m%d"));
        let seasonal = 1.0 + 0.6 * (2.0 * PI * (date.month() as f64 - 2.0) / 12.0).cos();
        let p_bloom = (cfg.prevalence * seasonal).clamp(0.0, 1.0);
        let drifted = cfg.drift_from.is_some_and(|d| date >= d);
        for (i, plant) in cfg.plants.iter().enumerate() {
            if !rng.gen_bool(cfg.plant_coverage) {
                continue;
            }
            let p = if drifted {
                cfg.drift_prevalence[i % cfg.drift_prevalence.len()]
            } else {
                p_bloom
            };
            let bloom = rng.gen_bool(p);
            out.push(sample(
                &mut rng, cfg, plant, date, &group_key, bloom, drifted,
            ));
        }
        let step = rng.gen_range(1..=cfg.max_revisit_days);
        date = match date.checked_add_days(Days::new(step as u64)) {
            Some(d) => d,
            None => break,
        };
    }
    Ok(out)
}

fn sample(
    rng: &mut ChaCha8Rng,
    cfg: &SyntheticConfig,
    plant: &str,
    date: NaiveDate,
    group_key: &str,
    bloom: bool,
    drifted: bool,
) -> SampleRecord {
    let mut r = SampleRecord::new(plant, date, group_key);
    // Position inside the envelope: blooms skew high, background skews low.
    let level = |rng: &mut ChaCha8Rng, up: bool| {
        let u: f64 = rng.gen();
        if bloom == up {
            u.powf(if drifted { 0.2 } else { 0.35 })
        } else {
            u.powf(1.6)
        }
    };
    let mut values = [0.0; 7];
    for (i, &(name, lo, hi, log_scale)) in ENVELOPES.iter().enumerate() {
        let up = !matches!(name, "ndwi_mean" | "rednir_mean");
        let u = if name == "sst" {
            // warm-season bias plus a bloom nudge, kept inside the envelope
            let warm = 0.5 - 0.3 * (2.0 * PI * (date.month() as f64 - 2.0) / 12.0).cos();
            let nudge = if bloom { 0.15 } else { 0.0 };
            (warm + nudge + rng.gen_range(-0.45..0.45)).clamp(0.0, 1.0)
        } else {
            level(rng, up)
        };
        values[i] = if log_scale {
            lo * (hi / lo).powf(u)
        } else {
            lo + (hi - lo) * u
        };
        values[i] = round5(values[i]).clamp(lo, hi);
    }
    let present = |rng: &mut ChaCha8Rng, v: f64| (!rng.gen_bool(cfg.missing_rate)).then_some(v);
    r.chlor_a = present(rng, values[0]);
    r.kd490 = present(rng, values[1]);
    r.nflh = present(rng, values[2]).filter(|v| *v != 0.0);
    r.sst = present(rng, values[3]);
    r.fai_mean = present(rng, values[4]);
    r.ndwi_mean = present(rng, values[5]);
    r.rednir_mean = present(rng, values[6]);

    let u: f64 = rng.gen();
    let mut det = if bloom { u.powf(0.45) } else { u.powf(2.2) };
    if drifted && rng.gen_bool(0.12) {
        det = 0.8 + 0.2 * rng.gen::<f64>();
    }
    r.det_mean = present(rng, round5(det).clamp(0.0, 1.0));

    if rng.gen_bool(cfg.trusted_fraction) {
        let flip = rng.gen_bool(cfg.trusted_noise);
        r.y_trusted = Some(bloom != flip);
    }
    r
}

fn round5(x: f64) -> f64 {
    (x * 1e5).round() / 1e5
}

/// Writes the table the way upstream exports do: missing `chlor_a`, `kd490`
/// and `nflh` as literal `0` placeholders, every other missing cell empty.
pub fn write_raw_csv(path: impl AsRef<Path>, records: &[SampleRecord]) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut wtr = csv::Writer::from_writer(file);
    wtr.write_record(TABLE_HEADER)?;
    let zero = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_else(|| "0".into());
    for r in records {
        wtr.write_record([
            r.plant_id.clone(),
            r.timestamp.format("%Y-%m-%d").to_string(),
            r.group_key.clone(),
            zero(r.chlor_a),
            zero(r.kd490),
            zero(r.nflh),
            fmt_opt(r.sst),
            fmt_opt(r.fai_mean),
            fmt_opt(r.ndwi_mean),
            fmt_opt(r.rednir_mean),
            fmt_opt(r.det_mean),
            fmt_opt(r.hab_prob),
            fmt_label(r.y_trusted),
            fmt_label(r.y_weak),
            fmt_label(r.y_final),
        ])?;
    }
    wtr.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}
