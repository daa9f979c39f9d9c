//! Reference fusion scorer: standardized features, L2-regularized logistic
//! regression trained by deterministic full-batch gradient descent.
//!
//! It produces `hab_prob` inside the evaluation harness. Only its ranking is
//! relied on downstream; its probabilities are not claimed to be calibrated.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::season_encode;
use crate::record::SampleRecord;
use crate::stats::{self, logistic};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Feature {
    #[serde(rename = "log1p_chlor_a")]
    LogChlorA,
    #[serde(rename = "kd490")]
    Kd490,
    #[serde(rename = "nflh")]
    Nflh,
    #[serde(rename = "sst")]
    Sst,
    #[serde(rename = "fai_mean")]
    FaiMean,
    #[serde(rename = "ndwi_mean")]
    NdwiMean,
    #[serde(rename = "rednir_mean")]
    RednirMean,
    #[serde(rename = "det_mean")]
    DetMean,
    #[serde(rename = "sin_m")]
    SinMonth,
    #[serde(rename = "cos_m")]
    CosMonth,
    #[serde(rename = "chlor_a_over_kd490")]
    ChlorKdRatio,
}

impl Feature {
    pub const DEFAULT: [Feature; 10] = [
        Feature::LogChlorA,
        Feature::Kd490,
        Feature::Nflh,
        Feature::Sst,
        Feature::FaiMean,
        Feature::NdwiMean,
        Feature::RednirMean,
        Feature::DetMean,
        Feature::SinMonth,
        Feature::CosMonth,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Feature::LogChlorA => "log1p_chlor_a",
            Feature::Kd490 => "kd490",
            Feature::Nflh => "nflh",
            Feature::Sst => "sst",
            Feature::FaiMean => "fai_mean",
            Feature::NdwiMean => "ndwi_mean",
            Feature::RednirMean => "rednir_mean",
            Feature::DetMean => "det_mean",
            Feature::SinMonth => "sin_m",
            Feature::CosMonth => "cos_m",
            Feature::ChlorKdRatio => "chlor_a_over_kd490",
        }
    }

    /// Raw (unstandardized) feature value.
    pub fn extract(self, r: &SampleRecord) -> Option<f64> {
        match self {
            Feature::LogChlorA => r.chlor_a.map(f64::ln_1p),
            Feature::Kd490 => r.kd490,
            Feature::Nflh => r.nflh,
            Feature::Sst => r.sst,
            Feature::FaiMean => r.fai_mean,
            Feature::NdwiMean => r.ndwi_mean,
            Feature::RednirMean => r.rednir_mean,
            Feature::DetMean => r.det_mean,
            Feature::SinMonth => season_encode(r.month).ok().map(|(s, _)| s),
            Feature::CosMonth => season_encode(r.month).ok().map(|(_, c)| c),
            Feature::ChlorKdRatio => match (r.chlor_a, r.kd490) {
                (Some(c), Some(k)) if k > 0.0 => Some(c / k),
                _ => None,
            },
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Feature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Feature::DEFAULT
            .iter()
            .chain(&[Feature::ChlorKdRatio])
            .find(|f| f.name() == s)
            .copied()
            .ok_or_else(|| Error::InvalidInput(format!("unknown feature `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    pub features: Vec<Feature>,
    pub l2: f64,
    pub iters: usize,
    pub lr: f64,
    /// Adds the chlor_a / kd490 interaction feature.
    pub ratio_feature: bool,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            features: Feature::DEFAULT.to_vec(),
            l2: 1e-3,
            iters: 400,
            lr: 1.0,
            ratio_feature: false,
        }
    }
}

impl FitConfig {
    fn feature_set(&self) -> Vec<Feature> {
        let mut f = self.features.clone();
        if self.ratio_feature && !f.contains(&Feature::ChlorKdRatio) {
            f.push(Feature::ChlorKdRatio);
        }
        f
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearScorer {
    pub feature_list: Vec<Feature>,
    pub feature_means: Vec<f64>,
    pub feature_sds: Vec<f64>,
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearScorer {
    /// Fits on records with a present `y_final`.
    pub fn fit(train: &[SampleRecord], cfg: &FitConfig) -> Result<Self> {
        Self::fit_traced(train, cfg).map(|(m, _)| m)
    }

    /// Like [`LinearScorer::fit`], also returning the loss after every accepted step
    /// (first entry is the loss at the zero initialisation).
    pub fn fit_traced(train: &[SampleRecord], cfg: &FitConfig) -> Result<(Self, Vec<f64>)> {
        if !(cfg.lr > 0.0) || !(cfg.l2 >= 0.0) {
            return Err(Error::InvalidInput("fit needs lr > 0 and l2 >= 0".into()));
        }
        let rows: Vec<(&SampleRecord, bool)> = train
            .iter()
            .filter_map(|r| r.y_final.map(|y| (r, y)))
            .collect();
        let n_pos = rows.iter().filter(|(_, y)| *y).count();
        if n_pos == 0 || n_pos == rows.len() {
            return Err(Error::SingleClass);
        }

        let mut feature_list = Vec::new();
        let mut feature_means = Vec::new();
        let mut feature_sds = Vec::new();
        for f in cfg.feature_set() {
            let present: Vec<f64> = rows.iter().filter_map(|(r, _)| f.extract(r)).collect();
            let (Some(m), Some(sd)) = (stats::mean(&present), stats::sample_sd(&present)) else {
                continue;
            };
            if sd > 0.0 && sd.is_finite() {
                feature_list.push(f);
                feature_means.push(m);
                feature_sds.push(sd);
            }
        }
        let mut model = LinearScorer {
            weights: vec![0.0; feature_list.len()],
            feature_list,
            feature_means,
            feature_sds,
            bias: 0.0,
        };

        let x: Vec<Vec<f64>> = rows.iter().map(|(r, _)| model.standardize(r)).collect();
        let y: Vec<f64> = rows
            .iter()
            .map(|(_, y)| if *y { 1.0 } else { 0.0 })
            .collect();
        let objective = |w: &[f64], b: f64| loss(&x, &y, w, b, cfg.l2);

        let mut current = objective(&model.weights, model.bias);
        let mut trace = vec![current];
        'outer: for _ in 0..cfg.iters {
            let (gw, gb) = gradient(&x, &y, &model.weights, model.bias, cfg.l2);
            let mut step = cfg.lr;
            loop {
                let w: Vec<f64> = model
                    .weights
                    .iter()
                    .zip(&gw)
                    .map(|(w, g)| w - step * g)
                    .collect();
                let b = model.bias - step * gb;
                let cand = objective(&w, b);
                if cand <= current {
                    model.weights = w;
                    model.bias = b;
                    current = cand;
                    trace.push(current);
                    break;
                }
                step *= 0.5;
                if step < cfg.lr * 1e-12 {
                    break 'outer;
                }
            }
        }
        Ok((model, trace))
    }

    /// Standardized feature vector; missing values sit at the training mean (0).
    pub fn standardize(&self, r: &SampleRecord) -> Vec<f64> {
        self.feature_list
            .iter()
            .zip(self.feature_means.iter().zip(&self.feature_sds))
            .map(|(f, (m, sd))| f.extract(r).map_or(0.0, |v| (v - m) / sd))
            .collect()
    }

    pub fn score(&self, r: &SampleRecord) -> f64 {
        let z = self.standardize(r);
        logistic(self.bias + dot(&self.weights, &z))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn loss(x: &[Vec<f64>], y: &[f64], w: &[f64], b: f64, l2: f64) -> f64 {
    let data: f64 = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| {
            let z = b + dot(w, xi);
            softplus(z) - yi * z
        })
        .sum::<f64>()
        / x.len() as f64;
    data + 0.5 * l2 * w.iter().map(|v| v * v).sum::<f64>()
}

fn gradient(x: &[Vec<f64>], y: &[f64], w: &[f64], b: f64, l2: f64) -> (Vec<f64>, f64) {
    let n = x.len() as f64;
    let mut gw = vec![0.0; w.len()];
    let mut gb = 0.0;
    for (xi, yi) in x.iter().zip(y) {
        let r = logistic(b + dot(w, xi)) - yi;
        gb += r;
        for (g, v) in gw.iter_mut().zip(xi) {
            *g += r * v;
        }
    }
    for (g, wj) in gw.iter_mut().zip(w) {
        *g = *g / n + l2 * wj;
    }
    (gw, gb / n)
}
