//! End-to-end run: ingest, label, cross-validate, score, calibrate, monitor.
//!
//! Every fitted quantity (label statistics, normalization anchors, scorer
//! weights, threshold pools) comes from the reference period, or from the
//! training folds inside cross-validation. Rows after `ref_end` are scored
//! but never fitted on.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::drift::{drift_report, DriftParams};
use crate::error::{Error, Result};
use crate::fusion::{FitConfig, LinearScorer};
use crate::ingest::{load_table, summarize_ranges, write_table};
use crate::labeling::{mine_labels_with, MiningConfig};
use crate::metrics::{auroc, evaluate, EvalReport};
use crate::monthly::MonthlyStats;
use crate::ops_risk::{calibrate_thresholds, score_record, NormStats, OpsRiskConfig, ThresholdSet};
use crate::output::{write_json, write_scored, ScoredRow};
use crate::record::SampleRecord;
use crate::splits::{group_safe_folds, Folds};
use crate::synth::{generate, SyntheticConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// Sample table; the synthetic generator is used when absent.
    pub input: Option<PathBuf>,
    pub synthetic: SyntheticConfig,
    pub out_dir: PathBuf,
    /// Last day of the reference period (inclusive).
    pub ref_end: NaiveDate,
    pub k: usize,
    pub seed: u64,
    /// Keep `hab_prob` from the input instead of the baseline scorer.
    pub use_input_hab_prob: bool,
    pub min_recall: f64,
    pub reliability_bins: usize,
    pub write_figures: bool,
    pub mining: MiningConfig,
    pub ops: OpsRiskConfig,
    pub fusion: FitConfig,
    pub drift: DriftParams,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            input: None,
            synthetic: SyntheticConfig::default(),
            out_dir: PathBuf::from("runs/latest"),
            ref_end: NaiveDate::from_ymd_opt(2024, 12, 31).unwrap(),
            k: 5,
            seed: 17,
            use_input_hab_prob: false,
            min_recall: 0.60,
            reliability_bins: 10,
            write_figures: true,
            mining: MiningConfig::default(),
            ops: OpsRiskConfig::default(),
            fusion: FitConfig::default(),
            drift: DriftParams::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.mining.validate()?;
        self.ops.validate()?;
        self.drift.validate()?;
        if !(0.0..=1.0).contains(&self.min_recall) {
            return Err(Error::InvalidInput("min_recall must lie in [0, 1]".into()));
        }
        Ok(())
    }

    pub fn is_reference(&self, r: &SampleRecord) -> bool {
        r.timestamp <= self.ref_end
    }
}

/// Everything fitted during a run, serialized for the leakage check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedParameters {
    pub label_stats: MonthlyStats,
    pub norm_stats: NormStats,
    pub scorer: Option<LinearScorer>,
    pub thresholds: ThresholdSet,
}

impl FittedParameters {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// Statistics fitted on a reference set: monthly label statistics and the
/// ops-risk normalization anchors (`stats.json`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub label_stats: MonthlyStats,
    pub norm_stats: NormStats,
}

impl RunStats {
    pub fn fit(reference: &[SampleRecord], ops: &OpsRiskConfig) -> Self {
        RunStats {
            label_stats: MonthlyStats::fit(reference),
            norm_stats: NormStats::fit(reference, ops),
        }
    }
}

fn stage<T>(name: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| e.in_stage(name))
}

/// Labels `records` with statistics fitted on `train` only.
fn label_with_train_stats(
    train: &[SampleRecord],
    records: &[SampleRecord],
    cfg: &MiningConfig,
) -> Result<(MonthlyStats, Vec<SampleRecord>)> {
    let stats = MonthlyStats::fit(train);
    let labeled = mine_labels_with(records, &stats, cfg)?;
    Ok((stats, labeled))
}

/// Fits every run parameter from the reference rows of `records`.
pub fn fit_parameters(records: &[SampleRecord], cfg: &RunConfig) -> Result<FittedParameters> {
    Ok(fit_all(records, cfg)?.0)
}

/// Parameters plus the labeled, scored record set.
fn fit_all(
    records: &[SampleRecord],
    cfg: &RunConfig,
) -> Result<(FittedParameters, Vec<SampleRecord>)> {
    let reference: Vec<SampleRecord> = records
        .iter()
        .filter(|r| cfg.is_reference(r))
        .cloned()
        .collect();
    if reference.is_empty() {
        return Err(
            Error::InvalidInput(format!("no rows on or before ref_end {}", cfg.ref_end))
                .in_stage("split"),
        );
    }
    let (label_stats, mut labeled) = stage(
        "label-mine",
        label_with_train_stats(&reference, records, &cfg.mining),
    )?;

    let scorer = if cfg.use_input_hab_prob {
        None
    } else {
        let train: Vec<SampleRecord> = labeled
            .iter()
            .filter(|r| cfg.is_reference(r))
            .cloned()
            .collect();
        let model = stage("train-baseline", LinearScorer::fit(&train, &cfg.fusion))?;
        for r in &mut labeled {
            r.hab_prob = Some(model.score(r));
        }
        Some(model)
    };

    let ref_rows = || labeled.iter().filter(|r| cfg.is_reference(r));
    let norm_stats = NormStats::fit(ref_rows(), &cfg.ops);
    let hab_pool: Vec<f64> = ref_rows().filter_map(|r| r.hab_prob).collect();
    let ops_pool: Vec<f64> = ref_rows()
        .filter_map(|r| score_record(r, &norm_stats, &cfg.ops).ops_risk)
        .collect();
    let thresholds = calibrate_thresholds(&hab_pool, &ops_pool, &cfg.ops);
    Ok((
        FittedParameters {
            label_stats,
            norm_stats,
            scorer,
            thresholds,
        },
        labeled,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldEval {
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    /// `None` when the test fold holds a single class.
    pub auroc: Option<f64>,
}

/// Out-of-fold evaluation over the (train, test) pairs of a split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvEvaluation {
    pub scheme: String,
    pub n_folds: usize,
    /// Seed of the group-safe assignment.
    pub seed: Option<u64>,
    pub folds: Vec<FoldEval>,
    pub pooled: EvalReport,
}

/// Label statistics and scorer fitted on the `train` rows of `records` only.
pub fn fit_fold(
    records: &[SampleRecord],
    train: &[usize],
    cfg: &RunConfig,
) -> Result<(MonthlyStats, LinearScorer)> {
    let train: Vec<SampleRecord> = train.iter().map(|&i| records[i].clone()).collect();
    let (stats, train_l) = label_with_train_stats(&train, &train, &cfg.mining)?;
    let model = LinearScorer::fit(&train_l, &cfg.fusion)?;
    Ok((stats, model))
}

/// Evaluation plus out-of-fold scores and labels, indexed like the input.
pub type CvOutput = (CvEvaluation, Vec<Option<f64>>, Vec<Option<bool>>);

/// Per-fold: label stats and scorer from the training folds, then scores for
/// the held-out fold. Returns the evaluation and the out-of-fold scores.
#[allow(clippy::type_complexity)]
pub fn cross_validate(
    records: &[SampleRecord],
    folds: &Folds,
    cfg: &RunConfig,
) -> Result<CvOutput> {
    let pairs = folds.pairs();
    let per_fold: Vec<(FoldEval, Vec<(usize, f64, bool)>)> = pairs
        .par_iter()
        .enumerate()
        .map(|(f, (train_idx, test_idx))| -> Result<_> {
            let (stats, model) = fit_fold(records, train_idx, cfg)?;
            let test: Vec<SampleRecord> = test_idx.iter().map(|&i| records[i].clone()).collect();
            let test_l = mine_labels_with(&test, &stats, &cfg.mining)?;
            let out: Vec<(usize, f64, bool)> = test_idx
                .iter()
                .zip(&test_l)
                .filter_map(|(&i, r)| r.y_final.map(|y| (i, model.score(r), y)))
                .collect();
            let s: Vec<f64> = out.iter().map(|o| o.1).collect();
            let y: Vec<bool> = out.iter().map(|o| o.2).collect();
            let eval = FoldEval {
                fold: f,
                n_train: train_idx.len(),
                n_test: test_idx.len(),
                auroc: auroc(&s, &y).ok(),
            };
            Ok((eval, out))
        })
        .collect::<Result<_>>()?;

    let mut oof_score = vec![None; records.len()];
    let mut oof_label = vec![None; records.len()];
    let mut fold_evals = Vec::new();
    for (eval, out) in per_fold {
        fold_evals.push(eval);
        for (i, s, y) in out {
            oof_score[i] = Some(s);
            oof_label[i] = Some(y);
        }
    }
    let (s, y): (Vec<f64>, Vec<bool>) = oof_score
        .iter()
        .zip(&oof_label)
        .filter_map(|(s, y)| Some(((*s)?, (*y)?)))
        .unzip();
    let pooled = evaluate(&s, &y, cfg.min_recall, cfg.reliability_bins)?;
    Ok((
        CvEvaluation {
            scheme: match folds {
                Folds::GroupSafe(_) => "group_safe".into(),
                Folds::Temporal(_) => "temporal".into(),
            },
            n_folds: pairs.len(),
            seed: match folds {
                Folds::GroupSafe(a) => Some(a.seed),
                Folds::Temporal(_) => None,
            },
            folds: fold_evals,
            pooled,
        },
        oof_score,
        oof_label,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalArtifact {
    /// Labels of the target column: `y_final` mined with training-only statistics.
    pub target: String,
    pub cross_validation: CvEvaluation,
    /// Reference-fitted scorer evaluated on the current period, when it has both classes.
    pub forward_holdout: Option<EvalReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub name: String,
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    /// Wall-clock creation time; the only non-deterministic field.
    pub created_at: String,
    pub config: RunConfig,
    pub inputs: Vec<FileDigest>,
    pub artifacts: Vec<FileDigest>,
}

impl RunManifest {
    pub fn artifact(&self, name: &str) -> Option<&FileDigest> {
        self.artifacts.iter().find(|a| a.name == name)
    }
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn digest(name: &str, path: PathBuf) -> Result<FileDigest> {
    Ok(FileDigest {
        name: name.to_string(),
        sha256: sha256_file(&path)?,
        path,
    })
}

pub const MANIFEST: &str = "manifest.json";

/// Loads the configured input, or generates the synthetic table.
pub fn load_input(cfg: &RunConfig) -> Result<Vec<SampleRecord>> {
    match &cfg.input {
        Some(p) => load_table(p),
        None => generate(&cfg.synthetic),
    }
}

/// Runs every stage and writes the artifacts into `cfg.out_dir`.
pub fn run_pipeline(cfg: &RunConfig) -> Result<RunManifest> {
    stage("config", cfg.validate())?;
    let records = stage("ingest", load_input(cfg))?;
    run_on_records(cfg, records)
}

pub fn run_on_records(cfg: &RunConfig, records: Vec<SampleRecord>) -> Result<RunManifest> {
    let out = &cfg.out_dir;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e).in_stage("write"))?;
    let mut artifacts: Vec<(&str, PathBuf)> = Vec::new();
    let mut inputs = Vec::new();
    match &cfg.input {
        Some(p) => inputs.push(stage("ingest", digest("input", p.clone()))?),
        None => {
            let p = out.join("table.csv");
            stage("write", write_table(&p, &records))?;
            artifacts.push(("table", p));
        }
    }

    let ranges = summarize_ranges(&records);

    let reference: Vec<SampleRecord> = records
        .iter()
        .filter(|r| cfg.is_reference(r))
        .cloned()
        .collect();
    let folds = Folds::GroupSafe(stage(
        "split",
        group_safe_folds(&reference, cfg.k, cfg.seed),
    )?);
    let (cv, _, _) = stage("evaluate", cross_validate(&reference, &folds, cfg))?;

    let (params, labeled) = fit_all(&records, cfg)?;
    let rows: Vec<ScoredRow> = {
        let mut rows: Vec<ScoredRow> = labeled
            .par_iter()
            .map(|r| {
                ScoredRow::new(
                    r,
                    &score_record(r, &params.norm_stats, &cfg.ops),
                    &params.thresholds,
                )
            })
            .collect();
        rows.sort_by(|a, b| {
            (&a.plant_id, a.timestamp, &a.group_key).cmp(&(&b.plant_id, b.timestamp, &b.group_key))
        });
        rows
    };

    let forward_holdout = {
        let (s, y): (Vec<f64>, Vec<bool>) = labeled
            .iter()
            .filter(|r| !cfg.is_reference(r))
            .filter_map(|r| Some((r.hab_prob?, r.y_final?)))
            .unzip();
        evaluate(&s, &y, cfg.min_recall, cfg.reliability_bins).ok()
    };
    let eval = EvalArtifact {
        target: "y_final".into(),
        cross_validation: cv,
        forward_holdout,
    };

    let (ref_rows, cur_rows): (Vec<ScoredRow>, Vec<ScoredRow>) = rows
        .iter()
        .cloned()
        .partition(|r| r.timestamp <= cfg.ref_end);
    let drift = stage(
        "drift",
        drift_report(&ref_rows, &cur_rows, &params.thresholds, &cfg.drift),
    )?;

    let write = |name: &'static str,
                 file: &str,
                 f: &dyn Fn(&Path) -> Result<()>|
     -> Result<(&'static str, PathBuf)> {
        let p = out.join(file);
        stage("write", f(&p))?;
        Ok((name, p))
    };
    artifacts.push(write("ops", "ops.csv", &|p| write_scored(p, &rows))?);
    artifacts.push(write("eval", "eval.json", &|p| write_json(p, &eval))?);
    artifacts.push(write("thresholds", "thresholds.json", &|p| {
        write_json(p, &params.thresholds)
    })?);
    artifacts.push(write("drift", "drift.json", &|p| write_json(p, &drift))?);
    artifacts.push(write("ranges", "ranges.json", &|p| write_json(p, &ranges))?);
    artifacts.push(write("folds", "folds.json", &|p| write_json(p, &folds))?);
    let stats = RunStats {
        label_stats: params.label_stats.clone(),
        norm_stats: params.norm_stats.clone(),
    };
    artifacts.push(write("stats", "stats.json", &|p| write_json(p, &stats))?);
    if let Some(model) = &params.scorer {
        artifacts.push(write("model", "model.json", &|p| write_json(p, model))?);
    }
    if cfg.write_figures {
        for (file, svg) in eval.cross_validation.pooled.svg_figures() {
            artifacts.push(write("figure", file, &|p| {
                std::fs::write(p, &svg).map_err(|e| Error::io(p, e))
            })?);
        }
    }

    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        created_at: chrono::Local::now().to_rfc3339(),
        config: cfg.clone(),
        inputs,
        artifacts: artifacts
            .into_iter()
            .map(|(name, p)| digest(name, p))
            .collect::<Result<_>>()?,
    };
    stage("write", write_json(out.join(MANIFEST), &manifest))?;
    log::info!(
        "run complete: {} rows, {} artifacts in {}",
        rows.len(),
        manifest.artifacts.len(),
        out.display()
    );
    Ok(manifest)
}
