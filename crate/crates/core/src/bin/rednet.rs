use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use clap::{Parser, Subcommand, ValueEnum};

use rednet::console::{serve, ConsoleApi, ARTIFACTS_ENV};
use rednet::drift::{drift_report, DriftParams};
use rednet::fusion::{FitConfig, LinearScorer};
use rednet::indices::{read_chip_file, summary_header, summary_row};
use rednet::ingest::{load_table, summarize_ranges, write_table};
use rednet::labeling::{mine_labels, MiningConfig};
use rednet::metrics::evaluate;
use rednet::ops_risk::{calibrate_thresholds, score_record, OpsRiskConfig, ThresholdSet};
use rednet::output::{
    load_scored, read_json, read_score_columns, write_json, write_scored, ScoredRow,
};
use rednet::pipeline::{cross_validate, run_pipeline, RunConfig, RunStats};
use rednet::record::{parse_date, SampleRecord};
use rednet::splits::{group_safe_folds, temporal_folds, Folds};
use rednet::synth::{generate, write_raw_csv, SyntheticConfig};
use rednet::Result;

#[derive(Parser)]
#[command(name = "rednet", version, about = "HAB risk decision layer")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum SplitMode {
    Group,
    Temporal,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write the synthetic sample table.
    Generate {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 17)]
        seed: u64,
        /// Missing chlor_a/kd490/nflh as `0` placeholders.
        #[arg(long)]
        raw: bool,
    },
    /// Validate a table and write per-column ranges.
    Ingest {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        ranges_out: PathBuf,
    },
    /// Summarize spectral indices of binary chip files.
    Indices {
        #[arg(long)]
        chips: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Attach weak and final labels.
    LabelMine {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        z_hi: f64,
        #[arg(long, default_value_t = 2)]
        min_quality: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write group-safe or temporal folds.
    Split {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "group")]
        mode: SplitMode,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, default_value_t = 17)]
        seed: u64,
        #[arg(long, value_delimiter = ',', value_parser = parse_day)]
        cutoffs: Vec<NaiveDate>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit the baseline scorer on a labeled table.
    TrainBaseline {
        #[arg(long = "in")]
        input: PathBuf,
        /// Also write out-of-fold predictions and their evaluation.
        #[arg(long)]
        folds: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Table with `hab_prob` from the final model.
        #[arg(long)]
        scored_out: Option<PathBuf>,
        #[arg(long)]
        oof_out: Option<PathBuf>,
    },
    /// Fit label statistics and ops-risk normalization on a reference period.
    FitStats {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_parser = parse_day)]
        ref_end: Option<NaiveDate>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a table carrying `hab_prob` into the ops-risk series.
    OpsRisk {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        stats: PathBuf,
        /// Alert states use these thresholds; base thresholds otherwise.
        #[arg(long)]
        thresholds: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Match ops-risk thresholds to legacy exceedance rates.
    Calibrate {
        #[arg(long)]
        pool: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Ranking, operating-point and reliability metrics.
    Evaluate {
        #[arg(long)]
        scores: PathBuf,
        #[arg(long, default_value = "hab_prob")]
        score_col: String,
        #[arg(long, default_value = "y_final")]
        label_col: String,
        #[arg(long, default_value_t = 0.60)]
        min_recall: f64,
        #[arg(long, default_value_t = 10)]
        bins: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg_dir: Option<PathBuf>,
    },
    /// PSI/KS drift, monthly alert rates and top-k events.
    Drift {
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long)]
        cur: PathBuf,
        #[arg(long)]
        thresholds: PathBuf,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Full pipeline from a TOML run file.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Serve the console API over a run directory.
    Serve {
        #[arg(long, env = ARTIFACTS_ENV)]
        artifacts: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
    },
}

fn parse_day(s: &str) -> std::result::Result<NaiveDate, String> {
    parse_date(s).map_err(|e| e.to_string())
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e}");
        let mut src = std::error::Error::source(&e);
        while let Some(s) = src {
            eprintln!("  caused by: {s}");
            src = s.source();
        }
        std::process::exit(1);
    }
}

fn labeled_only(records: &[SampleRecord]) -> Result<()> {
    if records.iter().all(|r| r.y_final.is_none()) {
        return Err(rednet::Error::InvalidInput(
            "table has no y_final labels; run label-mine first".into(),
        ));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Generate { out, seed, raw } => {
            let records = generate(&SyntheticConfig {
                seed,
                ..SyntheticConfig::default()
            })?;
            if raw {
                write_raw_csv(&out, &records)?;
            } else {
                write_table(&out, &records)?;
            }
            log::info!("wrote {} rows to {}", records.len(), out.display());
        }
        Cmd::Ingest { input, ranges_out } => {
            let records = load_table(&input)?;
            write_json(&ranges_out, &summarize_ranges(&records))?;
            log::info!("{} rows validated", records.len());
        }
        Cmd::Indices { chips, out } => {
            let (sidecar, decoded) = read_chip_file(&chips)?;
            let wl = sidecar.wavelengths();
            let mut w = csv::Writer::from_path(&out)?;
            w.write_record(summary_header())?;
            for (meta, bands) in &decoded {
                w.write_record(summary_row(meta, &bands.summarize(wl)?))?;
            }
            w.flush().map_err(|e| rednet::Error::io(&out, e))?;
            log::info!("summarized {} chips", decoded.len());
        }
        Cmd::LabelMine {
            input,
            z_hi,
            min_quality,
            out,
        } => {
            let cfg = MiningConfig { z_hi, min_quality };
            let labeled = mine_labels(&load_table(&input)?, &cfg)?;
            let pos = labeled.iter().filter(|r| r.y_final == Some(true)).count();
            write_table(&out, &labeled)?;
            log::info!("{} of {} rows labeled positive", pos, labeled.len());
        }
        Cmd::Split {
            input,
            mode,
            k,
            seed,
            cutoffs,
            out,
        } => {
            let records = load_table(&input)?;
            let folds = match mode {
                SplitMode::Group => Folds::GroupSafe(group_safe_folds(&records, k, seed)?),
                SplitMode::Temporal => Folds::Temporal(temporal_folds(&records, &cutoffs)?),
            };
            write_json(&out, &folds)?;
        }
        Cmd::TrainBaseline {
            input,
            folds,
            out,
            scored_out,
            oof_out,
        } => {
            let mut records = load_table(&input)?;
            labeled_only(&records)?;
            let cfg = RunConfig::default();
            if let Some(folds) = folds {
                let folds: Folds = read_json(&folds)?;
                // fold labels are re-mined from training-fold statistics
                let (cv, oof, _) = cross_validate(&records, &folds, &cfg)?;
                log::info!(
                    "{} folds: pooled AUROC {:.4}, AUPRC {:.4}",
                    cv.n_folds,
                    cv.pooled.auroc,
                    cv.pooled.auprc
                );
                if let Some(p) = oof_out {
                    let oof_rows: Vec<SampleRecord> = records
                        .iter()
                        .zip(&oof)
                        .map(|(r, s)| SampleRecord {
                            hab_prob: *s,
                            ..r.clone()
                        })
                        .collect();
                    write_table(&p, &oof_rows)?;
                }
            }
            let model = LinearScorer::fit(&records, &FitConfig::default())?;
            write_json(&out, &model)?;
            if let Some(p) = scored_out {
                for r in &mut records {
                    r.hab_prob = Some(model.score(r));
                }
                write_table(&p, &records)?;
            }
        }
        Cmd::FitStats {
            input,
            ref_end,
            out,
        } => {
            let records = load_table(&input)?;
            let reference: Vec<SampleRecord> = records
                .into_iter()
                .filter(|r| ref_end.is_none_or(|e| r.timestamp <= e))
                .collect();
            write_json(&out, &RunStats::fit(&reference, &OpsRiskConfig::default()))?;
            log::info!("fitted on {} reference rows", reference.len());
        }
        Cmd::OpsRisk {
            input,
            stats,
            thresholds,
            out,
        } => {
            let cfg = OpsRiskConfig::default();
            let stats: RunStats = read_json(&stats)?;
            let t: ThresholdSet = match thresholds {
                Some(p) => read_json(&p)?,
                None => cfg.base_thresholds(),
            };
            t.check(&cfg)?;
            let rows: Vec<ScoredRow> = load_table(&input)?
                .iter()
                .map(|r| ScoredRow::new(r, &score_record(r, &stats.norm_stats, &cfg), &t))
                .collect();
            write_scored(&out, &rows)?;
        }
        Cmd::Calibrate { pool, out } => {
            let rows = load_scored(&pool)?;
            let hab: Vec<f64> = rows.iter().filter_map(|r| r.hab_prob).collect();
            let ops: Vec<f64> = rows.iter().filter_map(|r| r.ops_risk).collect();
            let t = calibrate_thresholds(&hab, &ops, &OpsRiskConfig::default());
            log::info!(
                "WATCH {:.4}, ACTION {:.4} ({:?})",
                t.tau_watch,
                t.tau_action,
                t.source
            );
            write_json(&out, &t)?;
        }
        Cmd::Evaluate {
            scores,
            score_col,
            label_col,
            min_recall,
            bins,
            out,
            svg_dir,
        } => {
            let (s, y) = read_score_columns(&scores, &score_col, &label_col)?;
            let report = evaluate(&s, &y, min_recall, bins)?;
            log::info!("AUROC {:.4}, AUPRC {:.4}", report.auroc, report.auprc);
            write_json(&out, &report)?;
            if let Some(dir) = svg_dir {
                write_figures(&dir, &report.svg_figures())?;
            }
        }
        Cmd::Drift {
            reference,
            cur,
            thresholds,
            k,
            out,
        } => {
            let t: ThresholdSet = read_json(&thresholds)?;
            let params = DriftParams {
                top_k: k,
                ..DriftParams::default()
            };
            let report = drift_report(&load_scored(&reference)?, &load_scored(&cur)?, &t, &params)?;
            write_json(&out, &report)?;
        }
        Cmd::Run { config, out_dir } => {
            let mut cfg = match config {
                Some(p) => RunConfig::load(&p)?,
                None => RunConfig::default(),
            };
            if let Some(d) = out_dir {
                cfg.out_dir = d;
            }
            let m = run_pipeline(&cfg)?;
            for a in &m.artifacts {
                println!("{}\t{}", a.sha256, a.path.display());
            }
        }
        Cmd::Serve {
            artifacts,
            port,
            host,
        } => {
            let api = ConsoleApi::load(&artifacts)?;
            let rt =
                tokio::runtime::Runtime::new().map_err(|e| rednet::Error::io(&artifacts, e))?;
            rt.block_on(serve(api, SocketAddr::new(host, port), |a| {
                log::info!("serving {} on http://{a}", artifacts.display())
            }))?;
        }
    }
    Ok(())
}

fn write_figures(dir: &Path, figures: &[(&str, String)]) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| rednet::Error::io(dir, e))?;
    for (name, svg) in figures {
        let p = dir.join(name);
        std::fs::write(&p, svg).map_err(|e| rednet::Error::io(&p, e))?;
    }
    Ok(())
}
