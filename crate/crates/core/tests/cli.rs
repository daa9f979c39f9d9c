use std::path::Path;
use std::process::Command;

use rednet::drift::DriftReport;
use rednet::ops_risk::ThresholdSet;
use rednet::output::{load_scored, read_json};
use rednet::splits::Folds;

fn rednet(dir: &Path, args: &[&str]) {
    let out = Command::new(env!("CARGO_BIN_EXE_rednet"))
        .args(args)
        .current_dir(dir)
        .env("RUST_LOG", "warn")
        .output()
        .expect("spawn rednet");
    assert!(
        out.status.success(),
        "rednet {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn stage_by_stage_commands_chain() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    rednet(d, &["generate", "--out", "raw.csv", "--raw"]);
    rednet(
        d,
        &["ingest", "--in", "raw.csv", "--ranges-out", "ranges.json"],
    );
    let ranges: serde_json::Value = read_json(d.join("ranges.json")).unwrap();
    assert!(
        ranges["chlor_a"]["min"].as_f64().unwrap() > 0.0,
        "zero placeholders must not reach the ranges"
    );

    rednet(
        d,
        &[
            "label-mine",
            "--in",
            "raw.csv",
            "--z-hi",
            "2.0",
            "--min-quality",
            "2",
            "--out",
            "labeled.csv",
        ],
    );
    rednet(
        d,
        &[
            "split",
            "--in",
            "labeled.csv",
            "--mode",
            "group",
            "--k",
            "5",
            "--seed",
            "17",
            "--out",
            "folds.json",
        ],
    );
    let folds: Folds = read_json(d.join("folds.json")).unwrap();
    assert!(matches!(folds, Folds::GroupSafe(ref a) if a.k == 5));

    rednet(
        d,
        &[
            "train-baseline",
            "--in",
            "labeled.csv",
            "--folds",
            "folds.json",
            "--out",
            "model.json",
            "--scored-out",
            "scored.csv",
            "--oof-out",
            "oof.csv",
        ],
    );
    let model: serde_json::Value = read_json(d.join("model.json")).unwrap();
    for key in [
        "feature_list",
        "feature_means",
        "feature_sds",
        "weights",
        "bias",
    ] {
        assert!(model.get(key).is_some(), "model.json lacks {key}");
    }

    rednet(
        d,
        &[
            "fit-stats",
            "--in",
            "scored.csv",
            "--ref-end",
            "2024-12-31",
            "--out",
            "stats.json",
        ],
    );
    rednet(
        d,
        &[
            "ops-risk",
            "--in",
            "scored.csv",
            "--stats",
            "stats.json",
            "--out",
            "ops.csv",
        ],
    );
    rednet(
        d,
        &["calibrate", "--pool", "ops.csv", "--out", "thresholds.json"],
    );
    let t: ThresholdSet = read_json(d.join("thresholds.json")).unwrap();
    assert!(t.tau_action - t.tau_watch >= 0.04);

    rednet(
        d,
        &[
            "evaluate",
            "--scores",
            "oof.csv",
            "--label-col",
            "y_final",
            "--min-recall",
            "0.60",
            "--out",
            "eval.json",
            "--svg-dir",
            "figs",
        ],
    );
    assert!(d.join("figs/roc_curve.svg").exists());

    let rows = load_scored(d.join("ops.csv")).unwrap();
    let cut = chrono::NaiveDate::from_ymd_opt(2024, 12, 31).unwrap();
    let (r, c): (Vec<_>, Vec<_>) = rows.into_iter().partition(|r| r.timestamp <= cut);
    rednet::output::write_scored(d.join("ref.csv"), &r).unwrap();
    rednet::output::write_scored(d.join("cur.csv"), &c).unwrap();
    rednet(
        d,
        &[
            "drift",
            "--ref",
            "ref.csv",
            "--cur",
            "cur.csv",
            "--thresholds",
            "thresholds.json",
            "--k",
            "10",
            "--out",
            "drift.json",
        ],
    );
    let drift: DriftReport = read_json(d.join("drift.json")).unwrap();
    assert_eq!(drift.plants.len(), 4);
    assert!(drift.topk.values().all(|v| v.len() == 10));
}

#[test]
fn run_reads_a_toml_config() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    std::fs::write(
        d.join("run.toml"),
        "out_dir = \"out\"\nk = 3\n[synthetic]\nstart = \"2023-01-01\"\n[drift]\ntop_k = 4\n",
    )
    .unwrap();
    rednet(d, &["run", "--config", "run.toml"]);
    for f in [
        "manifest.json",
        "ops.csv",
        "eval.json",
        "drift.json",
        "thresholds.json",
        "ranges.json",
    ] {
        assert!(d.join("out").join(f).exists(), "missing {f}");
    }
    let drift: DriftReport = read_json(d.join("out/drift.json")).unwrap();
    assert_eq!(drift.metadata.top_k, 4);
}

#[test]
fn bad_fold_count_exits_nonzero() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("run.toml"), "out_dir = \"out\"\nk = 1\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_rednet"))
        .args(["run", "--config", "run.toml"])
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("split"));
}
