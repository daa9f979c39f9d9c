//! Reference-vs-current distribution shift (PSI, KS), monthly alert rates
//! and top-k events from a pipeline run.
//!
//! ```text
//! cargo run --example drift_monitoring
//! ```

use rednet::drift::{drift_report, ks_distance, psi, DriftParams};
use rednet::ops_risk::ThresholdSet;
use rednet::output::{load_scored, read_json};
use rednet::pipeline::{run_pipeline, RunConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Identical samples give zero shift; a pure location shift saturates KS.
    let a: Vec<f64> = (0..100).map(|i| i as f64 / 100.0).collect();
    let b: Vec<f64> = a.iter().map(|x| x + 2.0).collect();
    println!(
        "self: PSI {:.4}  KS {:.4}",
        psi(&a, &a, 10, 1e-4)?,
        ks_distance(&a, &a)?
    );
    println!(
        "shifted: PSI {:.4}  KS {:.4}",
        psi(&a, &b, 10, 1e-4)?,
        ks_distance(&a, &b)?
    );

    let cfg = RunConfig {
        out_dir: std::env::temp_dir().join("rednet-drift-example"),
        ..RunConfig::default()
    };
    run_pipeline(&cfg)?;
    let rows = load_scored(cfg.out_dir.join("ops.csv"))?;
    let thresholds: ThresholdSet = read_json(cfg.out_dir.join("thresholds.json"))?;
    let (reference, current): (Vec<_>, Vec<_>) =
        rows.into_iter().partition(|r| r.timestamp <= cfg.ref_end);
    let report = drift_report(&reference, &current, &thresholds, &DriftParams::default())?;
    for (plant, s) in &report.plants {
        println!(
            "plant {plant}: n_ref {} n_cur {}  PSI {:.3}  KS {:.3}",
            s.n_ref,
            s.n_cur,
            s.psi.unwrap_or(f64::NAN),
            s.ks.unwrap_or(f64::NAN)
        );
    }
    for m in report.monthly_alert_rates.iter().rev().take(4) {
        println!(
            "  {} {}: WATCH+ {:.3}  ACTION {:.3} (n={})",
            m.plant_id, m.month, m.rate_watch, m.rate_action, m.n
        );
    }
    if let Some(top) = report.topk.get("A") {
        for r in top.iter().take(3) {
            println!(
                "  top A {} ops_risk {:.3}",
                r.timestamp,
                r.ops_risk.unwrap_or(f64::NAN)
            );
        }
    }
    Ok(())
}
