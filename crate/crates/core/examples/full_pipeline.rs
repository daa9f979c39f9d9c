//! Full synthetic run: 4 plants, 2017–2025, reference period through 2024.
//!
//! ```text
//! cargo run --release --example full_pipeline -- [out_dir]
//! ```

use rednet::drift::DriftReport;
use rednet::output::read_json;
use rednet::pipeline::{run_pipeline, EvalArtifact, RunConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "runs/example".into());
    let cfg = RunConfig {
        out_dir: out.into(),
        ..RunConfig::default()
    };
    let t0 = std::time::Instant::now();
    let manifest = run_pipeline(&cfg)?;
    println!("run finished in {:.2?}", t0.elapsed());
    for a in &manifest.artifacts {
        println!("  {:<10} {}  {}", a.name, &a.sha256[..12], a.path.display());
    }

    let eval: EvalArtifact = read_json(cfg.out_dir.join("eval.json"))?;
    let cv = &eval.cross_validation.pooled;
    println!(
        "group-safe CV (k={}): AUROC {:.3}  AUPRC {:.3}  prevalence {:.3}",
        eval.cross_validation.n_folds, cv.auroc, cv.auprc, cv.prevalence
    );
    println!(
        "operating point tau={:.3}: precision {:.3} recall {:.3}",
        cv.confusion.threshold, cv.confusion.precision, cv.confusion.recall
    );
    if let Some(h) = &eval.forward_holdout {
        println!(
            "forward holdout: AUROC {:.3}  AUPRC {:.3}",
            h.auroc, h.auprc
        );
    }

    let drift: DriftReport = read_json(cfg.out_dir.join("drift.json"))?;
    println!(
        "thresholds: WATCH {:.4}  ACTION {:.4}",
        drift.metadata.tau_watch, drift.metadata.tau_action
    );
    for (plant, s) in &drift.plants {
        println!("  plant {plant}: PSI {:?}  KS {:?}", s.psi, s.ks);
    }
    println!(
        "  pooled:  PSI {:?}  KS {:?}",
        drift.pooled.psi, drift.pooled.ks
    );
    Ok(())
}
