//! Fits the standardized logistic fusion scorer on one group-safe fold and
//! reports held-out AUROC alongside the fitted weights.
//!
//! ```text
//! cargo run --example baseline_fusion
//! ```

use rednet::fusion::{FitConfig, LinearScorer};
use rednet::labeling::{mine_labels_with, MiningConfig};
use rednet::metrics::auroc;
use rednet::monthly::MonthlyStats;
use rednet::splits::group_safe_folds;
use rednet::synth::{generate, SyntheticConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let records = generate(&SyntheticConfig::default())?;
    let folds = group_safe_folds(&records, 5, 17)?;
    let (train_idx, test_idx) = folds.split(0);
    let pick = |idx: &[usize]| idx.iter().map(|&i| records[i].clone()).collect::<Vec<_>>();
    let (train, test) = (pick(&train_idx), pick(&test_idx));

    // Label statistics come from the training fold only.
    let stats = MonthlyStats::fit(&train);
    let mining = MiningConfig::default();
    let train = mine_labels_with(&train, &stats, &mining)?;
    let test = mine_labels_with(&test, &stats, &mining)?;

    let (model, trace) = LinearScorer::fit_traced(&train, &FitConfig::default())?;
    println!(
        "loss {:.4} -> {:.4} over {} steps",
        trace[0],
        trace[trace.len() - 1],
        trace.len() - 1
    );
    for (f, w) in model.feature_list.iter().zip(&model.weights) {
        println!("  {:<12} {w:+.3}", f.name());
    }

    let (scores, labels): (Vec<f64>, Vec<bool>) = test
        .iter()
        .filter_map(|r| Some((model.score(r), r.y_final?)))
        .unzip();
    println!(
        "fold 0 held-out AUROC {:.3} on {} rows",
        auroc(&scores, &labels)?,
        scores.len()
    );
    Ok(())
}
