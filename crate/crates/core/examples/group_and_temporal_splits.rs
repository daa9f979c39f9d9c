//! Group-safe k-fold assignment (no acquisition group spans two folds) and
//! expanding-window temporal folds.
//!
//! ```text
//! cargo run --example group_and_temporal_splits
//! ```

use std::collections::HashMap;

use chrono::NaiveDate;
use rednet::splits::{group_safe_folds, temporal_folds};
use rednet::synth::{generate, SyntheticConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let records = generate(&SyntheticConfig::default())?;
    let folds = group_safe_folds(&records, 5, 17)?;
    println!("group-safe k=5 fold sizes: {:?}", folds.fold_sizes());

    let mut fold_of_group: HashMap<&str, usize> = HashMap::new();
    for (r, &f) in records.iter().zip(&folds.fold_of) {
        let prev = *fold_of_group.entry(&r.group_key).or_insert(f);
        assert_eq!(prev, f, "group {} split across folds", r.group_key);
    }
    println!("{} groups, each confined to one fold", fold_of_group.len());

    let cutoffs: Vec<NaiveDate> = [2021, 2022, 2023, 2024]
        .iter()
        .map(|&y| NaiveDate::from_ymd_opt(y, 12, 31).unwrap())
        .collect();
    let split = temporal_folds(&records, &cutoffs)?;
    for p in &split.pairs {
        println!(
            "  cutoff {}: train {} / test {}",
            p.cutoff,
            p.train.len(),
            p.test.len()
        );
    }
    for w in &split.warnings {
        println!("  warning: {w}");
    }
    Ok(())
}
