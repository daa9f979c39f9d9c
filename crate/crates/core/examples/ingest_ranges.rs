//! Loads a raw sample table (zero placeholders included) and prints the
//! per-column ranges that `ingest` writes to `ranges.json`.
//!
//! ```text
//! cargo run --example ingest_ranges
//! ```

use rednet::ingest::{load_table, season_encode, summarize_ranges};
use rednet::synth::{generate, write_raw_csv, SyntheticConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile_dir()?;
    let path = dir.join("raw.csv");
    write_raw_csv(&path, &generate(&SyntheticConfig::default())?)?;

    // Zeros in the driver columns are read back as missing.
    let records = load_table(&path)?;
    println!("{} rows from {}", records.len(), path.display());
    let ranges = summarize_ranges(&records);
    for (col, r) in &ranges.columns {
        println!(
            "  {col:<12} n={:<6} min={:<10.4} max={:<10.4} mean={:.4}",
            r.n_present,
            r.min.unwrap_or(f64::NAN),
            r.max.unwrap_or(f64::NAN),
            r.mean.unwrap_or(f64::NAN)
        );
    }
    for month in [1, 4, 7, 10] {
        let (s, c) = season_encode(month)?;
        println!("  month {month:>2}: sin {s:+.3} cos {c:+.3}");
    }
    Ok(())
}

fn tempfile_dir() -> std::io::Result<std::path::PathBuf> {
    let dir = std::env::temp_dir().join("rednet-ingest-example");
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}
