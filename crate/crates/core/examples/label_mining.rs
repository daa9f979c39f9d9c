//! Mines weak labels from month-of-year anomalies and combines them with
//! trusted labels into `y_final`.
//!
//! ```text
//! cargo run --example label_mining
//! ```

use rednet::labeling::{mine_labels, MiningConfig};
use rednet::synth::{generate, SyntheticConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let records = generate(&SyntheticConfig::default())?;
    for z_hi in [1.5, 2.0, 2.5] {
        let cfg = MiningConfig {
            z_hi,
            min_quality: 2,
        };
        let mined = mine_labels(&records, &cfg)?;
        let count = |f: fn(&rednet::SampleRecord) -> Option<bool>| {
            mined.iter().filter(|r| f(r) == Some(true)).count()
        };
        let trusted = count(|r| r.y_trusted);
        let weak = count(|r| r.y_weak);
        let fin = count(|r| r.y_final);
        println!(
            "z_hi {z_hi}: trusted {trusted}  weak {weak}  final {fin} of {} ({:.1}%)",
            mined.len(),
            100.0 * fin as f64 / mined.len() as f64
        );
    }
    Ok(())
}
