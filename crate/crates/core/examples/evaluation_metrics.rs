//! Ranking, operating-point and calibration metrics on a toy score set,
//! plus the SVG figures the pipeline writes.
//!
//! ```text
//! cargo run --example evaluation_metrics -- [svg_dir]
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rednet::metrics::evaluate;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (scores, labels): (Vec<f64>, Vec<bool>) = (0..2000)
        .map(|_| {
            let p: f64 = rng.gen();
            (p, rng.gen::<f64>() < p)
        })
        .unzip();

    let report = evaluate(&scores, &labels, 0.60, 10)?;
    println!(
        "n {}  prevalence {:.3}  AUROC {:.3}  AUPRC {:.3}",
        report.n, report.prevalence, report.auroc, report.auprc
    );
    let c = &report.confusion;
    println!(
        "tau {:.3}: tp {} fp {} tn {} fn {}  precision {:.3} recall {:.3}",
        c.threshold, c.counts.tp, c.counts.fp, c.counts.tn, c.counts.fn_, c.precision, c.recall
    );
    for b in &report.reliability_bins {
        if let (Some(m), Some(f)) = (b.mean_pred, b.frac_pos) {
            println!(
                "  [{:.1}, {:.1}) n={:<4} mean {m:.3} observed {f:.3}",
                b.bin_lo, b.bin_hi, b.n
            );
        }
    }

    if let Some(dir) = std::env::args().nth(1) {
        std::fs::create_dir_all(&dir)?;
        for (name, svg) in report.svg_figures() {
            std::fs::write(std::path::Path::new(&dir).join(name), svg)?;
            println!("wrote {dir}/{name}");
        }
    }
    Ok(())
}
