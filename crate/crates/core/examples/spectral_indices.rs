//! Builds a small chip stack, writes it in the binary + sidecar format,
//! reads it back and summarizes FAI, NDWI and red/NIR over valid pixels.
//!
//! ```text
//! cargo run --example spectral_indices
//! ```

use rednet::indices::{read_chip_file, write_chip_file, ChipBands, ChipMeta, S2_WAVELENGTHS};

fn chip(bloom: f64) -> rednet::Result<ChipBands> {
    let (w, h) = (8, 8);
    let n = w * h;
    let idx = |i: usize| (i % w) as f64 / w as f64;
    // The file stores f32; keep values exactly representable so the round trip is lossless.
    let f32ish = |v: f64| v as f32 as f64;
    ChipBands::new(
        w,
        h,
        (0..n).map(|i| f32ish(0.06 + 0.01 * idx(i))).collect(),
        (0..n).map(|_| f32ish(0.03)).collect(),
        (0..n).map(|i| f32ish(0.02 + bloom * idx(i))).collect(),
        (0..n).map(|_| f32ish(0.01)).collect(),
        // left column is land
        (0..n).map(|i| i % w != 0).collect(),
    )
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let meta = |day: &str| ChipMeta {
        plant_id: "A".into(),
        timestamp: format!("2024-06-{day}"),
        group_key: format!("S2_202406{day}_T40Q"),
    };
    let chips = vec![(meta("01"), chip(0.0)?), (meta("11"), chip(0.08)?)];
    let path = std::env::temp_dir().join("rednet-chips.bin");
    write_chip_file(&path, &chips, Some(S2_WAVELENGTHS))?;

    let (sidecar, back) = read_chip_file(&path)?;
    assert_eq!(back, chips);
    for (m, c) in &back {
        let s = c.summarize(sidecar.wavelengths())?;
        let mean = |x: &rednet::indices::IndexSummary| x.stats.map_or(f64::NAN, |s| s.mean);
        println!(
            "{} {}: valid {}  FAI {:+.4}  NDWI {:+.4}  red/NIR {:.3}",
            m.plant_id,
            m.timestamp,
            s.fai.n_valid,
            mean(&s.fai),
            mean(&s.ndwi),
            mean(&s.rednir)
        );
    }
    Ok(())
}
