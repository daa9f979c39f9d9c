//! Scores one record by hand through the ops risk index, then calibrates
//! WATCH / ACTION thresholds on a reference pool.
//!
//! ```text
//! cargo run --example ops_risk_index
//! ```

use rednet::ops_risk::{
    alert_state, blend_and_discount, calibrate_thresholds, compute_oci, score_record, NormStats,
    OpsRiskConfig,
};
use rednet::synth::{generate, SyntheticConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = OpsRiskConfig::default();

    // Two of four drivers present: the composite is shrunk toward 0.5.
    let oci = compute_oci([Some(0.9), None, Some(0.7), None], &cfg);
    println!(
        "OCI {:.4}  coverage {:.3}  adjusted {:.4}",
        oci.value.unwrap(),
        oci.coverage,
        oci.adjusted
    );
    let row = blend_and_discount(Some(0.62), Some(0.2), oci.adjusted, 0.55, &cfg);
    println!(
        "blend {:?}  discount {:?}  ops_risk {:?}",
        row.blend, row.discount, row.ops_risk
    );
    let row = blend_and_discount(Some(0.62), None, oci.adjusted, 0.55, &cfg);
    println!(
        "no det_mean: fallback {} -> {:?}",
        row.used_fallback, row.ops_risk
    );

    let mut records = generate(&SyntheticConfig::default())?;
    let cut = chrono::NaiveDate::from_ymd_opt(2024, 12, 31).unwrap();
    // Stand-in hab_prob from the detector mean; the pipeline uses the fitted scorer.
    for r in &mut records {
        r.hab_prob = r.det_mean.map(|d| (0.2 + 0.7 * d).clamp(0.0, 1.0));
    }
    let reference: Vec<_> = records.iter().filter(|r| r.timestamp <= cut).collect();
    let stats = NormStats::fit(reference.iter().copied(), &cfg);
    let (hab, ops): (Vec<f64>, Vec<f64>) = reference
        .iter()
        .filter_map(|r| Some((r.hab_prob?, score_record(r, &stats, &cfg).ops_risk?)))
        .unzip();
    let t = calibrate_thresholds(&hab, &ops, &cfg);
    println!(
        "thresholds: WATCH {:.4} (rate {:.3})  ACTION {:.4} (rate {:.3})",
        t.tau_watch,
        t.r_watch.unwrap(),
        t.tau_action,
        t.r_action.unwrap()
    );
    for p in [t.tau_watch - 0.01, t.tau_watch, t.tau_action] {
        println!("  ops_risk {p:.4} -> {}", alert_state(p, &t).as_str());
    }
    Ok(())
}
