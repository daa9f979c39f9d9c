//! Small descriptive-statistics helpers shared across modules.
//!
//! Two quantile conventions are used in this crate and they are kept apart on
//! purpose: [`quantile_linear`] (interpolating between order statistics) for
//! descriptive summaries, and [`quantile_higher`] (the higher of the two
//! bracketing order statistics) wherever a quantile drives an alerting
//! decision.

/// Sorts a copy of `values`, dropping non-finite entries.
pub fn sorted_finite(values: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Linear-interpolation quantile over an ascending slice.
pub fn quantile_linear(sorted: &[f64], p: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let pos = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    Some(sorted[lo] + (sorted[hi] - sorted[lo]) * frac)
}

/// Higher-order-statistic quantile: `sorted[ceil(p * (n - 1))]`.
pub fn quantile_higher(sorted: &[f64], p: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let pos = (p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64).ceil() as usize;
    Some(sorted[pos.min(sorted.len() - 1)])
}

pub fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// Sample (n - 1) standard deviation; a single value has sd 0.
pub fn sample_sd(values: &[f64]) -> Option<f64> {
    let m = mean(values)?;
    if values.len() < 2 || values.iter().all(|&x| x == values[0]) {
        return Some(0.0);
    }
    let ss: f64 = values.iter().map(|x| (x - m) * (x - m)).sum();
    Some((ss / (values.len() - 1) as f64).sqrt())
}

pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}
