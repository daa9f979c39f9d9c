//! Ranking, thresholded and calibration metrics.
//!
//! AUROC uses tie-grouped trapezoids, which equals the Mann–Whitney
//! probability that a random positive outranks a random negative with ties
//! counted one half. AUPRC is step-wise average precision: the sum over
//! descending score groups of `Δrecall · precision`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    /// `None` for the (0, 0) origin, which lies above every score.
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    pub recall: f64,
    pub precision: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// `TP / (TP + FP)`, 0 when nothing is predicted positive.
    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    /// `TP / (TP + FN)`, 0 when there are no positives.
    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn prevalence(&self) -> f64 {
        ratio(self.tp + self.fn_, self.total())
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Confusion {
    pub threshold: f64,
    #[serde(flatten)]
    pub counts: ConfusionCounts,
    pub precision: f64,
    pub recall: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityBin {
    pub bin_lo: f64,
    pub bin_hi: f64,
    pub mean_pred: Option<f64>,
    pub frac_pos: Option<f64>,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n: usize,
    pub prevalence: f64,
    pub auroc: f64,
    pub auprc: f64,
    pub min_recall: f64,
    pub confusion: Confusion,
    pub roc_points: Vec<RocPoint>,
    pub pr_points: Vec<PrPoint>,
    pub reliability_bins: Vec<ReliabilityBin>,
}

/// Groups of equal scores in descending score order: `(score, positives, negatives)`.
fn tie_groups(scores: &[f64], labels: &[bool]) -> Result<Vec<(f64, usize, usize)>> {
    if scores.len() != labels.len() {
        return Err(Error::InvalidInput(
            "scores and labels differ in length".into(),
        ));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::InvalidInput("scores must be finite".into()));
    }
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut groups: Vec<(f64, usize, usize)> = Vec::new();
    for i in idx {
        let (p, n) = if labels[i] { (1, 0) } else { (0, 1) };
        match groups.last_mut() {
            Some(g) if g.0 == scores[i] => {
                g.1 += p;
                g.2 += n;
            }
            _ => groups.push((scores[i], p, n)),
        }
    }
    Ok(groups)
}

fn class_counts(labels: &[bool]) -> (usize, usize) {
    let p = labels.iter().filter(|&&y| y).count();
    (p, labels.len() - p)
}

pub fn auroc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    let groups = tie_groups(scores, labels)?;
    let (p, n) = class_counts(labels);
    if p == 0 || n == 0 {
        return Err(Error::InvalidInput("AUROC needs both classes".into()));
    }
    // Twice the trapezoid area, in integer units of 1 / (P·N).
    let mut area2: u128 = 0;
    let mut tp_before: u128 = 0;
    for &(_, gp, gn) in &groups {
        area2 += gn as u128 * (2 * tp_before + gp as u128);
        tp_before += gp as u128;
    }
    Ok(area2 as f64 / (2 * p as u128 * n as u128) as f64)
}

pub fn roc_curve(scores: &[f64], labels: &[bool]) -> Result<Vec<RocPoint>> {
    let groups = tie_groups(scores, labels)?;
    let (p, n) = class_counts(labels);
    let mut pts = vec![RocPoint {
        fpr: 0.0,
        tpr: 0.0,
        threshold: None,
    }];
    let (mut tp, mut fp) = (0, 0);
    for (s, gp, gn) in groups {
        tp += gp;
        fp += gn;
        pts.push(RocPoint {
            fpr: ratio(fp, n),
            tpr: ratio(tp, p),
            threshold: Some(s),
        });
    }
    Ok(pts)
}

pub fn pr_curve(scores: &[f64], labels: &[bool]) -> Result<Vec<PrPoint>> {
    let groups = tie_groups(scores, labels)?;
    let (p, _) = class_counts(labels);
    let (mut tp, mut fp) = (0, 0);
    Ok(groups
        .into_iter()
        .map(|(s, gp, gn)| {
            tp += gp;
            fp += gn;
            PrPoint {
                recall: ratio(tp, p),
                precision: ratio(tp, tp + fp),
                threshold: s,
            }
        })
        .collect())
}

/// Average precision over descending tie groups.
pub fn auprc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    let groups = tie_groups(scores, labels)?;
    let (p, _) = class_counts(labels);
    if p == 0 {
        return Err(Error::InvalidInput(
            "AUPRC needs at least one positive".into(),
        ));
    }
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut sum = 0.0;
    for (_, gp, gn) in groups {
        tp += gp;
        fp += gn;
        if gp > 0 {
            sum += gp as f64 * (tp as f64 / (tp + fp) as f64);
        }
    }
    Ok(sum / p as f64)
}

/// Confusion counts with `score >= threshold` predicted positive.
pub fn confusion_at(scores: &[f64], labels: &[bool], threshold: f64) -> Result<Confusion> {
    if scores.len() != labels.len() {
        return Err(Error::InvalidInput(
            "scores and labels differ in length".into(),
        ));
    }
    let mut c = ConfusionCounts {
        tp: 0,
        fp: 0,
        tn: 0,
        fn_: 0,
    };
    for (&s, &y) in scores.iter().zip(labels) {
        match (s >= threshold, y) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    Ok(Confusion {
        threshold,
        precision: c.precision(),
        recall: c.recall(),
        counts: c,
    })
}

/// Highest-precision threshold among the unique scores whose recall meets
/// `min_recall`; precision ties go to the higher threshold.
pub fn select_threshold_min_recall(
    scores: &[f64],
    labels: &[bool],
    min_recall: f64,
) -> Result<Confusion> {
    let groups = tie_groups(scores, labels)?;
    let (p, n) = class_counts(labels);
    if p == 0 {
        return Err(Error::InvalidInput(
            "threshold selection needs positives".into(),
        ));
    }
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut best: Option<(f64, f64)> = None;
    for (s, gp, gn) in groups {
        tp += gp;
        fp += gn;
        let recall = tp as f64 / p as f64;
        if recall + 1e-12 < min_recall {
            continue;
        }
        let precision = tp as f64 / (tp + fp) as f64;
        // descending thresholds: only a strictly better precision displaces
        if best.is_none_or(|(_, bp)| precision > bp) {
            best = Some((s, precision));
        }
    }
    let (threshold, _) = best.ok_or_else(|| {
        Error::InvalidInput(format!(
            "no threshold reaches recall {min_recall} ({p} positives, {n} negatives)"
        ))
    })?;
    confusion_at(scores, labels, threshold)
}

/// Equal-width reliability bins on [0, 1]. A score of exactly 1 falls in the last bin.
pub fn reliability_curve(
    scores: &[f64],
    labels: &[bool],
    n_bins: usize,
) -> Result<Vec<ReliabilityBin>> {
    if n_bins < 2 {
        return Err(Error::InvalidInput(
            "reliability curve needs at least 2 bins".into(),
        ));
    }
    if scores.len() != labels.len() {
        return Err(Error::InvalidInput(
            "scores and labels differ in length".into(),
        ));
    }
    let mut sum = vec![0.0; n_bins];
    let mut pos = vec![0usize; n_bins];
    let mut cnt = vec![0usize; n_bins];
    for (&s, &y) in scores.iter().zip(labels) {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::InvalidInput(format!("score {s} outside [0, 1]")));
        }
        let b = ((s * n_bins as f64).floor() as usize).min(n_bins - 1);
        sum[b] += s;
        cnt[b] += 1;
        pos[b] += y as usize;
    }
    Ok((0..n_bins)
        .map(|b| ReliabilityBin {
            bin_lo: b as f64 / n_bins as f64,
            bin_hi: (b + 1) as f64 / n_bins as f64,
            mean_pred: (cnt[b] > 0).then(|| sum[b] / cnt[b] as f64),
            frac_pos: (cnt[b] > 0).then(|| pos[b] as f64 / cnt[b] as f64),
            n: cnt[b],
        })
        .collect())
}

/// Full report with the operating point chosen under a minimum recall.
pub fn evaluate(
    scores: &[f64],
    labels: &[bool],
    min_recall: f64,
    n_bins: usize,
) -> Result<EvalReport> {
    let confusion = select_threshold_min_recall(scores, labels, min_recall)?;
    Ok(EvalReport {
        n: scores.len(),
        prevalence: confusion.counts.prevalence(),
        auroc: auroc(scores, labels)?,
        auprc: auprc(scores, labels)?,
        min_recall,
        confusion,
        roc_points: roc_curve(scores, labels)?,
        pr_points: pr_curve(scores, labels)?,
        reliability_bins: reliability_curve(scores, labels, n_bins)?,
    })
}

/// Minimal SVG line chart for curve exports.
pub fn svg_line_chart(
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[(f64, f64)],
    diagonal: bool,
) -> String {
    const W: f64 = 420.0;
    const H: f64 = 420.0;
    const M: f64 = 50.0;
    let px = |x: f64| M + x.clamp(0.0, 1.0) * (W - 2.0 * M);
    let py = |y: f64| H - M - y.clamp(0.0, 1.0) * (H - 2.0 * M);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{M}" y="{M}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * M,
        H - 2.0 * M
    );
    if diagonal {
        let _ = writeln!(
            s,
            r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#999" stroke-dasharray="4 4"/>"##,
            px(0.0),
            py(0.0),
            px(1.0),
            py(1.0)
        );
    }
    let pts: Vec<String> = series
        .iter()
        .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
        .collect();
    let _ = writeln!(
        s,
        r##"<polyline fill="none" stroke="#1f77b4" stroke-width="2" points="{}"/>"##,
        pts.join(" ")
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="30" text-anchor="middle" font-size="16">{title}</text>"#,
        W / 2.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="13">{x_label}</text>"#,
        W / 2.0,
        H - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="15" y="{}" text-anchor="middle" font-size="13" transform="rotate(-90 15 {})">{y_label}</text>"#,
        H / 2.0,
        H / 2.0
    );
    s.push_str("</svg>\n");
    s
}

impl EvalReport {
    /// `(file name, svg)` for the ROC, PR and reliability charts.
    pub fn svg_figures(&self) -> Vec<(&'static str, String)> {
        let roc: Vec<(f64, f64)> = self.roc_points.iter().map(|p| (p.fpr, p.tpr)).collect();
        let pr: Vec<(f64, f64)> = self
            .pr_points
            .iter()
            .map(|p| (p.recall, p.precision))
            .collect();
        let rel: Vec<(f64, f64)> = self
            .reliability_bins
            .iter()
            .filter_map(|b| Some((b.mean_pred?, b.frac_pos?)))
            .collect();
        vec![
            (
                "roc_curve.svg",
                svg_line_chart(
                    "ROC",
                    "false positive rate",
                    "true positive rate",
                    &roc,
                    true,
                ),
            ),
            (
                "pr_curve.svg",
                svg_line_chart("Precision-Recall", "recall", "precision", &pr, false),
            ),
            (
                "calibration_curve.svg",
                svg_line_chart(
                    "Reliability",
                    "mean predicted",
                    "fraction positive",
                    &rel,
                    true,
                ),
            ),
        ]
    }
}
