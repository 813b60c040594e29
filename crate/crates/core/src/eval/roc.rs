use std::cmp::Ordering;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_inputs(scores: &[f64], labels: &[u8], op: &'static str) -> Result<(usize, usize)> {
    if scores.len() != labels.len() {
        return Err(Error::shape(op, (scores.len(), 1), (labels.len(), 1)));
    }
    if let Some(s) = scores.iter().find(|s| s.is_nan()) {
        return Err(Error::Domain {
            op,
            detail: format!("score {s} is not comparable"),
        });
    }
    if labels.iter().any(|&l| l > 1) {
        return Err(Error::Domain {
            op,
            detail: "labels must be 0 or 1".into(),
        });
    }
    let positives = labels.iter().filter(|&&l| l == 1).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::Domain {
            op,
            detail: format!(
                "needs both classes, got {positives} anomalies and {negatives} normals"
            ),
        });
    }
    Ok((positives, negatives))
}

/// Indices sorted by ascending score.
fn ascending(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap_or(Ordering::Equal));
    order
}

/// Probability that a random anomaly (label 1) scores above a random normal
/// sample, ties counting one half. Computed from mid-ranks.
pub fn auc_roc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    let (pos, neg) = check_inputs(scores, labels, "auc_roc")?;
    let order = ascending(scores);
    let mut positive_rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j+1 share their mean
        let mid = (i + j) as f64 / 2.0 + 1.0;
        let tied_pos = order[i..=j].iter().filter(|&&k| labels[k] == 1).count();
        positive_rank_sum += mid * tied_pos as f64;
        i = j + 1;
    }
    let (p, n) = (pos as f64, neg as f64);
    Ok((positive_rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    /// Samples scoring at or above this value are called anomalous.
    pub threshold: f64,
    pub tpr: f64,
    pub fpr: f64,
}

/// One point per distinct score, from (0, 0) at an infinite threshold to
/// (1, 1) at the lowest score.
pub fn roc_curve(scores: &[f64], labels: &[u8]) -> Result<Vec<RocPoint>> {
    let (pos, neg) = check_inputs(scores, labels, "roc_curve")?;
    let mut order = ascending(scores);
    order.reverse();
    let mut points = vec![RocPoint {
        threshold: f64::INFINITY,
        tpr: 0.0,
        fpr: 0.0,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let t = scores[order[i]];
        while i < order.len() && scores[order[i]] == t {
            if labels[order[i]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(RocPoint {
            threshold: t,
            tpr: tp as f64 / pos as f64,
            fpr: fp as f64 / neg as f64,
        });
    }
    Ok(points)
}

/// Trapezoidal area under a curve from [`roc_curve`].
pub fn trapezoid_area(points: &[RocPoint]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].fpr - w[0].fpr) * (w[1].tpr + w[0].tpr) / 2.0)
        .sum()
}

pub fn write_roc_csv(points: &[RocPoint], path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::from("threshold,tpr,fpr\n");
    for p in points {
        out.push_str(&format!("{},{},{}\n", p.threshold, p.tpr, p.fpr));
    }
    fs::write(path, out)?;
    Ok(())
}
