//! ROC curve and AUC in the Mann–Whitney formulation (ties count ½).

use serde::Serialize;

use super::{Result, StatsError};

fn check(labels: &[bool], scores: &[f64]) -> Result<(u64, u64)> {
    if labels.len() != scores.len() {
        return Err(StatsError::LengthMismatch(labels.len(), scores.len()));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(StatsError::Invalid("NaN score".into()));
    }
    let pos = labels.iter().filter(|l| **l).count() as u64;
    let neg = labels.len() as u64 - pos;
    if pos == 0 || neg == 0 {
        return Err(StatsError::SingleClass);
    }
    Ok((pos, neg))
}

/// Probability that a random positive outscores a random negative.
///
/// Computed from midranks; twice the U statistic is an integer, so the
/// result is the same float as exhaustive pair counting.
pub fn roc_auc(labels: &[bool], scores: &[f64]) -> Result<f64> {
    let (pos, neg) = check(labels, scores)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // Doubled 1-based midranks stay integral: a tie group over ranks
    // i+1..=j gets (i + 1 + j).
    let mut rank2_pos: u64 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        let mid2 = (i + 1 + j) as u64;
        let group_pos = order[i..j].iter().filter(|&&k| labels[k]).count() as u64;
        rank2_pos += mid2 * group_pos;
        i = j;
    }
    let u2 = rank2_pos - pos * (pos + 1);
    Ok(u2 as f64 / (2 * pos * neg) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

/// ROC points for thresholds at every distinct score (predict positive when
/// `score >= threshold`), from (0, 0) at +inf to (1, 1).
pub fn roc_curve(labels: &[bool], scores: &[f64]) -> Result<Vec<RocPoint>> {
    let (pos, neg) = check(labels, scores)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut points = vec![RocPoint {
        threshold: f64::INFINITY,
        fpr: 0.0,
        tpr: 0.0,
    }];
    let (mut tp, mut fp) = (0u64, 0u64);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(RocPoint {
            threshold: s,
            fpr: fp as f64 / neg as f64,
            tpr: tp as f64 / pos as f64,
        });
    }
    Ok(points)
}
