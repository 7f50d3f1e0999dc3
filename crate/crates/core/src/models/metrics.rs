//! Threshold metrics and rank-based ROC-AUC.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// 0 when only one class is present (see `roc_auc_defined`).
    pub roc_auc: f64,
    pub roc_auc_defined: bool,
    pub n_examples: usize,
}

impl EvalReport {
    /// `name=value` lines, fixed order.
    pub fn machine_lines(&self) -> Vec<String> {
        vec![
            format!("accuracy={}", self.accuracy),
            format!("precision={}", self.precision),
            format!("recall={}", self.recall),
            format!("f1={}", self.f1),
            format!("roc_auc={}", self.roc_auc),
            format!("roc_auc_defined={}", self.roc_auc_defined),
            format!("n_examples={}", self.n_examples),
        ]
    }
}

fn div0(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        0.0
    } else {
        a / b
    }
}

/// Mann-Whitney AUC with average ranks for tied scores. `None` unless both
/// classes occur.
pub fn roc_auc(scores: &[f64], y: &[u8]) -> Option<f64> {
    let n_pos = y.iter().filter(|&&v| v == 1).count();
    let n_neg = y.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j+1 share their mean
        let avg = (i + j + 2) as f64 / 2.0;
        let pos_in_group = order[i..=j].iter().filter(|&&k| y[k] == 1).count();
        rank_sum_pos += avg * pos_in_group as f64;
        i = j + 1;
    }
    let (p, n) = (n_pos as f64, n_neg as f64);
    Some((rank_sum_pos - p * (p + 1.0) / 2.0) / (p * n))
}

/// Scores at or above `threshold` count as positive predictions.
pub fn evaluate_scores(scores: &[f64], y: &[u8], threshold: f64) -> Result<EvalReport> {
    if scores.is_empty() {
        return Err(Error::Size("cannot evaluate on zero examples".into()));
    }
    if scores.len() != y.len() {
        return Err(Error::Shape(format!("{} scores but {} labels", scores.len(), y.len())));
    }
    let (mut tp, mut fp, mut tn, mut fn_) = (0usize, 0usize, 0usize, 0usize);
    for (&s, &l) in scores.iter().zip(y) {
        match (s >= threshold, l == 1) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
    }
    let precision = div0(tp as f64, (tp + fp) as f64);
    let recall = div0(tp as f64, (tp + fn_) as f64);
    let auc = roc_auc(scores, y);
    Ok(EvalReport {
        accuracy: (tp + tn) as f64 / y.len() as f64,
        precision,
        recall,
        f1: div0(2.0 * precision * recall, precision + recall),
        roc_auc: auc.unwrap_or(0.0),
        roc_auc_defined: auc.is_some(),
        n_examples: y.len(),
    })
}
