//! Confusion-matrix metrics and a rank-based ROC AUC.

use serde::{Deserialize, Serialize};

use super::{MlError, Result};

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn zeros(n_classes: usize) -> Self {
        Self { counts: vec![vec![0; n_classes]; n_classes] }
    }

    /// Binary matrix `[[tn, fp], [fn, tp]]`.
    pub fn binary(tn: u64, fp: u64, fn_: u64, tp: u64) -> Self {
        Self { counts: vec![vec![tn, fp], vec![fn_, tp]] }
    }

    pub fn n_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.n_classes()).map(|k| self.counts[k][k]).sum()
    }

    pub fn record(&mut self, truth: usize, predicted: usize) -> Result<()> {
        let n = self.n_classes();
        for label in [truth, predicted] {
            if label >= n {
                return Err(MlError::LabelOutOfRange { label, n_classes: n });
            }
        }
        self.counts[truth][predicted] += 1;
        Ok(())
    }

    /// One-vs-rest `(tp, fp, fn)` for class `k`.
    pub fn one_vs_rest(&self, k: usize) -> (u64, u64, u64) {
        let tp = self.counts[k][k];
        let fp = (0..self.n_classes()).map(|t| self.counts[t][k]).sum::<u64>() - tp;
        let fn_ = self.counts[k].iter().sum::<u64>() - tp;
        (tp, fp, fn_)
    }

    /// Comma-separated rows, header `true\pred,0,1,…`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("true\\pred");
        for k in 0..self.n_classes() {
            out.push_str(&format!(",{k}"));
        }
        out.push('\n');
        for (k, row) in self.counts.iter().enumerate() {
            out.push_str(&k.to_string());
            for c in row {
                out.push_str(&format!(",{c}"));
            }
            out.push('\n');
        }
        out
    }
}

pub fn confusion_matrix(y_true: &[usize], y_pred: &[usize], n_classes: usize) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(MlError::LengthMismatch { left: y_true.len(), right: y_pred.len() });
    }
    let mut cm = ConfusionMatrix::zeros(n_classes);
    for (&t, &p) in y_true.iter().zip(y_pred) {
        cm.record(t, p)?;
    }
    Ok(cm)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
    /// Set when precision or recall had a zero denominator and was reported as 0.
    pub zero_division: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub per_class: Vec<ClassMetrics>,
    pub macro_f1: f64,
    pub weighted_f1: f64,
    pub total: u64,
}

impl MetricsReport {
    pub fn zero_division_classes(&self) -> Vec<usize> {
        self.per_class.iter().enumerate().filter(|(_, c)| c.zero_division).map(|(k, _)| k).collect()
    }
}

fn ratio(num: u64, den: u64) -> (f64, bool) {
    if den == 0 { (0.0, true) } else { (num as f64 / den as f64, false) }
}

pub fn metrics_from_cm(cm: &ConfusionMatrix) -> Result<MetricsReport> {
    let total = cm.total();
    if total == 0 {
        return Err(MlError::EmptyMatrix);
    }
    let per_class: Vec<ClassMetrics> = (0..cm.n_classes())
        .map(|k| {
            let (tp, fp, fn_) = cm.one_vs_rest(k);
            let (precision, zp) = ratio(tp, tp + fp);
            let (recall, zr) = ratio(tp, tp + fn_);
            let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
            ClassMetrics { precision, recall, f1, support: tp + fn_, zero_division: zp || zr }
        })
        .collect();
    let macro_f1 = per_class.iter().map(|c| c.f1).sum::<f64>() / per_class.len() as f64;
    let weighted_f1 = per_class.iter().map(|c| c.support as f64 * c.f1).sum::<f64>() / total as f64;
    Ok(MetricsReport { accuracy: cm.trace() as f64 / total as f64, per_class, macro_f1, weighted_f1, total })
}

/// Normalized Mann–Whitney statistic; tied scores share their average rank.
/// `labels` are 0 (negative) or 1 (positive).
pub fn roc_auc(scores: &[f64], labels: &[usize]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(MlError::LengthMismatch { left: scores.len(), right: labels.len() });
    }
    if let Some(&label) = labels.iter().find(|&&l| l > 1) {
        return Err(MlError::LabelOutOfRange { label, n_classes: 2 });
    }
    let n_pos = labels.iter().filter(|&&l| l == 1).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(MlError::DegenerateLabels);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // Twice the rank sum keeps average ranks integral.
    let mut rank2_pos: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]].total_cmp(&scores[order[i]]).is_eq() {
            j += 1;
        }
        let avg2 = (i + 1 + j + 1) as u128;
        let pos = order[i..=j].iter().filter(|&&k| labels[k] == 1).count() as u128;
        rank2_pos += avg2 * pos;
        i = j + 1;
    }
    let (p, n) = (n_pos as u128, n_neg as u128);
    let u2 = rank2_pos - p * (p + 1);
    Ok(u2 as f64 / (2 * p * n) as f64)
}
