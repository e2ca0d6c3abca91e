//! Evaluation: confusion matrices, per-class precision/recall/F1,
//! macro-averaged F1, accuracy, and fine-tuning time-efficiency ratios.
//!
//! Macro-F1 is the unweighted mean of the three class F1 scores, with
//! `F1_i = 2 P_i R_i / (P_i + R_i)` and the convention that a zero
//! denominator yields zero. Time efficiency is runtime divided by epochs.

pub mod ablation;

pub use ablation::{
    run_ablation, run_ablation_with, AblationCellConfig, AblationCellReport, AblationReport,
    CellBackend,
};

use serde::{Deserialize, Serialize};

use crate::corpus::{VeracityLabel, ALL_LABELS, NUM_CLASSES};
use crate::error::{Error, Result};

/// 3x3 counts; rows are gold labels, columns predictions, both in
/// (True, False, Conflicting) order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; NUM_CLASSES]; NUM_CLASSES],
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    fn gold_count(&self, class: usize) -> u64 {
        self.counts[class].iter().sum()
    }

    fn predicted_count(&self, class: usize) -> u64 {
        self.counts.iter().map(|row| row[class]).sum()
    }
}

/// Tally gold/predicted label pairs. The sequences must be the same
/// non-zero length.
pub fn confusion(golds: &[VeracityLabel], preds: &[VeracityLabel]) -> Result<ConfusionMatrix> {
    if golds.len() != preds.len() {
        return Err(Error::data(format!(
            "gold and prediction counts differ: {} vs {}",
            golds.len(),
            preds.len()
        )));
    }
    if golds.is_empty() {
        return Err(Error::data("cannot evaluate zero predictions"));
    }
    let mut counts = [[0u64; NUM_CLASSES]; NUM_CLASSES];
    for (gold, pred) in golds.iter().zip(preds) {
        counts[gold.index()][pred.index()] += 1;
    }
    Ok(ConfusionMatrix { counts })
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Precision of one class: tp / predicted.
pub fn class_precision(cm: &ConfusionMatrix, class: VeracityLabel) -> f64 {
    let c = class.index();
    ratio(cm.counts[c][c], cm.predicted_count(c))
}

/// Recall of one class: tp / gold.
pub fn class_recall(cm: &ConfusionMatrix, class: VeracityLabel) -> f64 {
    let c = class.index();
    ratio(cm.counts[c][c], cm.gold_count(c))
}

/// Class F1: harmonic mean of precision and recall; zero when P + R = 0.
pub fn class_f1(cm: &ConfusionMatrix, class: VeracityLabel) -> f64 {
    let p = class_precision(cm, class);
    let r = class_recall(cm, class);
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Unweighted mean of the three class F1 scores.
pub fn macro_f1(cm: &ConfusionMatrix) -> Result<f64> {
    if cm.total() == 0 {
        return Err(Error::data("empty confusion matrix"));
    }
    Ok(ALL_LABELS.iter().map(|&c| class_f1(cm, c)).sum::<f64>() / NUM_CLASSES as f64)
}

/// Fraction of correct predictions: trace / total.
pub fn accuracy(cm: &ConfusionMatrix) -> Result<f64> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::data("empty confusion matrix"));
    }
    let trace: u64 = (0..NUM_CLASSES).map(|c| cm.counts[c][c]).sum();
    Ok(trace as f64 / total as f64)
}

/// Per-class and aggregate metrics for one evaluation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// (True, False, Conflicting) order.
    pub precision: [f64; NUM_CLASSES],
    pub recall: [f64; NUM_CLASSES],
    pub f1: [f64; NUM_CLASSES],
    pub macro_f1: f64,
    pub accuracy: f64,
    pub evaluated: u64,
}

impl MetricsReport {
    pub fn from_confusion(cm: &ConfusionMatrix) -> Result<Self> {
        let mut precision = [0.0; NUM_CLASSES];
        let mut recall = [0.0; NUM_CLASSES];
        let mut f1 = [0.0; NUM_CLASSES];
        for &label in &ALL_LABELS {
            precision[label.index()] = class_precision(cm, label);
            recall[label.index()] = class_recall(cm, label);
            f1[label.index()] = class_f1(cm, label);
        }
        Ok(MetricsReport {
            precision,
            recall,
            f1,
            macro_f1: macro_f1(cm)?,
            accuracy: accuracy(cm)?,
            evaluated: cm.total(),
        })
    }

    pub fn from_labels(golds: &[VeracityLabel], preds: &[VeracityLabel]) -> Result<Self> {
        Self::from_confusion(&confusion(golds, preds)?)
    }
}

/// Fine-tuning cost ratio: runtime divided by epochs.
pub fn time_efficiency(runtime_minutes: f64, epochs: u32) -> Result<f64> {
    if epochs == 0 {
        return Err(Error::data("epochs must be >= 1"));
    }
    if runtime_minutes.is_nan() || runtime_minutes < 0.0 {
        return Err(Error::data(format!(
            "runtime must be non-negative, got {runtime_minutes}"
        )));
    }
    Ok(runtime_minutes / epochs as f64)
}
