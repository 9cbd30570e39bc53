//! Filtering metrics and detection quality against simulated drift.

mod drift;

use alloc::vec::Vec;

pub use drift::{generate_drift_stream, DriftKind, DriftSpec, DriftStream, GroundTruth};

use crate::control::Score;
use crate::supervisor::SupervisorConfig;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvaluationError {
    #[error("length mismatch: {predicted} predictions, {truth} truth values")]
    LengthMismatch { predicted: usize, truth: usize },
    #[error("detection scoring needs both injected and normal candidates")]
    SingleClass,
    #[error("drift kind `none` has no detection direction")]
    NoDriftKind,
    #[error("invalid drift spec: {0}")]
    InvalidSpec(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub r#fn: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.r#fn
    }
}

pub fn confusion_counts(predicted: &[bool], truth: &[bool]) -> Result<ConfusionCounts, EvaluationError> {
    if predicted.len() != truth.len() {
        return Err(EvaluationError::LengthMismatch {
            predicted: predicted.len(),
            truth: truth.len(),
        });
    }
    let mut c = ConfusionCounts::default();
    for (&p, &t) in predicted.iter().zip(truth) {
        match (p, t) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.r#fn += 1,
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvaluationReport {
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
}

/// Harmonic mean `2pr / (p + r)`, 0 when `p + r = 0`.
pub fn f_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn f_measure(c: &ConfusionCounts) -> EvaluationReport {
    let precision = ratio(c.tp, c.tp + c.fp);
    let recall = ratio(c.tp, c.tp + c.r#fn);
    EvaluationReport {
        precision,
        recall,
        f_measure: f_score(precision, recall),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionQuality {
    pub auc: f64,
    pub detection_rate: f64,
    pub false_alert_rate: f64,
}

/// Probability that a random positive outranks a random negative, ties
/// counting one half. Higher values rank first.
pub fn auc(positives: &[f64], negatives: &[f64]) -> f64 {
    let mut all: Vec<(f64, bool)> = positives
        .iter()
        .map(|&v| (v, true))
        .chain(negatives.iter().map(|&v| (v, false)))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Mann-Whitney with mid-ranks for tied groups.
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < all.len() {
        let mut j = i;
        while j < all.len() && all[j].0.total_cmp(&all[i].0).is_eq() {
            j += 1;
        }
        let mid = (i + j + 1) as f64 / 2.0;
        rank_sum += mid * all[i..j].iter().filter(|x| x.1).count() as f64;
        i = j;
    }
    let p = positives.len() as f64;
    let n = negatives.len() as f64;
    (rank_sum - p * (p + 1.0) / 2.0) / (p * n)
}

/// Ranking quality of control scores on candidates whose ground truth is
/// known, at the default supervisor thresholds.
///
/// For polysemy the candidates are documents the rule filter selected and a
/// low score is alert-worthy; for polymorphism they are rejected documents
/// and a high score is alert-worthy.
pub fn score_detection(candidates: &[(Score, bool)], kind: DriftKind) -> Result<DetectionQuality, EvaluationError> {
    score_detection_with(candidates, kind, &SupervisorConfig::default())
}

pub fn score_detection_with(
    candidates: &[(Score, bool)],
    kind: DriftKind,
    cfg: &SupervisorConfig,
) -> Result<DetectionQuality, EvaluationError> {
    // Low scores are alert-worthy for polysemy, high ones for polymorphism;
    // negating puts both on a "higher means more alert-worthy" scale.
    let sign = match kind {
        DriftKind::None => return Err(EvaluationError::NoDriftKind),
        DriftKind::Polysemy => -1.0,
        DriftKind::Polymorphism => 1.0,
    };
    let worthiness = |s: f64| sign * s;
    let alerts = |s: f64| match kind {
        DriftKind::Polysemy => s < cfg.s_minus(),
        _ => s > cfg.s_plus(),
    };
    let injected: Vec<f64> = candidates.iter().filter(|c| c.1).map(|c| c.0.value()).collect();
    let normal: Vec<f64> = candidates.iter().filter(|c| !c.1).map(|c| c.0.value()).collect();
    if injected.is_empty() || normal.is_empty() {
        return Err(EvaluationError::SingleClass);
    }
    let rate = |xs: &[f64]| xs.iter().filter(|&&s| alerts(s)).count() as f64 / xs.len() as f64;
    Ok(DetectionQuality {
        auc: auc(
            &injected.iter().map(|&s| worthiness(s)).collect::<Vec<_>>(),
            &normal.iter().map(|&s| worthiness(s)).collect::<Vec<_>>(),
        ),
        detection_rate: rate(&injected),
        false_alert_rate: rate(&normal),
    })
}
