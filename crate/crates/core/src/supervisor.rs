//! Differential comparison of the rule filter and its control filter.
//!
//! A document the rule filter selects but the control filter scores below
//! `s_minus` suggests a term has taken on a new sense (precision loss). A
//! document the rule filter rejects but the control filter scores above
//! `s_plus` suggests the topic is being mentioned in a new form (recall
//! loss). Both thresholds are strict.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::control::Score;
use crate::corpus::{Document, Timestamp, TokenSpan};
use crate::rules::Verdict;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SupervisorError {
    #[error("threshold {0} outside [0, 1]")]
    Threshold(f64),
    #[error("cannot rank alerts of different kinds together")]
    MixedKinds,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupervisorConfig {
    s_minus: f64,
    s_plus: f64,
}

impl Default for SupervisorConfig {
    fn default() -> Self {
        SupervisorConfig {
            s_minus: 0.2,
            s_plus: 0.8,
        }
    }
}

impl SupervisorConfig {
    pub fn new(s_minus: f64, s_plus: f64) -> Result<Self, SupervisorError> {
        for t in [s_minus, s_plus] {
            if !(0.0..=1.0).contains(&t) {
                return Err(SupervisorError::Threshold(t));
            }
        }
        Ok(SupervisorConfig { s_minus, s_plus })
    }

    pub fn s_minus(&self) -> f64 {
        self.s_minus
    }

    pub fn s_plus(&self) -> f64 {
        self.s_plus
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AlertKind {
    PrecisionLoss,
    RecallLoss,
}

impl AlertKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AlertKind::PrecisionLoss => "precision_loss",
            AlertKind::RecallLoss => "recall_loss",
        }
    }
}

impl fmt::Display for AlertKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Alert {
    pub doc_id: String,
    pub timestamp: Timestamp,
    pub kind: AlertKind,
    pub control_score: f64,
    /// The rule filter's decision.
    pub verdict: bool,
    /// Accept-rule matches; empty for recall-loss alerts.
    pub matched_spans: Vec<TokenSpan>,
    /// Set by [`rank_alerts`], 1-based.
    pub rank: Option<usize>,
}

/// One supervised document with both filters' outputs.
#[derive(Debug, Clone, Copy)]
pub struct Item<'a> {
    pub doc: &'a Document,
    pub verdict: &'a Verdict,
    pub score: Score,
}

fn alert(item: &Item<'_>, kind: AlertKind) -> Alert {
    Alert {
        doc_id: String::from(item.doc.id()),
        timestamp: item.doc.timestamp(),
        kind,
        control_score: item.score.value(),
        verdict: item.verdict.selected,
        matched_spans: match kind {
            AlertKind::PrecisionLoss => item.verdict.matches.clone(),
            AlertKind::RecallLoss => Vec::new(),
        },
        rank: None,
    }
}

/// Selected documents scored strictly below `s_minus`, in input order.
pub fn detect_precision_loss(items: &[Item<'_>], cfg: &SupervisorConfig) -> Vec<Alert> {
    items
        .iter()
        .filter(|it| it.verdict.selected && it.score.value() < cfg.s_minus)
        .map(|it| alert(it, AlertKind::PrecisionLoss))
        .collect()
}

/// Rejected documents scored strictly above `s_plus`, in input order.
pub fn detect_recall_loss(items: &[Item<'_>], cfg: &SupervisorConfig) -> Vec<Alert> {
    items
        .iter()
        .filter(|it| !it.verdict.selected && it.score.value() > cfg.s_plus)
        .map(|it| alert(it, AlertKind::RecallLoss))
        .collect()
}

/// Order alerts most significant first and number them from 1.
///
/// Precision-loss alerts go by ascending score, recall-loss alerts by
/// descending score; ties fall back to timestamp, then document id.
pub fn rank_alerts(mut alerts: Vec<Alert>) -> Result<Vec<Alert>, SupervisorError> {
    let Some(kind) = alerts.first().map(|a| a.kind) else {
        return Ok(alerts);
    };
    if alerts.iter().any(|a| a.kind != kind) {
        return Err(SupervisorError::MixedKinds);
    }
    alerts.sort_by(|a, b| {
        let by_score = match kind {
            AlertKind::PrecisionLoss => a.control_score.total_cmp(&b.control_score),
            AlertKind::RecallLoss => b.control_score.total_cmp(&a.control_score),
        };
        by_score
            .then_with(|| a.timestamp.cmp(&b.timestamp))
            .then_with(|| a.doc_id.cmp(&b.doc_id))
    });
    for (i, a) in alerts.iter_mut().enumerate() {
        a.rank = Some(i + 1);
    }
    Ok(alerts)
}
