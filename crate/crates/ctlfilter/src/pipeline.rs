//! The administrator workflows on in-memory data.

use ctlfilter_core::control::{build_control_model, BuildParams, ControlError};
use ctlfilter_core::rules::evaluate;
use ctlfilter_core::supervisor::{detect_precision_loss, detect_recall_loss, rank_alerts, Item};
use ctlfilter_core::{Alert, ControlModel, Document, RuleSet, SupervisorConfig, Verdict};

use crate::report::ReportKind;

/// Run the rule filter over a corpus.
pub fn filter_corpus(rules: &RuleSet, docs: &[Document]) -> Vec<Verdict> {
    docs.iter().map(|d| evaluate(rules, d)).collect()
}

/// Train a control filter on the rule filter's verdicts over `docs`. The
/// rule's own literal terms are never used as features, so the control
/// filter has to learn the topic from its context.
pub fn build_model(
    topic_name: &str,
    rules: &RuleSet,
    docs: &[Document],
    params: &BuildParams,
) -> Result<ControlModel, ControlError> {
    let selected: Vec<bool> = filter_corpus(rules, docs).iter().map(|v| v.selected).collect();
    build_control_model(topic_name, docs, &selected, &rules.rule_terms, params)
}

/// Compare both filters on `docs` and return ranked alerts. With
/// [`ReportKind::Both`] precision-loss alerts come first, each kind ranked
/// on its own.
pub fn supervise(
    rules: &RuleSet,
    model: &ControlModel,
    docs: &[Document],
    cfg: &SupervisorConfig,
    kind: ReportKind,
) -> Vec<Alert> {
    let verdicts = filter_corpus(rules, docs);
    let items: Vec<Item<'_>> = docs
        .iter()
        .zip(&verdicts)
        .map(|(doc, verdict)| Item {
            doc,
            verdict,
            score: model.score(doc),
        })
        .collect();
    let ranked = |alerts| rank_alerts(alerts).expect("detectors emit a single kind");
    let mut out = Vec::new();
    if kind != ReportKind::Recall {
        out.extend(ranked(detect_precision_loss(&items, cfg)));
    }
    if kind != ReportKind::Precision {
        out.extend(ranked(detect_recall_loss(&items, cfg)));
    }
    out
}
