//! Alert reports for the administrator.
//!
//! A header line followed by one JSON line per alert, most significant first.

use std::collections::HashMap;
use std::io::{self, Write};

use chrono::{DateTime, SecondsFormat, Utc};
use ctlfilter_core::{Alert, AlertKind, Document, SupervisorConfig};
use serde::Serialize;
use serde_json::value::RawValue;

use crate::corpus_io::format_timestamp;
use crate::records::span_pairs;

pub const REPORT_VERSION: u64 = 1;

/// Which detectors a report covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportKind {
    Precision,
    Recall,
    Both,
}

impl ReportKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ReportKind::Precision => "precision",
            ReportKind::Recall => "recall",
            ReportKind::Both => "both",
        }
    }
}

/// Four decimals, ties to even. The formatter works on the exact binary
/// value, so only dyadic ties such as 0.03125 are ever rounded as ties.
pub fn format_score(score: f64) -> String {
    format!("{score:.4}")
}

#[derive(Serialize)]
#[serde(untagged)]
enum Threshold {
    Single(f64),
    Pair { s_minus: f64, s_plus: f64 },
}

#[derive(Serialize)]
struct Header<'a> {
    report_version: u64,
    topic: &'a str,
    kind: &'a str,
    threshold: Threshold,
    generated_at: String,
}

#[derive(Serialize)]
struct Record<'a> {
    rank: usize,
    kind: &'a str,
    doc_id: &'a str,
    ts: String,
    score: Box<RawValue>,
    title: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    spans: Option<Vec<[usize; 2]>>,
}

/// Write a report. `alerts` must already be ranked; `docs` supplies titles.
pub fn render_report<W: Write>(
    mut out: W,
    topic: &str,
    kind: ReportKind,
    cfg: &SupervisorConfig,
    alerts: &[Alert],
    docs: &[Document],
    generated_at: DateTime<Utc>,
) -> io::Result<()> {
    let threshold = match kind {
        ReportKind::Precision => Threshold::Single(cfg.s_minus()),
        ReportKind::Recall => Threshold::Single(cfg.s_plus()),
        ReportKind::Both => Threshold::Pair {
            s_minus: cfg.s_minus(),
            s_plus: cfg.s_plus(),
        },
    };
    let header = Header {
        report_version: REPORT_VERSION,
        topic,
        kind: kind.as_str(),
        threshold,
        generated_at: generated_at.to_rfc3339_opts(SecondsFormat::Secs, true),
    };
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n")?;

    let titles: HashMap<&str, &str> = docs.iter().map(|d| (d.id(), d.title())).collect();
    for (i, a) in alerts.iter().enumerate() {
        let rec = Record {
            rank: a.rank.unwrap_or(i + 1),
            kind: a.kind.as_str(),
            doc_id: &a.doc_id,
            ts: format_timestamp(a.timestamp),
            score: RawValue::from_string(format_score(a.control_score)).map_err(io::Error::other)?,
            title: titles.get(a.doc_id.as_str()).copied().unwrap_or(""),
            spans: (a.kind == AlertKind::PrecisionLoss).then(|| span_pairs(&a.matched_spans)),
        };
        serde_json::to_writer(&mut out, &rec)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
