//! Per-document verdict lines and ground-truth sidecars.

use std::collections::HashMap;
use std::io::{self, BufRead, Write};

use ctlfilter_core::evaluation::GroundTruth;
use ctlfilter_core::{Document, TokenSpan, Verdict};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum RecordError {
    #[error("read failed: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: duplicate doc_id `{doc_id}`")]
    Duplicate { doc_id: String, line: usize },
}

/// Token ranges as `[start, end]` pairs, end exclusive.
pub fn span_pairs(spans: &[TokenSpan]) -> Vec<[usize; 2]> {
    spans.iter().map(|s| [s.start, s.end]).collect()
}

#[derive(Serialize)]
struct VerdictOut<'a> {
    doc_id: &'a str,
    selected: bool,
    spans: Vec<[usize; 2]>,
}

#[derive(Serialize)]
struct TruthOut<'a> {
    doc_id: &'a str,
    injected: bool,
    relevant: bool,
}

/// Either a verdict line or a truth line; `relevant` wins when both are present.
#[derive(Deserialize)]
struct LabelIn {
    doc_id: String,
    selected: Option<bool>,
    relevant: Option<bool>,
}

pub fn write_verdicts<W: Write>(mut out: W, docs: &[Document], verdicts: &[Verdict]) -> io::Result<()> {
    for (d, v) in docs.iter().zip(verdicts) {
        let rec = VerdictOut {
            doc_id: d.id(),
            selected: v.selected,
            spans: span_pairs(&v.matches),
        };
        serde_json::to_writer(&mut out, &rec)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_truth<W: Write>(mut out: W, docs: &[Document], truth: &[GroundTruth]) -> io::Result<()> {
    for (d, t) in docs.iter().zip(truth) {
        let rec = TruthOut {
            doc_id: d.id(),
            injected: t.injected,
            relevant: t.relevant,
        };
        serde_json::to_writer(&mut out, &rec)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Binary labels keyed by document id, in file order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Labels {
    pub order: Vec<String>,
    pub by_id: HashMap<String, bool>,
}

/// Read `doc_id` plus a boolean from each line: `relevant` for truth files,
/// `selected` for verdict files.
pub fn read_labels<R: BufRead>(source: R) -> Result<Labels, RecordError> {
    let mut labels = Labels::default();
    for (i, line) in source.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: LabelIn = serde_json::from_str(&line).map_err(|e| RecordError::Malformed {
            line: line_no,
            message: e.to_string(),
        })?;
        let Some(value) = rec.relevant.or(rec.selected) else {
            return Err(RecordError::Malformed {
                line: line_no,
                message: "expected a `relevant` or `selected` field".into(),
            });
        };
        if labels.by_id.insert(rec.doc_id.clone(), value).is_some() {
            return Err(RecordError::Duplicate {
                doc_id: rec.doc_id,
                line: line_no,
            });
        }
        labels.order.push(rec.doc_id);
    }
    Ok(labels)
}
