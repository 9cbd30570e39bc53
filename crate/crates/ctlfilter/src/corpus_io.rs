//! Line-delimited JSON corpus files.
//!
//! Each line holds one object with string fields `id`, `ts`, `title` and
//! `body`; other fields are ignored. Blank lines are skipped.

use std::collections::HashMap;
use std::io::{self, BufRead, Write};

use chrono::{DateTime, NaiveDate, NaiveDateTime, SecondsFormat, Utc};
use ctlfilter_core::{Document, Timestamp};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("read failed: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: duplicate id `{id}` (first seen on line {first_line})")]
    DuplicateId { id: String, first_line: usize, line: usize },
}

#[derive(Deserialize)]
struct InRecord {
    id: String,
    ts: String,
    title: String,
    body: String,
}

#[derive(Serialize)]
struct OutRecord<'a> {
    id: &'a str,
    ts: String,
    title: &'a str,
    body: &'a str,
}

/// Parse an ISO-8601 timestamp. Accepts RFC 3339 with an offset, a date-time
/// without offset (read as UTC) and a bare date (midnight UTC).
pub fn parse_timestamp(s: &str) -> Result<Timestamp, String> {
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Ok(Timestamp(dt.timestamp_millis()));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(s, fmt) {
            return Ok(Timestamp(dt.and_utc().timestamp_millis()));
        }
    }
    if let Ok(d) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        return Ok(Timestamp(d.and_hms_opt(0, 0, 0).unwrap().and_utc().timestamp_millis()));
    }
    Err(format!("invalid ISO-8601 timestamp `{s}`"))
}

/// RFC 3339 in UTC with millisecond precision, e.g. `2000-01-01T00:00:00.000Z`.
pub fn format_timestamp(ts: Timestamp) -> String {
    match DateTime::<Utc>::from_timestamp_millis(ts.millis()) {
        Some(dt) => dt.to_rfc3339_opts(SecondsFormat::Millis, true),
        None => ts.millis().to_string(),
    }
}

pub fn ingest_stream<R: BufRead>(source: R) -> Result<Vec<Document>, IngestError> {
    let mut docs = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (i, line) in source.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |message: String| IngestError::Malformed {
            line: line_no,
            message,
        };
        let rec: InRecord = serde_json::from_str(&line).map_err(|e| malformed(e.to_string()))?;
        let ts = parse_timestamp(&rec.ts).map_err(malformed)?;
        if let Some(&first_line) = seen.get(&rec.id) {
            return Err(IngestError::DuplicateId {
                id: rec.id,
                first_line,
                line: line_no,
            });
        }
        seen.insert(rec.id.clone(), line_no);
        let doc = Document::new(rec.id, ts, rec.title, rec.body).map_err(|e| malformed(e.to_string()))?;
        docs.push(doc);
    }
    Ok(docs)
}

pub fn write_corpus<W: Write>(mut out: W, docs: &[Document]) -> io::Result<()> {
    for d in docs {
        let rec = OutRecord {
            id: d.id(),
            ts: format_timestamp(d.timestamp()),
            title: d.title(),
            body: d.body(),
        };
        serde_json::to_writer(&mut out, &rec)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
