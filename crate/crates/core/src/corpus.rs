//! Documents, tokenization and sentence segmentation.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;

/// Milliseconds since the Unix epoch, UTC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Timestamp(pub i64);

impl Timestamp {
    pub const fn from_millis(ms: i64) -> Self {
        Timestamp(ms)
    }

    pub const fn millis(self) -> i64 {
        self.0
    }
}

/// Half-open range of token indices inside one document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub const fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub const fn len(&self) -> usize {
        self.end - self.start
    }

    pub const fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub const fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    /// Smallest span covering both.
    pub fn union(&self, other: &Span) -> Span {
        Span::new(self.start.min(other.start), self.end.max(other.end))
    }

    /// Number of tokens strictly between the two spans, 0 when they touch or overlap.
    pub fn gap(&self, other: &Span) -> usize {
        // at most one of the two differences is positive
        other.start.saturating_sub(self.end).max(self.start.saturating_sub(other.end))
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{})", self.start, self.end)
    }
}

/// A span anchored to a document, used for highlighting matches.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TokenSpan {
    pub doc_id: String,
    pub start: usize,
    pub end: usize,
}

impl TokenSpan {
    pub fn new(doc_id: impl Into<String>, span: Span) -> Self {
        TokenSpan {
            doc_id: doc_id.into(),
            start: span.start,
            end: span.end,
        }
    }

    pub fn span(&self) -> Span {
        Span::new(self.start, self.end)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CorpusError {
    #[error("document id must be non-empty")]
    EmptyId,
}

/// One timestamped news item. Tokens and sentences are derived from the
/// title and body at construction and never change afterwards.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    id: String,
    timestamp: Timestamp,
    title: String,
    body: String,
    tokens: Vec<String>,
    sentences: Vec<Span>,
}

impl Document {
    pub fn new(
        id: impl Into<String>,
        timestamp: Timestamp,
        title: impl Into<String>,
        body: impl Into<String>,
    ) -> Result<Self, CorpusError> {
        let id = id.into();
        if id.is_empty() {
            return Err(CorpusError::EmptyId);
        }
        let title = title.into();
        let body = body.into();
        let mut text = String::with_capacity(title.len() + body.len() + 1);
        text.push_str(&title);
        text.push(' ');
        text.push_str(&body);
        let located = tokenize_located(&text);
        let sentences = sentence_ranges(&located, &text);
        let tokens = located.into_iter().map(|t| t.text).collect();
        Ok(Document {
            id,
            timestamp,
            title,
            body,
            tokens,
            sentences,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn timestamp(&self) -> Timestamp {
        self.timestamp
    }

    pub fn title(&self) -> &str {
        &self.title
    }

    pub fn body(&self) -> &str {
        &self.body
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn sentences(&self) -> &[Span] {
        &self.sentences
    }

    /// Occurrences of `term` divided by the token count; 0 for an empty document.
    pub fn relative_frequency(&self, term: &str) -> f64 {
        if self.tokens.is_empty() {
            return 0.0;
        }
        let count = self.tokens.iter().filter(|t| *t == term).count();
        count as f64 / self.tokens.len() as f64
    }
}

#[derive(Debug, Clone)]
struct LocatedToken {
    text: String,
    bytes: Range<usize>,
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

// Combining diacritical marks stay attached to the preceding letter so that
// decomposed input keeps its accents.
fn is_combining_mark(c: char) -> bool {
    matches!(c as u32, 0x0300..=0x036F | 0x1AB0..=0x1AFF | 0x1DC0..=0x1DFF | 0x20D0..=0x20FF | 0xFE20..=0xFE2F)
}

fn tokenize_located(text: &str) -> Vec<LocatedToken> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if !is_word_char(chars[i].1) {
            i += 1;
            continue;
        }
        let start = i;
        let mut end = i + 1;
        loop {
            match chars.get(end) {
                Some(&(_, c)) if is_word_char(c) || is_combining_mark(c) => end += 1,
                // a hyphen is kept only between two word characters
                Some(&(_, '-')) if chars.get(end + 1).is_some_and(|&(_, c)| is_word_char(c)) => {
                    end += 2
                }
                _ => break,
            }
        }
        let byte_start = chars[start].0;
        let byte_end = chars.get(end).map_or(text.len(), |&(b, _)| b);
        let mut token = String::with_capacity(byte_end - byte_start);
        for c in text[byte_start..byte_end].chars() {
            token.extend(c.to_lowercase());
        }
        out.push(LocatedToken {
            text: token,
            bytes: byte_start..byte_end,
        });
        i = end;
    }
    out
}

/// Split text into lowercase tokens: maximal runs of letters and digits,
/// with hyphens kept when they join two such runs. Apostrophes and all
/// other punctuation separate tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    tokenize_located(text).into_iter().map(|t| t.text).collect()
}

// True when `text[gap]` holds a terminator followed by whitespace or the end of `text`.
fn ends_sentence(text: &str, gap: Range<usize>) -> bool {
    text[gap.clone()].char_indices().any(|(i, c)| {
        matches!(c, '.' | '!' | '?')
            && text[gap.start + i + c.len_utf8()..]
                .chars()
                .next()
                .is_none_or(char::is_whitespace)
    })
}

fn sentence_ranges(located: &[LocatedToken], text: &str) -> Vec<Span> {
    let mut out = Vec::new();
    let mut start = 0;
    for (i, tok) in located.iter().enumerate() {
        let gap_end = located.get(i + 1).map_or(text.len(), |next| next.bytes.start);
        if i + 1 == located.len() || ends_sentence(text, tok.bytes.end..gap_end) {
            out.push(Span::new(start, i + 1));
            start = i + 1;
        }
    }
    out
}

/// Sentence ranges over `tokens`, which must come from `tokenize(text)`.
///
/// A sentence ends after a token whose source occurrence is followed by
/// `.`, `!` or `?` and then whitespace or the end of the text. The last
/// range always closes at the last token.
pub fn split_sentences(tokens: &[String], text: &str) -> Vec<Span> {
    let located = tokenize_located(text);
    debug_assert!(
        located.len() == tokens.len() && located.iter().zip(tokens).all(|(l, t)| &l.text == t),
        "tokens were not produced from this text"
    );
    sentence_ranges(&located, text)
}
