//! Seeded document streams with injected vocabulary drift.
//!
//! Relevant documents mention the trigger term amid topic vocabulary,
//! irrelevant ones use background vocabulary only. After the onset point
//! some draws are replaced by injected documents:
//!
//! * polysemy: the trigger appears in an unrelated context (new-sense
//!   vocabulary), so the rule filter wrongly selects the document;
//! * polymorphism: the topic is referred to by a new form in its usual
//!   context, so the rule filter wrongly rejects it.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::EvaluationError;
use crate::corpus::{tokenize, Document, Timestamp};

/// 2000-01-01T00:00:00Z.
const ORIGIN_MS: i64 = 946_684_800_000;
/// One document every 86.4 s, i.e. 1000 a day.
const STEP_MS: i64 = 86_400;

const TOPIC_TERMS: (usize, usize) = (8, 15);
const MIXED_BACKGROUND_TERMS: (usize, usize) = (5, 10);
const BACKGROUND_ONLY_TERMS: (usize, usize) = (13, 25);
const TITLE_WORDS: usize = 3;
const SENTENCE_WORDS: (usize, usize) = (6, 9);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DriftKind {
    None,
    Polysemy,
    Polymorphism,
}

impl DriftKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DriftKind::None => "none",
            DriftKind::Polysemy => "polysemy",
            DriftKind::Polymorphism => "polymorphism",
        }
    }
}

impl core::str::FromStr for DriftKind {
    type Err = EvaluationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(DriftKind::None),
            "polysemy" => Ok(DriftKind::Polysemy),
            "polymorphism" => Ok(DriftKind::Polymorphism),
            _ => Err(EvaluationError::InvalidSpec("unknown drift kind")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriftSpec {
    pub seed: u64,
    pub n_docs: usize,
    pub topic_vocab: Vec<String>,
    pub background_vocab: Vec<String>,
    pub trigger: String,
    pub drift_kind: DriftKind,
    pub new_sense_vocab: Vec<String>,
    pub new_form: String,
    pub onset_fraction: f64,
    pub injection_rate: f64,
    pub relevant_rate: f64,
}

fn numbered(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i:03}")).collect()
}

impl DriftSpec {
    /// The default generator: 40 topic terms, 200 background terms, 40
    /// new-sense terms, 30% relevant documents, onset at mid-stream and a
    /// 10% injection rate when `kind` is not `None`.
    pub fn standard(kind: DriftKind, n_docs: usize, seed: u64) -> Self {
        DriftSpec {
            seed,
            n_docs,
            topic_vocab: numbered("topic", 40),
            background_vocab: numbered("common", 200),
            trigger: String::from("saint-louis"),
            drift_kind: kind,
            new_sense_vocab: numbered("othersense", 40),
            new_form: String::from("sl-holding"),
            onset_fraction: 0.5,
            injection_rate: if kind == DriftKind::None { 0.0 } else { 0.1 },
            relevant_rate: 0.3,
        }
    }

    pub fn validate(&self) -> Result<(), EvaluationError> {
        use EvaluationError::InvalidSpec;
        if !(0.0..=1.0).contains(&self.onset_fraction) {
            return Err(InvalidSpec("onset_fraction must be in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.injection_rate) {
            return Err(InvalidSpec("injection_rate must be in [0, 1]"));
        }
        if !(self.relevant_rate > 0.0 && self.relevant_rate < 1.0) {
            return Err(InvalidSpec("relevant_rate must be in (0, 1)"));
        }
        if self.drift_kind == DriftKind::None && self.injection_rate > 0.0 {
            return Err(InvalidSpec("injection_rate > 0 requires a drift kind"));
        }
        if self.topic_vocab.is_empty() || self.background_vocab.is_empty() {
            return Err(InvalidSpec("topic and background vocabularies must be non-empty"));
        }
        if self.drift_kind == DriftKind::Polysemy && self.new_sense_vocab.is_empty() {
            return Err(InvalidSpec("polysemy needs a new-sense vocabulary"));
        }
        let all = self
            .topic_vocab
            .iter()
            .chain(&self.background_vocab)
            .chain(&self.new_sense_vocab)
            .chain([&self.trigger, &self.new_form]);
        for term in all {
            if tokenize(term).as_slice() != core::slice::from_ref(term) {
                return Err(InvalidSpec("vocabulary terms must be single lowercase tokens"));
            }
        }
        let topic: BTreeSet<&String> = self.topic_vocab.iter().collect();
        let background: BTreeSet<&String> = self.background_vocab.iter().collect();
        let new_sense: BTreeSet<&String> = self.new_sense_vocab.iter().collect();
        if !topic.is_disjoint(&new_sense) {
            return Err(InvalidSpec("topic and new-sense vocabularies overlap"));
        }
        if topic.contains(&self.trigger) || background.contains(&self.trigger) || new_sense.contains(&self.trigger) {
            return Err(InvalidSpec("trigger appears in a vocabulary"));
        }
        if self.new_form == self.trigger || topic.contains(&self.new_form) || background.contains(&self.new_form) {
            return Err(InvalidSpec("new form collides with the trigger or a vocabulary"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroundTruth {
    pub injected: bool,
    pub relevant: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriftStream {
    pub documents: Vec<Document>,
    pub truth: Vec<GroundTruth>,
}

impl DriftStream {
    pub fn injected_count(&self) -> usize {
        self.truth.iter().filter(|t| t.injected).count()
    }
}

fn draw<'v>(rng: &mut ChaCha8Rng, vocab: &'v [String], range: (usize, usize), out: &mut Vec<&'v str>) {
    let n = rng.random_range(range.0..=range.1);
    for _ in 0..n {
        out.push(&vocab[rng.random_range(0..vocab.len())]);
    }
}

fn render(rng: &mut ChaCha8Rng, words: &[&str]) -> (String, String) {
    let split = TITLE_WORDS.min(words.len());
    let title = words[..split].join(" ");
    let mut body = String::new();
    let mut rest = &words[split..];
    while !rest.is_empty() {
        let len = rng.random_range(SENTENCE_WORDS.0..=SENTENCE_WORDS.1).min(rest.len());
        if !body.is_empty() {
            body.push(' ');
        }
        body.push_str(&rest[..len].join(" "));
        body.push('.');
        rest = &rest[len..];
    }
    (title, body)
}

/// Generate the stream described by `spec`; identical specs give identical
/// streams.
pub fn generate_drift_stream(spec: &DriftSpec) -> Result<DriftStream, EvaluationError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let onset = spec.onset_fraction * spec.n_docs as f64;
    let mut documents = Vec::with_capacity(spec.n_docs);
    let mut truth = Vec::with_capacity(spec.n_docs);

    for i in 0..spec.n_docs {
        let relevant = rng.random_bool(spec.relevant_rate);
        let injected = spec.drift_kind != DriftKind::None
            && i as f64 >= onset
            && rng.random_bool(spec.injection_rate);

        let mut words: Vec<&str> = Vec::new();
        let relevant = match (injected, spec.drift_kind) {
            (true, DriftKind::Polysemy) => {
                words.push(&spec.trigger);
                draw(&mut rng, &spec.new_sense_vocab, TOPIC_TERMS, &mut words);
                draw(&mut rng, &spec.background_vocab, MIXED_BACKGROUND_TERMS, &mut words);
                false
            }
            (true, _) => {
                words.push(&spec.new_form);
                draw(&mut rng, &spec.topic_vocab, TOPIC_TERMS, &mut words);
                draw(&mut rng, &spec.background_vocab, MIXED_BACKGROUND_TERMS, &mut words);
                true
            }
            (false, _) if relevant => {
                words.push(&spec.trigger);
                draw(&mut rng, &spec.topic_vocab, TOPIC_TERMS, &mut words);
                draw(&mut rng, &spec.background_vocab, MIXED_BACKGROUND_TERMS, &mut words);
                true
            }
            (false, _) => {
                draw(&mut rng, &spec.background_vocab, BACKGROUND_ONLY_TERMS, &mut words);
                false
            }
        };
        words.shuffle(&mut rng);
        let (title, body) = render(&mut rng, &words);
        let ts = Timestamp(ORIGIN_MS + i as i64 * STEP_MS);
        let doc = Document::new(format!("doc-{i:05}"), ts, title, body)
            .map_err(|_| EvaluationError::InvalidSpec("generated an invalid document"))?;
        documents.push(doc);
        truth.push(GroundTruth { injected, relevant });
    }
    Ok(DriftStream { documents, truth })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_drift_means_no_injection() {
        let s = generate_drift_stream(&DriftSpec::standard(DriftKind::None, 500, 4)).unwrap();
        assert_eq!(s.documents.len(), 500);
        assert_eq!(s.injected_count(), 0);
    }

    #[test]
    fn polysemy_injections_follow_onset() {
        let s = generate_drift_stream(&DriftSpec::standard(DriftKind::Polysemy, 1000, 17)).unwrap();
        let positions: Vec<usize> = (0..1000).filter(|&i| s.truth[i].injected).collect();
        assert!((30..=70).contains(&positions.len()), "{}", positions.len());
        assert!(positions.iter().all(|&i| i >= 500));
        for &i in &positions {
            let d = &s.documents[i];
            assert!(d.tokens().iter().any(|t| t == "saint-louis"));
            assert!(!d.tokens().iter().any(|t| t.starts_with("topic")));
            assert!(!s.truth[i].relevant);
        }
    }

    #[test]
    fn polymorphism_uses_the_new_form() {
        let s = generate_drift_stream(&DriftSpec::standard(DriftKind::Polymorphism, 1000, 5)).unwrap();
        for (d, t) in s.documents.iter().zip(&s.truth) {
            let has_trigger = d.tokens().iter().any(|w| w == "saint-louis");
            let has_form = d.tokens().iter().any(|w| w == "sl-holding");
            assert_eq!(has_form, t.injected);
            assert_eq!(has_trigger, t.relevant && !t.injected);
        }
    }

    #[test]
    fn timestamps_increase() {
        let s = generate_drift_stream(&DriftSpec::standard(DriftKind::Polysemy, 50, 1)).unwrap();
        assert!(s.documents.windows(2).all(|w| w[0].timestamp() < w[1].timestamp()));
        assert!(s.documents.iter().all(|d| !d.title().is_empty()));
    }

    #[test]
    fn invalid_specs() {
        let mut spec = DriftSpec::standard(DriftKind::Polysemy, 10, 1);
        spec.injection_rate = 1.5;
        assert!(generate_drift_stream(&spec).is_err());

        let mut spec = DriftSpec::standard(DriftKind::None, 10, 1);
        spec.injection_rate = 0.1;
        assert!(generate_drift_stream(&spec).is_err());

        let mut spec = DriftSpec::standard(DriftKind::Polysemy, 10, 1);
        spec.new_sense_vocab.push(String::from("topic003"));
        assert!(generate_drift_stream(&spec).is_err());

        let mut spec = DriftSpec::standard(DriftKind::Polymorphism, 10, 1);
        spec.new_form = String::from("common007");
        assert!(generate_drift_stream(&spec).is_err());

        let mut spec = DriftSpec::standard(DriftKind::Polymorphism, 10, 1);
        spec.topic_vocab.push(String::from("Not A Token"));
        assert!(generate_drift_stream(&spec).is_err());
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = DriftSpec::standard(DriftKind::Polymorphism, 200, 99);
        assert_eq!(generate_drift_stream(&spec), generate_drift_stream(&spec));
    }
}
