//! Flat `key = value` files: per-topic configuration and drift specs.
//!
//! Blank lines and lines starting with `#` are ignored. Every key may appear
//! once; unknown keys are errors.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ctlfilter_core::control::{BuildParams, TimeWindow};
use ctlfilter_core::{DriftKind, DriftSpec, SupervisorConfig};

use crate::corpus_io::parse_timestamp;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { key: String, line: usize },
    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { key: String, line: usize },
    #[error("line {line}: invalid value for `{key}`: {message}")]
    BadValue { key: String, line: usize, message: String },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
}

struct Entries {
    map: BTreeMap<String, (String, usize)>,
}

impl Entries {
    fn parse(text: &str, known: &[&str]) -> Result<Self, ConfigError> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (key, value) = trimmed.split_once('=').ok_or(ConfigError::Syntax { line })?;
            let key = key.trim();
            if !known.contains(&key) {
                return Err(ConfigError::UnknownKey { key: key.into(), line });
            }
            if map.insert(key.to_string(), (value.trim().to_string(), line)).is_some() {
                return Err(ConfigError::DuplicateKey { key: key.into(), line });
            }
        }
        Ok(Entries { map })
    }

    fn raw(&self, key: &str) -> Option<&(String, usize)> {
        self.map.get(key)
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        self.map
            .get(key)
            .map(|(v, line)| {
                v.parse().map_err(|e: T::Err| ConfigError::BadValue {
                    key: key.into(),
                    line: *line,
                    message: e.to_string(),
                })
            })
            .transpose()
    }

    fn bad(&self, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError::BadValue {
            key: key.into(),
            line: self.map.get(key).map_or(0, |e| e.1),
            message: message.into(),
        }
    }
}

/// Per-topic settings for building and supervising a control filter.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicConfig {
    pub topic_name: String,
    pub rules_path: PathBuf,
    pub model_path: Option<PathBuf>,
    pub supervisor: SupervisorConfig,
    pub build: BuildParams,
}

const TOPIC_KEYS: &[&str] = &[
    "topic_name",
    "rules_path",
    "model_path",
    "s_minus",
    "s_plus",
    "window_start",
    "window_end",
    "max_pos",
    "neg_ratio",
    "min_df",
    "max_df_ratio",
    "probe_trials",
    "confidence",
    "max_terms",
    "learning_rate",
    "max_epochs",
    "loss_tolerance",
    "init_range",
    "seed",
];

impl TopicConfig {
    /// Parse a topic file. Relative paths are resolved against `base_dir`,
    /// normally the directory holding the file.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, ConfigError> {
        let e = Entries::parse(text, TOPIC_KEYS)?;
        let path = |key: &'static str| -> Result<Option<PathBuf>, ConfigError> {
            match e.raw(key) {
                None => Ok(None),
                Some((v, _)) if v.is_empty() => Err(e.bad(key, "path must be non-empty")),
                Some((v, _)) => Ok(Some(base_dir.join(v))),
            }
        };
        let topic_name: String = e.get("topic_name")?.ok_or(ConfigError::Missing("topic_name"))?;
        if topic_name.is_empty() {
            return Err(e.bad("topic_name", "must be non-empty"));
        }
        let rules_path = path("rules_path")?.ok_or(ConfigError::Missing("rules_path"))?;
        let model_path = path("model_path")?;

        let defaults = SupervisorConfig::default();
        let s_minus = e.get("s_minus")?.unwrap_or(defaults.s_minus());
        let s_plus = e.get("s_plus")?.unwrap_or(defaults.s_plus());
        let supervisor = SupervisorConfig::new(s_minus, s_plus).map_err(|err| {
            let key = if (0.0..=1.0).contains(&s_minus) { "s_plus" } else { "s_minus" };
            e.bad(key, err.to_string())
        })?;

        let time = |key: &'static str| -> Result<_, ConfigError> {
            e.raw(key)
                .map(|(v, _)| parse_timestamp(v).map_err(|m| e.bad(key, m)))
                .transpose()
        };
        let mut build = BuildParams {
            window: TimeWindow::new(time("window_start")?, time("window_end")?),
            ..BuildParams::default()
        };
        macro_rules! set {
            ($key:literal, $field:expr) => {
                if let Some(v) = e.get($key)? {
                    $field = v;
                }
            };
        }
        set!("max_pos", build.max_pos);
        set!("neg_ratio", build.neg_ratio);
        set!("min_df", build.min_df);
        set!("max_df_ratio", build.max_df_ratio);
        set!("probe_trials", build.probe_trials);
        set!("confidence", build.confidence);
        set!("max_terms", build.max_terms);
        set!("learning_rate", build.hyper.learning_rate);
        set!("max_epochs", build.hyper.max_epochs);
        set!("loss_tolerance", build.hyper.loss_tolerance);
        set!("init_range", build.hyper.init_range);
        set!("seed", build.hyper.seed);

        Ok(TopicConfig {
            topic_name,
            rules_path,
            model_path,
            supervisor,
            build,
        })
    }
}

const SPEC_KEYS: &[&str] = &[
    "drift_kind",
    "n_docs",
    "seed",
    "onset_fraction",
    "injection_rate",
    "relevant_rate",
    "trigger",
    "new_form",
    "topic_vocab",
    "background_vocab",
    "new_sense_vocab",
];

fn word_list(v: &str) -> Vec<String> {
    v.split(',').map(str::trim).filter(|w| !w.is_empty()).map(String::from).collect()
}

/// Parse a drift spec file. `drift_kind` and `n_docs` are required; anything
/// else left out keeps the value of [`DriftSpec::standard`].
pub fn parse_drift_spec(text: &str) -> Result<DriftSpec, ConfigError> {
    let e = Entries::parse(text, SPEC_KEYS)?;
    let kind: DriftKind = e.get("drift_kind")?.ok_or(ConfigError::Missing("drift_kind"))?;
    let n_docs = e.get("n_docs")?.ok_or(ConfigError::Missing("n_docs"))?;
    let seed = e.get("seed")?.unwrap_or(0);
    let mut spec = DriftSpec::standard(kind, n_docs, seed);
    if let Some(v) = e.get("onset_fraction")? {
        spec.onset_fraction = v;
    }
    if let Some(v) = e.get("injection_rate")? {
        spec.injection_rate = v;
    }
    if let Some(v) = e.get("relevant_rate")? {
        spec.relevant_rate = v;
    }
    if let Some(v) = e.get("trigger")? {
        spec.trigger = v;
    }
    if let Some(v) = e.get("new_form")? {
        spec.new_form = v;
    }
    if let Some((v, _)) = e.raw("topic_vocab") {
        spec.topic_vocab = word_list(v);
    }
    if let Some((v, _)) = e.raw("background_vocab") {
        spec.background_vocab = word_list(v);
    }
    if let Some((v, _)) = e.raw("new_sense_vocab") {
        spec.new_sense_vocab = word_list(v);
    }
    Ok(spec)
}
