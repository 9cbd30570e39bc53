//! Control model files.
//!
//! JSON with a `format_version` field. Reals are written in shortest
//! round-trip form, so loading a saved model reproduces it bit for bit and
//! saving the same model twice produces identical bytes.

use ctlfilter_core::control::{ControlError, TrainingMeta};
use ctlfilter_core::selection::{SelectionError, TermStats};
use ctlfilter_core::{ControlModel, TanhUnit, TermVector};
use serde::{Deserialize, Serialize};

pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ModelFileError {
    #[error("malformed model file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported model format_version {0} (expected {FORMAT_VERSION})")]
    UnknownVersion(u64),
    #[error("invalid model: {0}")]
    Invalid(String),
}

impl From<SelectionError> for ModelFileError {
    fn from(e: SelectionError) -> Self {
        ModelFileError::Invalid(e.to_string())
    }
}

impl From<ControlError> for ModelFileError {
    fn from(e: ControlError) -> Self {
        ModelFileError::Invalid(e.to_string())
    }
}

#[derive(Serialize, Deserialize)]
struct TermRecord {
    term: String,
    mean: f64,
    std: f64,
    weight: f64,
}

#[derive(Serialize, Deserialize)]
struct MetaRecord {
    seed: u64,
    epochs_run: usize,
    final_loss: f64,
    n_pos: usize,
    n_neg: usize,
}

#[derive(Serialize, Deserialize)]
struct ModelRecord {
    format_version: u64,
    topic_name: String,
    terms: Vec<TermRecord>,
    bias: f64,
    training_meta: MetaRecord,
}

#[derive(Deserialize)]
struct VersionProbe {
    format_version: u64,
}

pub fn model_to_string(model: &ControlModel) -> String {
    let meta = &model.training_meta;
    let rec = ModelRecord {
        format_version: FORMAT_VERSION,
        topic_name: model.topic_name.clone(),
        terms: model
            .term_vector
            .entries()
            .iter()
            .zip(&model.unit.weights)
            .map(|(e, &weight)| TermRecord {
                term: e.term.clone(),
                mean: e.mean,
                std: e.std,
                weight,
            })
            .collect(),
        bias: model.unit.bias,
        training_meta: MetaRecord {
            seed: meta.seed,
            epochs_run: meta.epochs_run,
            final_loss: meta.final_loss,
            n_pos: meta.n_pos,
            n_neg: meta.n_neg,
        },
    };
    let mut s = serde_json::to_string_pretty(&rec).expect("model records always serialize");
    s.push('\n');
    s
}

pub fn model_from_str(text: &str) -> Result<ControlModel, ModelFileError> {
    let probe: VersionProbe = serde_json::from_str(text)?;
    if probe.format_version != FORMAT_VERSION {
        return Err(ModelFileError::UnknownVersion(probe.format_version));
    }
    let rec: ModelRecord = serde_json::from_str(text)?;
    let weights = rec.terms.iter().map(|t| t.weight).collect();
    let tv = TermVector::new(
        rec.terms
            .into_iter()
            .map(|t| TermStats {
                term: t.term,
                mean: t.mean,
                std: t.std,
            })
            .collect(),
    )?;
    let meta = rec.training_meta;
    Ok(ControlModel::new(
        rec.topic_name,
        tv,
        TanhUnit {
            weights,
            bias: rec.bias,
        },
        TrainingMeta {
            seed: meta.seed,
            epochs_run: meta.epochs_run,
            final_loss: meta.final_loss,
            n_pos: meta.n_pos,
            n_neg: meta.n_neg,
        },
    )?)
}
