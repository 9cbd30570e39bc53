//! Supervision of rule-based text filters by a learned control filter.
//!
//! The crate is `no_std` and only needs `alloc`. It covers the whole
//! pipeline: tokenized documents, a small forward-chaining rule language
//! producing the binary verdict of the supervised filter, orthogonal least
//! squares term selection with a random-probe cutoff, a single tanh unit
//! trained on the rule filter's own verdicts, and the differential
//! comparison that turns disagreements into ranked precision-loss and
//! recall-loss alerts. A seeded drift simulator and the usual filtering
//! metrics are included for evaluation.
//!
//! File formats, ingestion and the command-line front end live in the
//! `ctlfilter` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod control;
pub mod corpus;
pub mod evaluation;
pub mod rules;
pub mod selection;
pub mod supervisor;

pub use control::{ControlModel, Hyperparams, Score, TanhUnit, TrainingSet};
pub use corpus::{Document, Span, Timestamp, TokenSpan};
pub use evaluation::{ConfusionCounts, DriftKind, DriftSpec, DriftStream, EvaluationReport};
pub use rules::{RuleSet, Verdict};
pub use selection::{FeatureMatrix, RankedTerms, TermVector};
pub use supervisor::{Alert, AlertKind, SupervisorConfig};
