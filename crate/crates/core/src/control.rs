//! The learned control filter.
//!
//! Training examples come from the supervised filter's own verdicts, so no
//! manual labelling is involved. The model is a single tanh unit over
//! standardized relative term frequencies; its output is mapped to `[0, 1]`
//! and read as the probability that a document is on topic.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Document, Timestamp};
use crate::selection::{
    build_feature_matrix, select_terms_with_probe, SelectionError, TermVector, STD_FLOOR,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ControlError {
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("corpus has {docs} documents but {verdicts} verdicts")]
    VerdictCount { docs: usize, verdicts: usize },
    #[error("untrainable topic: no selected documents")]
    UntrainableTopic,
    #[error("empty training set")]
    EmptyTrainingSet,
    #[error("training examples must all have {expected} features")]
    FeatureLength { expected: usize },
    #[error("training diverged at epoch {epoch}")]
    Diverged { epoch: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error(transparent)]
    Selection(#[from] SelectionError),
}

/// Time interval `[start, end)`; a missing bound is open.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TimeWindow {
    pub start: Option<Timestamp>,
    pub end: Option<Timestamp>,
}

impl TimeWindow {
    pub const ALL: TimeWindow = TimeWindow {
        start: None,
        end: None,
    };

    pub fn new(start: Option<Timestamp>, end: Option<Timestamp>) -> Self {
        TimeWindow { start, end }
    }

    pub fn contains(&self, t: Timestamp) -> bool {
        self.start.is_none_or(|s| t >= s) && self.end.is_none_or(|e| t < e)
    }
}

/// How the training documents were drawn.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub requested_window: TimeWindow,
    /// True when too few positives forced the whole corpus into use.
    pub widened: bool,
    pub positives_available: usize,
    pub negatives_available: usize,
    pub positives: usize,
    pub negatives: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainingExample<'a> {
    pub doc: &'a Document,
    pub label: bool,
}

/// Documents labelled by the supervised filter, positives first, each group
/// in corpus order.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet<'a> {
    pub examples: Vec<TrainingExample<'a>>,
    pub provenance: Provenance,
}

impl<'a> TrainingSet<'a> {
    pub fn documents(&self) -> Vec<&'a Document> {
        self.examples.iter().map(|e| e.doc).collect()
    }

    pub fn labels(&self) -> Vec<bool> {
        self.examples.iter().map(|e| e.label).collect()
    }

    pub fn counts(&self) -> (usize, usize) {
        let pos = self.examples.iter().filter(|e| e.label).count();
        (pos, self.examples.len() - pos)
    }
}

fn sample_sorted(rng: &mut ChaCha8Rng, items: &[usize], amount: usize) -> Vec<usize> {
    if amount >= items.len() {
        return items.to_vec();
    }
    let mut picked: Vec<usize> = rand::seq::index::sample(rng, items.len(), amount)
        .into_iter()
        .map(|i| items[i])
        .collect();
    picked.sort_unstable();
    picked
}

/// Draw the training documents from the supervised filter's verdicts.
///
/// Positives are the selected documents of `window`. A verbose filter (more
/// than `max_pos` positives) is subsampled uniformly; a mute one (fewer) has
/// its window widened to the whole corpus first. Negatives are a uniform
/// sample of rejected documents from the same window, `neg_ratio` times the
/// number of positives when available.
pub fn assemble_training_set<'a>(
    corpus: &'a [Document],
    verdicts: &[bool],
    window: TimeWindow,
    max_pos: usize,
    neg_ratio: f64,
    seed: u64,
) -> Result<TrainingSet<'a>, ControlError> {
    if corpus.is_empty() {
        return Err(ControlError::EmptyCorpus);
    }
    if corpus.len() != verdicts.len() {
        return Err(ControlError::VerdictCount {
            docs: corpus.len(),
            verdicts: verdicts.len(),
        });
    }
    if max_pos == 0 {
        return Err(ControlError::InvalidParameter("max_pos must be at least 1"));
    }
    if !(neg_ratio > 0.0 && neg_ratio.is_finite()) {
        return Err(ControlError::InvalidParameter("neg_ratio must be positive"));
    }

    let split = |w: &TimeWindow| {
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for (i, d) in corpus.iter().enumerate() {
            if w.contains(d.timestamp()) {
                if verdicts[i] {
                    pos.push(i);
                } else {
                    neg.push(i);
                }
            }
        }
        (pos, neg)
    };

    let (mut pos, mut neg) = split(&window);
    let covers_corpus = corpus.iter().all(|d| window.contains(d.timestamp()));
    let widened = pos.len() < max_pos && !covers_corpus;
    if widened {
        (pos, neg) = split(&TimeWindow::ALL);
    }
    if pos.is_empty() {
        return Err(ControlError::UntrainableTopic);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let positives = sample_sorted(&mut rng, &pos, max_pos);
    let wanted = libm::ceil(neg_ratio * positives.len() as f64) as usize;
    let negatives = sample_sorted(&mut rng, &neg, wanted);

    let provenance = Provenance {
        requested_window: window,
        widened,
        positives_available: pos.len(),
        negatives_available: neg.len(),
        positives: positives.len(),
        negatives: negatives.len(),
        seed,
    };
    let examples = positives
        .iter()
        .map(|&i| TrainingExample {
            doc: &corpus[i],
            label: true,
        })
        .chain(negatives.iter().map(|&i| TrainingExample {
            doc: &corpus[i],
            label: false,
        }))
        .collect();
    Ok(TrainingSet {
        examples,
        provenance,
    })
}

/// Standardized relative frequencies of the term vector's terms in `doc`.
pub fn featurize(doc: &Document, tv: &TermVector) -> Vec<f64> {
    let tokens = doc.tokens();
    let total = tokens.len();
    tv.entries()
        .iter()
        .map(|e| {
            let rel = if total == 0 {
                0.0
            } else {
                tokens.iter().filter(|t| **t == e.term).count() as f64 / total as f64
            };
            (rel - e.mean) / e.std.max(STD_FLOOR)
        })
        .collect()
}

/// Probability-like score in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Score(f64);

impl Score {
    /// Clamps into `[0, 1]`; NaN maps to 0.
    pub fn new(value: f64) -> Self {
        if value.is_nan() {
            Score(0.0)
        } else {
            Score(value.clamp(0.0, 1.0))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// A single tanh unit with output `(1 + tanh(w·x + b)) / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct TanhUnit {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl TanhUnit {
    pub fn zeros(n: usize) -> Self {
        TanhUnit {
            weights: alloc::vec![0.0; n],
            bias: 0.0,
        }
    }

    fn activation(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias
    }

    pub fn output(&self, x: &[f64]) -> f64 {
        (1.0 + libm::tanh(self.activation(x))) / 2.0
    }

    /// Squared error `(ŷ - y)²` on one example.
    pub fn loss(&self, x: &[f64], label: f64) -> f64 {
        let e = self.output(x) - label;
        e * e
    }

    /// Exact gradient of the squared error with respect to weights and bias.
    /// Uses `dŷ/da = 2ŷ(1 - ŷ)`.
    pub fn loss_gradient(&self, x: &[f64], label: f64) -> (Vec<f64>, f64) {
        let y = self.output(x);
        let d_act = 2.0 * (y - label) * 2.0 * y * (1.0 - y);
        (x.iter().map(|v| d_act * v).collect(), d_act)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparams {
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub loss_tolerance: f64,
    pub init_range: f64,
    pub seed: u64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            learning_rate: 0.1,
            max_epochs: 1000,
            loss_tolerance: 1e-7,
            init_range: 0.1,
            seed: 0,
        }
    }
}

impl Hyperparams {
    fn validate(&self) -> Result<(), ControlError> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(ControlError::InvalidParameter("learning_rate must be positive"));
        }
        if self.max_epochs == 0 {
            return Err(ControlError::InvalidParameter("max_epochs must be positive"));
        }
        if self.loss_tolerance.is_nan() || self.loss_tolerance <= 0.0 {
            return Err(ControlError::InvalidParameter("loss_tolerance must be positive"));
        }
        if !(self.init_range > 0.0 && self.init_range.is_finite()) {
            return Err(ControlError::InvalidParameter("init_range must be positive"));
        }
        Ok(())
    }
}

/// Result of fitting a unit: parameters plus the loss trace.
#[derive(Debug, Clone, PartialEq)]
pub struct Fit {
    pub unit: TanhUnit,
    pub epochs_run: usize,
    pub final_loss: f64,
    /// Mean squared error before training and after every epoch.
    pub losses: Vec<f64>,
}

fn batch_loss_and_gradient(unit: &TanhUnit, xs: &[Vec<f64>], ys: &[f64]) -> (f64, Vec<f64>, f64) {
    let n = xs.len() as f64;
    let mut loss = 0.0;
    let mut gw = alloc::vec![0.0; unit.weights.len()];
    let mut gb = 0.0;
    for (x, &y) in xs.iter().zip(ys) {
        let out = unit.output(x);
        let e = out - y;
        loss += e * e;
        let d_act = 2.0 * e * 2.0 * out * (1.0 - out);
        for (g, v) in gw.iter_mut().zip(x) {
            *g += d_act * v;
        }
        gb += d_act;
    }
    gw.iter_mut().for_each(|g| *g /= n);
    (loss / n, gw, gb / n)
}

/// Full-batch gradient descent on the mean squared error.
///
/// Weights start uniform in `[-init_range, init_range]`, the bias at 0.
/// Training stops after `max_epochs` or as soon as an epoch lowers the loss
/// by less than `loss_tolerance`.
pub fn fit_unit(xs: &[Vec<f64>], labels: &[bool], hp: &Hyperparams) -> Result<Fit, ControlError> {
    hp.validate()?;
    if xs.is_empty() {
        return Err(ControlError::EmptyTrainingSet);
    }
    if xs.len() != labels.len() {
        return Err(ControlError::InvalidParameter("features and labels differ in length"));
    }
    let dim = xs[0].len();
    if xs.iter().any(|x| x.len() != dim) {
        return Err(ControlError::FeatureLength { expected: dim });
    }
    let ys: Vec<f64> = labels.iter().map(|&l| if l { 1.0 } else { 0.0 }).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(hp.seed);
    let mut unit = TanhUnit {
        weights: (0..dim)
            .map(|_| rng.random_range(-hp.init_range..=hp.init_range))
            .collect(),
        bias: 0.0,
    };

    let (mut loss, mut gw, mut gb) = batch_loss_and_gradient(&unit, xs, &ys);
    if !loss.is_finite() {
        return Err(ControlError::Diverged { epoch: 0 });
    }
    let mut losses = alloc::vec![loss];
    let mut epochs_run = 0;
    for epoch in 1..=hp.max_epochs {
        for (w, g) in unit.weights.iter_mut().zip(&gw) {
            *w -= hp.learning_rate * g;
        }
        unit.bias -= hp.learning_rate * gb;
        let (next, ngw, ngb) = batch_loss_and_gradient(&unit, xs, &ys);
        if !next.is_finite() || unit.weights.iter().any(|w| !w.is_finite()) || !unit.bias.is_finite() {
            return Err(ControlError::Diverged { epoch });
        }
        epochs_run = epoch;
        losses.push(next);
        let improvement = loss - next;
        loss = next;
        (gw, gb) = (ngw, ngb);
        if improvement < hp.loss_tolerance {
            break;
        }
    }
    Ok(Fit {
        unit,
        epochs_run,
        final_loss: loss,
        losses,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingMeta {
    pub seed: u64,
    pub epochs_run: usize,
    pub final_loss: f64,
    pub n_pos: usize,
    pub n_neg: usize,
}

/// A trained control filter: term vector with its statistics plus the unit.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlModel {
    pub topic_name: String,
    pub term_vector: TermVector,
    pub unit: TanhUnit,
    pub training_meta: TrainingMeta,
}

impl ControlModel {
    /// Checks that weights match the term vector and all reals are finite.
    pub fn new(
        topic_name: impl Into<String>,
        term_vector: TermVector,
        unit: TanhUnit,
        training_meta: TrainingMeta,
    ) -> Result<Self, ControlError> {
        if unit.weights.len() != term_vector.len() {
            return Err(ControlError::FeatureLength {
                expected: term_vector.len(),
            });
        }
        if unit.weights.iter().any(|w| !w.is_finite()) || !unit.bias.is_finite() {
            return Err(ControlError::InvalidParameter("model parameters must be finite"));
        }
        Ok(ControlModel {
            topic_name: topic_name.into(),
            term_vector,
            unit,
            training_meta,
        })
    }

    pub fn score(&self, doc: &Document) -> Score {
        score(self, doc)
    }
}

/// Train the unit on a training set over the given term vector.
pub fn train(
    topic_name: &str,
    ts: &TrainingSet<'_>,
    tv: &TermVector,
    hp: &Hyperparams,
) -> Result<ControlModel, ControlError> {
    if ts.examples.is_empty() {
        return Err(ControlError::EmptyTrainingSet);
    }
    let xs: Vec<Vec<f64>> = ts.examples.iter().map(|e| featurize(e.doc, tv)).collect();
    let fit = fit_unit(&xs, &ts.labels(), hp)?;
    let (n_pos, n_neg) = ts.counts();
    ControlModel::new(
        topic_name,
        tv.clone(),
        fit.unit,
        TrainingMeta {
            seed: hp.seed,
            epochs_run: fit.epochs_run,
            final_loss: fit.final_loss,
            n_pos,
            n_neg,
        },
    )
}

/// Probability of relevance of `doc` according to the control filter.
pub fn score(model: &ControlModel, doc: &Document) -> Score {
    Score::new(model.unit.output(&featurize(doc, &model.term_vector)))
}

/// Everything needed to build a control filter from a verdict stream.
#[derive(Debug, Clone, PartialEq)]
pub struct BuildParams {
    pub window: TimeWindow,
    pub max_pos: usize,
    pub neg_ratio: f64,
    pub min_df: usize,
    pub max_df_ratio: f64,
    pub probe_trials: usize,
    pub confidence: f64,
    pub max_terms: usize,
    pub hyper: Hyperparams,
}

impl Default for BuildParams {
    fn default() -> Self {
        BuildParams {
            window: TimeWindow::ALL,
            max_pos: 500,
            neg_ratio: 1.0,
            min_df: 3,
            max_df_ratio: 0.5,
            probe_trials: 100,
            confidence: 0.95,
            max_terms: 50,
            hyper: Hyperparams::default(),
        }
    }
}

/// Assemble a training set, select terms (never the rule's own trigger
/// terms in `exclude`) and train the unit. `params.hyper.seed` drives all
/// sampling.
pub fn build_control_model(
    topic_name: &str,
    corpus: &[Document],
    verdicts: &[bool],
    exclude: &BTreeSet<String>,
    params: &BuildParams,
) -> Result<ControlModel, ControlError> {
    let seed = params.hyper.seed;
    let ts = assemble_training_set(
        corpus,
        verdicts,
        params.window,
        params.max_pos,
        params.neg_ratio,
        seed,
    )?;
    let m = build_feature_matrix(
        &ts.documents(),
        &ts.labels(),
        params.min_df,
        params.max_df_ratio,
        exclude,
    )?;
    let tv = select_terms_with_probe(&m, params.probe_trials, params.confidence, params.max_terms, seed)?;
    train(topic_name, &ts, &tv, &params.hyper)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selection::TermStats;
    use alloc::format;
    use alloc::string::ToString;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn doc(i: usize, ts: i64, body: &str) -> Document {
        Document::new(format!("d{i}"), Timestamp(ts), "", body).unwrap()
    }

    fn stats(term: &str, mean: f64, std: f64) -> TermStats {
        TermStats {
            term: term.to_string(),
            mean,
            std,
        }
    }

    #[test]
    fn featurize_standardizes() {
        let tv = TermVector::new(alloc::vec![stats("cdc", 0.01, 0.005)]).unwrap();
        let absent = doc(0, 0, "fonds prêt");
        assert_relative_eq!(featurize(&absent, &tv)[0], -2.0, epsilon = 1e-12);
        let mut body = String::from("cdc");
        for _ in 0..49 {
            body.push_str(" x");
        }
        assert_relative_eq!(featurize(&doc(1, 0, &body), &tv)[0], 2.0, epsilon = 1e-9);
        let tv = TermVector::new(alloc::vec![stats("cdc", 0.0, 1e-6)]).unwrap();
        assert_eq!(featurize(&doc(2, 0, ""), &tv), [0.0]);
    }

    #[test]
    fn zero_unit_scores_one_half() {
        let tv = TermVector::new(alloc::vec![stats("a", 0.1, 0.2), stats("b", 0.0, 1.0)]).unwrap();
        let meta = TrainingMeta {
            seed: 0,
            epochs_run: 0,
            final_loss: 0.0,
            n_pos: 0,
            n_neg: 0,
        };
        let mut model = ControlModel::new("t", tv, TanhUnit::zeros(2), meta).unwrap();
        assert_eq!(score(&model, &doc(0, 0, "a b c")).value(), 0.5);
        model.unit.bias = 20.0;
        assert!(model.score(&doc(0, 0, "a b c")).value() > 0.999999);
    }

    #[test]
    fn gradient_at_origin() {
        let unit = TanhUnit::zeros(3);
        let x = [0.5, -1.0, 2.0];
        let (gw, gb) = unit.loss_gradient(&x, 1.0);
        assert_eq!(gb, -0.5);
        assert_eq!(gw, [-0.25, 0.5, -1.0]);
        let (gw0, gb0) = unit.loss_gradient(&x, 0.0);
        assert_eq!(gb + gb0, 0.0);
        assert!(gw.iter().zip(&gw0).all(|(a, b)| a + b == 0.0));
    }

    #[test]
    fn empty_training_set_is_an_error() {
        assert_eq!(
            fit_unit(&[], &[], &Hyperparams::default()).unwrap_err(),
            ControlError::EmptyTrainingSet
        );
    }

    #[test]
    fn single_example_is_absorbed_by_bias() {
        let fit = fit_unit(&[alloc::vec![0.0; 4]], &[true], &Hyperparams::default()).unwrap();
        assert!(fit.unit.output(&[0.0; 4]) > 0.9);
    }

    #[test]
    fn divergence_names_the_epoch() {
        let hp = Hyperparams {
            learning_rate: f64::MAX,
            ..Hyperparams::default()
        };
        let xs = alloc::vec![alloc::vec![4.0], alloc::vec![-4.0]];
        let err = fit_unit(&xs, &[true, false], &hp).unwrap_err();
        assert_eq!(err, ControlError::Diverged { epoch: 1 });
        let xs = alloc::vec![alloc::vec![f64::NAN]];
        let err = fit_unit(&xs, &[true], &Hyperparams::default()).unwrap_err();
        assert_eq!(err, ControlError::Diverged { epoch: 0 });
    }

    #[test]
    fn training_stops_on_tolerance() {
        let hp = Hyperparams {
            loss_tolerance: 1e-2,
            ..Hyperparams::default()
        };
        let xs = alloc::vec![alloc::vec![1.0], alloc::vec![-1.0]];
        let fit = fit_unit(&xs, &[true, false], &hp).unwrap();
        assert!(fit.epochs_run < hp.max_epochs);
        assert_eq!(fit.losses.len(), fit.epochs_run + 1);
        assert_eq!(*fit.losses.last().unwrap(), fit.final_loss);
    }

    fn corpus_with(pos: usize, neg: usize) -> (Vec<Document>, Vec<bool>) {
        let mut docs = Vec::new();
        let mut verdicts = Vec::new();
        for i in 0..pos + neg {
            docs.push(doc(i, i as i64, "x"));
            verdicts.push(i % (pos + neg) < pos);
        }
        (docs, verdicts)
    }

    #[test]
    fn verbose_filter_is_subsampled() {
        let (docs, verdicts) = corpus_with(800, 1200);
        let ts = assemble_training_set(&docs, &verdicts, TimeWindow::ALL, 500, 1.0, 3).unwrap();
        assert_eq!(ts.counts(), (500, 500));
        assert!(!ts.provenance.widened);
        assert_eq!(ts.provenance.positives_available, 800);
        let again = assemble_training_set(&docs, &verdicts, TimeWindow::ALL, 500, 1.0, 3).unwrap();
        assert_eq!(ts, again);
    }

    #[test]
    fn mute_filter_keeps_everything() {
        let (docs, verdicts) = corpus_with(10, 90);
        let ts = assemble_training_set(&docs, &verdicts, TimeWindow::ALL, 500, 1.0, 3).unwrap();
        assert_eq!(ts.counts(), (10, 10));
        let ts = assemble_training_set(&docs, &verdicts, TimeWindow::ALL, 500, 2.5, 3).unwrap();
        assert_eq!(ts.counts(), (10, 25));
    }

    #[test]
    fn mute_filter_widens_the_window() {
        let (docs, verdicts) = corpus_with(10, 90);
        let window = TimeWindow::new(Some(Timestamp(5)), Some(Timestamp(50)));
        let ts = assemble_training_set(&docs, &verdicts, window, 500, 1.0, 3).unwrap();
        assert!(ts.provenance.widened);
        assert_eq!(ts.counts(), (10, 10));
        let ts = assemble_training_set(&docs, &verdicts, window, 3, 1.0, 3).unwrap();
        assert!(!ts.provenance.widened);
        assert_eq!(ts.counts(), (3, 3));
        assert!(ts.examples.iter().all(|e| window.contains(e.doc.timestamp())));
    }

    #[test]
    fn untrainable_topic() {
        let (docs, verdicts) = corpus_with(0, 5);
        assert_eq!(
            assemble_training_set(&docs, &verdicts, TimeWindow::ALL, 500, 1.0, 3).unwrap_err(),
            ControlError::UntrainableTopic
        );
        assert_eq!(
            assemble_training_set(&[], &[], TimeWindow::ALL, 500, 1.0, 3).unwrap_err(),
            ControlError::EmptyCorpus
        );
    }

    proptest! {
        #[test]
        fn scores_stay_in_unit_interval(
            w in prop::collection::vec(-50.0f64..50.0, 3),
            b in -50.0f64..50.0,
            x in prop::collection::vec(-100.0f64..100.0, 3),
        ) {
            let unit = TanhUnit { weights: w, bias: b };
            let y = unit.output(&x);
            prop_assert!((0.0..=1.0).contains(&y));
        }

        #[test]
        fn gradient_matches_finite_differences(
            w in prop::collection::vec(-1.0f64..1.0, 4),
            b in -1.0f64..1.0,
            x in prop::collection::vec(-2.0f64..2.0, 4),
            label in prop::bool::ANY,
        ) {
            let y = if label { 1.0 } else { 0.0 };
            let unit = TanhUnit { weights: w, bias: b };
            let (gw, gb) = unit.loss_gradient(&x, y);
            let h = 1e-5;
            let fd = |shift: &dyn Fn(&mut TanhUnit, f64)| {
                let mut plus = unit.clone();
                shift(&mut plus, h);
                let mut minus = unit.clone();
                shift(&mut minus, -h);
                (plus.loss(&x, y) - minus.loss(&x, y)) / (2.0 * h)
            };
            let fb = fd(&|u, d| u.bias += d);
            prop_assert!((fb - gb).abs() <= 1e-5 * gb.abs().max(1e-3));
            for (i, g) in gw.iter().enumerate() {
                let fw = fd(&|u, d| u.weights[i] += d);
                prop_assert!((fw - g).abs() <= 1e-5 * g.abs().max(1e-3));
            }
        }
    }
}
