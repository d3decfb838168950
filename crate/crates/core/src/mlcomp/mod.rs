//! Binary classifiers and their error metrics.
//!
//! A classifier is anything implementing [`Classifier`]. Two concrete kinds
//! ship with the crate: [`SyntheticClassifier`], a rule-based classifier with
//! planted misclassification boxes, and [`RemoteClassifier`], which talks to an
//! external process over the newline-delimited JSON [`wire`] protocol.

mod remote;
mod synthetic;
pub mod wire;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use remote::RemoteClassifier;
pub use synthetic::{PlantedBox, SyntheticClassifier};

/// Class label, `0` or `1`.
pub type Label = u8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector(pub Vec<f64>);

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Vec<f64>> for FeatureVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub label: Label,
    /// Confidence in `label`, in `[0, 1]`.
    pub score: f64,
}

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("feature vector has {got} entries, classifier expects {expected}")]
    Arity { expected: usize, got: usize },
    #[error("transport error: {0}")]
    Transport(#[from] std::io::Error),
    #[error("classifier did not answer within {0:?}")]
    Timeout(std::time::Duration),
    #[error("malformed reply `{0}`")]
    Malformed(String),
    #[error("reply id {got} does not match any pending request (expected {expected})")]
    IdMismatch { expected: u64, got: u64 },
    #[error("classifier reported an error for request {id}: {message}")]
    Remote { id: u64, message: String },
    #[error("connection closed by classifier")]
    Closed,
}

impl ClassifierError {
    /// True for failures of the channel rather than of the request.
    pub fn is_transport(&self) -> bool {
        !matches!(self, ClassifierError::Arity { .. })
    }
}

/// Error for an operation over a sequence of items, carrying the failing index.
#[derive(Debug, Error)]
#[error("item {index}: {source}")]
pub struct ItemError {
    pub index: usize,
    #[source]
    pub source: ClassifierError,
}

pub trait Classifier: Send + Sync {
    /// Number of features expected per input.
    fn arity(&self) -> usize;

    fn classify(&self, x: &FeatureVector) -> Result<Verdict, ClassifierError>;

    /// Classifies a batch, returning verdicts in input order.
    fn classify_batch(&self, xs: &[FeatureVector]) -> Result<Vec<Verdict>, ItemError> {
        xs.iter()
            .enumerate()
            .map(|(index, x)| self.classify(x).map_err(|source| ItemError { index, source }))
            .collect()
    }
}

fn check_arity(expected: usize, x: &FeatureVector) -> Result<(), ClassifierError> {
    if x.len() == expected {
        Ok(())
    } else {
        Err(ClassifierError::Arity { expected, got: x.len() })
    }
}

/// A classifier selected by configuration.
#[derive(Debug)]
pub enum ClassifierHandle {
    Synthetic(SyntheticClassifier),
    Remote(RemoteClassifier),
}

impl Classifier for ClassifierHandle {
    fn arity(&self) -> usize {
        match self {
            ClassifierHandle::Synthetic(c) => c.arity(),
            ClassifierHandle::Remote(c) => c.arity(),
        }
    }

    fn classify(&self, x: &FeatureVector) -> Result<Verdict, ClassifierError> {
        match self {
            ClassifierHandle::Synthetic(c) => c.classify(x),
            ClassifierHandle::Remote(c) => c.classify(x),
        }
    }

    fn classify_batch(&self, xs: &[FeatureVector]) -> Result<Vec<Verdict>, ItemError> {
        match self {
            ClassifierHandle::Synthetic(c) => c.classify_batch(xs),
            ClassifierHandle::Remote(c) => c.classify_batch(xs),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LabeledSet {
    pub items: Vec<(FeatureVector, Label)>,
}

impl LabeledSet {
    pub fn new(items: Vec<(FeatureVector, Label)>) -> Self {
        Self { items }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Confusion {
    pub false_positives: usize,
    pub false_negatives: usize,
    pub total: usize,
}

impl Confusion {
    pub fn error_rate(&self) -> f64 {
        (self.false_positives + self.false_negatives) as f64 / self.total as f64
    }
}

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("metrics need a nonempty labeled set")]
    EmptySet,
    #[error(transparent)]
    Classifier(#[from] ItemError),
}

/// False-positive and false-negative counts of `f` on `set`.
pub fn confusion(f: &dyn Classifier, set: &LabeledSet) -> Result<Confusion, MetricError> {
    if set.is_empty() {
        return Err(MetricError::EmptySet);
    }
    let xs: Vec<FeatureVector> = set.items.iter().map(|(x, _)| x.clone()).collect();
    let verdicts = f.classify_batch(&xs)?;
    let mut c = Confusion { false_positives: 0, false_negatives: 0, total: set.len() };
    for (v, (_, y)) in verdicts.iter().zip(&set.items) {
        match (v.label, *y) {
            (1, 0) => c.false_positives += 1,
            (0, 1) => c.false_negatives += 1,
            _ => {}
        }
    }
    Ok(c)
}

pub fn false_positives(f: &dyn Classifier, set: &LabeledSet) -> Result<usize, MetricError> {
    Ok(confusion(f, set)?.false_positives)
}

pub fn false_negatives(f: &dyn Classifier, set: &LabeledSet) -> Result<usize, MetricError> {
    Ok(confusion(f, set)?.false_negatives)
}

/// `(FP + FN) / |set|`.
pub fn error_rate(f: &dyn Classifier, set: &LabeledSet) -> Result<f64, MetricError> {
    Ok(confusion(f, set)?.error_rate())
}
