//! Analysis of the perception classifier over an abstract feature space.
//!
//! Scenes are parameterized by a low-dimensional abstract space `[0,1]^n`
//! ([`AbstractSpace`]); a [`Concretizer`] turns abstract points into the
//! classifier's feature vectors. [`approximate`] builds a cheap surrogate of
//! the classifier from low-discrepancy samples, [`extract_regions`] groups
//! misclassified samples into boxes, and the projection functions move
//! between the CPS parameter box and the abstract space.

mod approx;
mod project;
mod regions;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mlcomp::{Classifier, FeatureVector, ItemError, Label, LabeledSet};
use crate::sampling::SamplingError;

pub use approx::{approximate, sample_and_label, ApproxClassifier, ApproxConfig, ApproxResult, SamplerKind};
pub use project::{project_to_cps, restrict_to_rou, Binding, Link, ParamRange, Uml, UmlEntry};
pub use regions::{extract_regions, misclassified, Region, RegionTag, DEFAULT_LINK_RADIUS};

#[derive(Debug, Error)]
pub enum AnalyzerError {
    #[error("approximation did not reach error <= {epsilon} within {iterations} iterations (last error {last_error})")]
    Budget { epsilon: f64, iterations: usize, last_error: f64, best: Box<ApproxResult> },
    #[error("invalid analyzer configuration: {0}")]
    Config(String),
    #[error("labeling sample {0}")]
    Classifier(#[from] ItemError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error("region of uncertainty is empty; nothing to analyze")]
    EmptyRestriction,
}

/// One abstract coordinate with its semantic meaning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dim {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    #[serde(default)]
    pub unit: String,
}

impl Dim {
    pub fn new(name: impl Into<String>, lo: f64, hi: f64, unit: impl Into<String>) -> Self {
        Self { name: name.into(), lo, hi, unit: unit.into() }
    }

    pub fn to_semantic(&self, a: f64) -> f64 {
        self.lo + a * (self.hi - self.lo)
    }

    pub fn to_normalized(&self, s: f64) -> f64 {
        (s - self.lo) / (self.hi - self.lo)
    }
}

/// The abstract feature space `[0,1]^n`, optionally restricted to a sub-box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbstractSpace {
    pub dims: Vec<Dim>,
    /// Normalized bounds per dimension; `[0, 1]` when unrestricted.
    bounds: Vec<(f64, f64)>,
}

impl AbstractSpace {
    pub fn new(dims: Vec<Dim>) -> Self {
        let bounds = vec![(0.0, 1.0); dims.len()];
        Self { dims, bounds }
    }

    pub fn n(&self) -> usize {
        self.dims.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn dim_index(&self, name: &str) -> Option<usize> {
        self.dims.iter().position(|d| d.name == name)
    }

    /// Restricts dimension `j` to normalized `[lo, hi]` intersected with its
    /// current bounds.
    pub fn restrict(&mut self, j: usize, lo: f64, hi: f64) {
        let (l, h) = self.bounds[j];
        let lo = lo.clamp(0.0, 1.0).max(l);
        let hi = hi.clamp(0.0, 1.0).min(h);
        self.bounds[j] = (lo, hi.max(lo));
    }

    /// Maps a point of the unit cube into the (possibly restricted) space.
    pub fn embed(&self, u: &[f64]) -> Vec<f64> {
        u.iter().zip(&self.bounds).map(|(x, (l, h))| l + x * (h - l)).collect()
    }

    pub fn to_semantic(&self, a: &[f64]) -> Vec<f64> {
        a.iter().zip(&self.dims).map(|(x, d)| d.to_semantic(*x)).collect()
    }

    /// Volume fraction of the restricted box.
    pub fn volume(&self) -> f64 {
        self.bounds.iter().map(|(l, h)| h - l).product()
    }
}

/// Concretization from abstract points to classifier features. Both variants
/// are injective.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Concretizer {
    /// Features are the normalized abstract coordinates.
    #[default]
    Identity,
    /// Features are semantic values `lo + a (hi - lo)` per coordinate.
    Scaled { ranges: Vec<(f64, f64)> },
}

impl Concretizer {
    pub fn scaled(space: &AbstractSpace) -> Self {
        Concretizer::Scaled { ranges: space.dims.iter().map(|d| (d.lo, d.hi)).collect() }
    }

    pub fn concretize(&self, a: &[f64]) -> FeatureVector {
        match self {
            Concretizer::Identity => FeatureVector(a.to_vec()),
            Concretizer::Scaled { ranges } => {
                FeatureVector(a.iter().zip(ranges).map(|(x, (lo, hi))| lo + x * (hi - lo)).collect())
            }
        }
    }
}

/// Ground-truth label of an abstract scene.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "label", rename_all = "snake_case")]
pub enum TruthRule {
    Constant(Label),
}

impl TruthRule {
    pub fn label(&self, _a: &[f64]) -> Label {
        match self {
            TruthRule::Constant(l) => *l,
        }
    }
}

/// Abstract points paired with labels, reusing the classifier-side set type.
pub type AbstractLabeledSet = LabeledSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub point: Vec<f64>,
    pub label: Label,
    pub truth: Label,
}

/// Outcome of one ML analysis pass over a (possibly restricted) space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlReport {
    pub space: AbstractSpace,
    pub converged: bool,
    pub error: f64,
    pub iterations: usize,
    pub history: Vec<f64>,
    pub misclassified: usize,
    pub samples: Vec<SampleRecord>,
    pub regions: Vec<Region>,
}

impl MlReport {
    /// Samples as CSV with one column per dimension plus `label,truth`.
    pub fn samples_csv(&self) -> String {
        let mut out: Vec<String> = self.space.dims.iter().map(|d| d.name.clone()).collect();
        out.extend(["label".to_string(), "truth".to_string()]);
        let mut s = out.join(",") + "\n";
        for r in &self.samples {
            let mut row: Vec<String> = r.point.iter().map(|v| v.to_string()).collect();
            row.push(r.label.to_string());
            row.push(r.truth.to_string());
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }
}

/// Approximates `f` over `space`, then clusters the interpolation samples
/// that disagree with `truth`. A budget-exhausted approximation is kept and
/// reported as not converged.
pub fn analyze(
    space: &AbstractSpace,
    gamma: &Concretizer,
    f: &dyn Classifier,
    truth: &TruthRule,
    cfg: &ApproxConfig,
    link_radius: f64,
) -> Result<MlReport, AnalyzerError> {
    let (result, converged) = match approximate(space, gamma, f, cfg) {
        Ok(r) => (r, true),
        Err(AnalyzerError::Budget { best, .. }) => (*best, false),
        Err(e) => return Err(e),
    };
    let set = result.classifier.training_set();
    let bad = misclassified(&set, |a| truth.label(a));
    let samples = set
        .items
        .iter()
        .map(|(a, y)| SampleRecord { point: a.0.clone(), label: *y, truth: truth.label(&a.0) })
        .collect();
    Ok(MlReport {
        space: space.clone(),
        converged,
        error: result.error,
        iterations: result.iterations,
        history: result.history,
        misclassified: bad.len(),
        samples,
        regions: extract_regions(&bad, link_radius),
    })
}
