use serde::{Deserialize, Serialize};

use super::{check_arity, Classifier, ClassifierError, FeatureVector, Label, Verdict};

/// Distance from a box boundary at which the synthetic score saturates at 1.
const SCORE_RANGE: f64 = 0.1;

/// Closed axis-aligned box `[lo_j, hi_j]` over feature coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl PlantedBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        assert_eq!(lo.len(), hi.len(), "box corners must have equal dimension");
        Self { lo, hi }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (l, h))| *l <= *v && *v <= *h)
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| (h - l).max(0.0)).product()
    }

    /// Euclidean distance from `x` to the box boundary.
    pub fn boundary_distance(&self, x: &[f64]) -> f64 {
        if self.contains(x) {
            x.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .map(|(v, (l, h))| (v - l).min(h - v))
                .fold(f64::INFINITY, f64::min)
        } else {
            x.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .map(|(v, (l, h))| {
                    let d = (l - v).max(v - h).max(0.0);
                    d * d
                })
                .sum::<f64>()
                .sqrt()
        }
    }
}

/// Rule classifier: answers `base_label` everywhere except inside the planted
/// boxes, where the label is flipped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticClassifier {
    pub arity: usize,
    pub base_label: Label,
    #[serde(default)]
    pub boxes: Vec<PlantedBox>,
}

impl SyntheticClassifier {
    pub fn new(arity: usize, base_label: Label, boxes: Vec<PlantedBox>) -> Self {
        assert!(base_label <= 1, "labels are 0 or 1");
        assert!(boxes.iter().all(|b| b.dim() == arity), "box dimension must match arity");
        Self { arity, base_label, boxes }
    }

    pub fn constant(arity: usize, label: Label) -> Self {
        Self::new(arity, label, Vec::new())
    }

    /// The same rule with every answer negated.
    pub fn flipped(&self) -> Self {
        Self { base_label: 1 - self.base_label, ..self.clone() }
    }

    pub fn label_of(&self, x: &[f64]) -> Label {
        if self.boxes.iter().any(|b| b.contains(x)) {
            1 - self.base_label
        } else {
            self.base_label
        }
    }

    fn score_of(&self, x: &[f64]) -> f64 {
        let d = self.boxes.iter().map(|b| b.boundary_distance(x)).fold(f64::INFINITY, f64::min);
        (0.5 + 0.5 * d / SCORE_RANGE).clamp(0.5, 1.0)
    }
}

impl Classifier for SyntheticClassifier {
    fn arity(&self) -> usize {
        self.arity
    }

    fn classify(&self, x: &FeatureVector) -> Result<Verdict, ClassifierError> {
        check_arity(self.arity, x)?;
        Ok(Verdict { label: self.label_of(&x.0), score: self.score_of(&x.0) })
    }
}
