use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{AbstractSpace, AnalyzerError, Concretizer};
use crate::mlcomp::{Classifier, FeatureVector, Label, LabeledSet};
use crate::sampling::{self, SampleBatch};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    #[default]
    Halton,
    Lattice,
    Grid,
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ApproxConfig {
    pub epsilon: f64,
    pub sampler: SamplerKind,
    pub batch: usize,
    pub max_iters: usize,
    pub seed: u64,
    /// Lower bound on the size of each fresh test set.
    pub min_test: usize,
}

impl Default for ApproxConfig {
    fn default() -> Self {
        Self { epsilon: 0.1, sampler: SamplerKind::Halton, batch: 64, max_iters: 10, seed: 0, min_test: 100 }
    }
}

/// 1-nearest-neighbor surrogate over labeled abstract samples.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ApproxClassifier {
    pub samples: Vec<(Vec<f64>, Label)>,
}

impl ApproxClassifier {
    /// Label of the nearest stored sample; ties go to the lowest index.
    pub fn predict(&self, a: &[f64]) -> Label {
        let mut best = (f64::INFINITY, 0);
        for (p, y) in &self.samples {
            let d: f64 = p.iter().zip(a).map(|(x, z)| (x - z) * (x - z)).sum();
            if d < best.0 {
                best = (d, *y);
            }
        }
        best.1
    }

    /// Fraction of `set` on which the surrogate disagrees with the stored label.
    pub fn error_on(&self, set: &LabeledSet) -> f64 {
        if set.is_empty() {
            return 0.0;
        }
        let wrong = set.items.iter().filter(|(a, y)| self.predict(&a.0) != *y).count();
        wrong as f64 / set.len() as f64
    }

    pub fn training_set(&self) -> LabeledSet {
        LabeledSet::new(self.samples.iter().map(|(p, y)| (FeatureVector(p.clone()), *y)).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxResult {
    pub classifier: ApproxClassifier,
    /// Error on the last fresh test set.
    pub error: f64,
    pub iterations: usize,
    /// Test-set error after each iteration.
    pub history: Vec<f64>,
}

/// Labels every abstract point of `batch` (embedded into `space`) with
/// `f(gamma(a))`.
pub fn sample_and_label(
    space: &AbstractSpace,
    gamma: &Concretizer,
    f: &dyn Classifier,
    batch: &SampleBatch,
) -> Result<LabeledSet, AnalyzerError> {
    if batch.dim != space.n() {
        return Err(AnalyzerError::Config(format!(
            "batch dimension {} does not match space dimension {}",
            batch.dim,
            space.n()
        )));
    }
    let points: Vec<Vec<f64>> = batch.points.iter().map(|u| space.embed(u)).collect();
    label_points(gamma, f, points)
}

fn label_points(gamma: &Concretizer, f: &dyn Classifier, points: Vec<Vec<f64>>) -> Result<LabeledSet, AnalyzerError> {
    let feats: Vec<FeatureVector> = points.iter().map(|a| gamma.concretize(a)).collect();
    let verdicts = f.classify_batch(&feats)?;
    Ok(LabeledSet::new(
        points.into_iter().zip(verdicts).map(|(a, v)| (FeatureVector(a), v.label)).collect(),
    ))
}

/// Unit-cube points to add to the interpolation set at `iteration` (1-based).
fn next_points(cfg: &ApproxConfig, n: usize, iteration: usize) -> Result<Vec<Vec<f64>>, AnalyzerError> {
    let target = cfg.batch * iteration;
    Ok(match cfg.sampler {
        SamplerKind::Halton => {
            sampling::halton_from(1 + (target - cfg.batch) as u64, cfg.batch, n)?.points
        }
        // Fixed-size sequences are regenerated at the larger size; already
        // present points are filtered out by the caller.
        SamplerKind::Lattice => sampling::lattice(target, n, None)?.points,
        SamplerKind::Grid => {
            let k = (target as f64).powf(1.0 / n as f64).ceil() as usize;
            sampling::grid(k.max(1), n)?.points
        }
        SamplerKind::Uniform => {
            sampling::uniform_random(cfg.batch, n, mix(cfg.seed, 2 * iteration as u64)).points
        }
    })
}

fn mix(seed: u64, salt: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Iteratively grows a labeled interpolation set and rebuilds a 1-NN
/// surrogate until its error on a fresh uniform test set drops to `epsilon`.
///
/// Each iteration adds `batch` sampler points, then draws
/// `max(min_test, |T_I| / 4)` fresh uniform test points. Termination is not
/// guaranteed; after `max_iters` iterations a [`AnalyzerError::Budget`] is
/// returned with the final surrogate.
pub fn approximate(
    space: &AbstractSpace,
    gamma: &Concretizer,
    f: &dyn Classifier,
    cfg: &ApproxConfig,
) -> Result<ApproxResult, AnalyzerError> {
    if !(0.0..=1.0).contains(&cfg.epsilon) {
        return Err(AnalyzerError::Config(format!("epsilon {} outside [0, 1]", cfg.epsilon)));
    }
    if cfg.batch == 0 || cfg.max_iters == 0 {
        return Err(AnalyzerError::Config("batch and max_iters must be at least 1".into()));
    }
    let n = space.n();
    let mut surrogate = ApproxClassifier::default();
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    let mut history = Vec::new();

    for iteration in 1..=cfg.max_iters {
        let fresh: Vec<Vec<f64>> = next_points(cfg, n, iteration)?
            .into_iter()
            .map(|u| space.embed(&u))
            .filter(|a| seen.insert(a.iter().map(|v| v.to_bits()).collect()))
            .collect();
        let labeled = label_points(gamma, f, fresh)?;
        surrogate.samples.extend(labeled.items.into_iter().map(|(a, y)| (a.0, y)));

        let m_test = cfg.min_test.max(surrogate.samples.len() / 4);
        let test_batch = sampling::uniform_random(m_test, n, mix(cfg.seed, 2 * iteration as u64 + 1));
        let test = sample_and_label(space, gamma, f, &test_batch)?;
        let error = surrogate.error_on(&test);
        history.push(error);
        if error <= cfg.epsilon {
            return Ok(ApproxResult { classifier: surrogate, error, iterations: iteration, history });
        }
    }
    let last_error = *history.last().expect("at least one iteration");
    Err(AnalyzerError::Budget {
        epsilon: cfg.epsilon,
        iterations: cfg.max_iters,
        last_error,
        best: Box::new(ApproxResult { classifier: surrogate, error: last_error, iterations: cfg.max_iters, history }),
    })
}
