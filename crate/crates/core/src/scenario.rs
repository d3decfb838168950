//! JSON scenario files tying the model, formula, abstract space and
//! classifier together.

use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cps::{AebsParams, MlMode, Scene, SceneMode, SimModel};
use crate::falsifier::{CellGrid, Param, ParamBox, TargetConfig};
use crate::mlanalyzer::{AbstractSpace, ApproxConfig, Binding, Concretizer, Dim, Link, TruthRule};
use crate::mlcomp::{Classifier, ClassifierHandle, Label, PlantedBox, RemoteClassifier, SyntheticClassifier};
use crate::stl::{Formula, ParseError};

const SIGNALS: [&str; 4] = ["v_s", "dist", "mode", "detected"];

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("reading scenario: {0}")]
    Io(#[from] std::io::Error),
    #[error("scenario JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("formula: {0}")]
    Formula(#[from] ParseError),
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClassifierSpec {
    Synthetic {
        #[serde(default = "one")]
        base_label: Label,
        #[serde(default)]
        boxes: Vec<PlantedBox>,
    },
    Remote {
        endpoint: String,
        #[serde(default = "default_timeout_ms")]
        timeout_ms: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    /// Abstract scene used wherever no region representative applies.
    pub point: Vec<f64>,
    #[serde(default)]
    pub mode: SceneMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub model: AebsParams,
    /// Parameter ranges in config units; `mph` is converted on use.
    pub param_box: ParamBox,
    pub formula: String,
    pub space: Vec<Dim>,
    #[serde(default)]
    pub binding: Binding,
    #[serde(default)]
    pub concretizer: Concretizer,
    pub classifier: ClassifierSpec,
    #[serde(default = "default_truth")]
    pub truth: TruthRule,
    pub scene: SceneSpec,
    /// Its `seed` is replaced by the scenario seed.
    #[serde(default)]
    pub approx: ApproxConfig,
    #[serde(default = "default_link_radius")]
    pub link_radius: f64,
    #[serde(default = "default_resolution")]
    pub resolution: Vec<usize>,
    /// Simulation budget of the targeted search.
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default)]
    pub seed: u64,
}

fn one() -> Label {
    1
}

fn default_timeout_ms() -> u64 {
    5000
}

fn default_truth() -> TruthRule {
    TruthRule::Constant(1)
}

fn default_link_radius() -> f64 {
    0.1
}

fn default_resolution() -> Vec<usize> {
    vec![40, 60]
}

fn default_budget() -> usize {
    20_000
}

impl Scenario {
    /// The emergency-braking scenario with one planted misclassification box
    /// over `x` in [0.4, 0.5] and brightness in [0.15, 0.25].
    pub fn aebs_default() -> Self {
        Scenario {
            model: AebsParams::default(),
            param_box: ParamBox { params: vec![Param::new("v0", 0.0, 40.0, "mph"), Param::new("d0", 0.0, 60.0, "m")] },
            formula: "G(!(dist <= 0))".into(),
            space: vec![
                Dim::new("x", 0.0, 1.0, ""),
                Dim::new("distance", 0.0, 60.0, "m"),
                Dim::new("brightness", 0.0, 1.0, ""),
            ],
            binding: Binding::new(vec![Link { dim: "distance".into(), param: "d0".into() }]),
            concretizer: Concretizer::Identity,
            classifier: ClassifierSpec::Synthetic {
                base_label: 1,
                boxes: vec![PlantedBox::new(vec![0.4, 0.0, 0.15], vec![0.5, 1.0, 0.25])],
            },
            truth: TruthRule::Constant(1),
            scene: SceneSpec { point: vec![0.5, 0.5, 0.5], mode: SceneMode::Static },
            approx: ApproxConfig { epsilon: 0.02, batch: 500, ..ApproxConfig::default() },
            link_radius: 0.1,
            resolution: default_resolution(),
            budget: default_budget(),
            seed: 0,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let s: Scenario = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ScenarioError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// Checks every cross-reference: formula signals, binding names,
    /// dimensions of boxes and scene, and numeric ranges.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let bad = |m: String| Err(ScenarioError::Invalid(m));
        let formula = self.formula()?;
        if let Some(s) = formula.signals().into_iter().find(|s| !SIGNALS.contains(s)) {
            return bad(format!("formula uses unknown signal {s:?} (known: {})", SIGNALS.join(", ")));
        }
        let names: Vec<&str> = self.param_box.params.iter().map(|p| p.name.as_str()).collect();
        if names != ["v0", "d0"] {
            return bad(format!("param_box must list v0 then d0, got {names:?}"));
        }
        ParamBox::new(self.param_box.params.clone()).map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        let pb = self.param_box();
        if pb.params[0].lo < 0.0 || pb.params[0].hi > self.model.v_max + 1e-9 {
            return bad(format!("v0 range exceeds the model's [0, {}] m/s", self.model.v_max));
        }
        if pb.params[1].lo < 0.0 || pb.params[1].hi > self.model.d_max + 1e-9 {
            return bad(format!("d0 range exceeds the model's [0, {}] m", self.model.d_max));
        }
        self.grid()?;
        if self.space.is_empty() {
            return bad("space has no dimensions".into());
        }
        if let Some(d) = self.space.iter().find(|d| !(d.lo < d.hi)) {
            return bad(format!("dimension {} has empty range", d.name));
        }
        let space = self.space();
        for l in &self.binding.links {
            if space.dim_index(&l.dim).is_none() {
                return bad(format!("binding names unknown dimension {:?}", l.dim));
            }
            if pb.index_of(&l.param).is_none() {
                return bad(format!("binding names unknown parameter {:?}", l.param));
            }
        }
        let n = space.n();
        if self.scene.point.len() != n || self.scene.point.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return bad(format!("scene point must have {n} coordinates in [0, 1]"));
        }
        if let Concretizer::Scaled { ranges } = &self.concretizer {
            if ranges.len() != n {
                return bad(format!("scaled concretizer has {} ranges for {n} dimensions", ranges.len()));
            }
        }
        if let ClassifierSpec::Synthetic { base_label, boxes } = &self.classifier {
            if *base_label > 1 {
                return bad("base_label must be 0 or 1".into());
            }
            if boxes.iter().any(|b| b.dim() != n) {
                return bad(format!("planted boxes must have {n} dimensions"));
            }
        }
        if !(self.link_radius > 0.0) {
            return bad("link_radius must be positive".into());
        }
        if self.budget == 0 {
            return bad("budget must be at least 1".into());
        }
        Ok(())
    }

    pub fn formula(&self) -> Result<Formula, ScenarioError> {
        Ok(crate::stl::parse(&self.formula)?)
    }

    /// Parameter box in SI units.
    pub fn param_box(&self) -> ParamBox {
        self.param_box.to_si()
    }

    pub fn grid(&self) -> Result<CellGrid, ScenarioError> {
        CellGrid::new(self.param_box(), self.resolution.clone()).map_err(|e| ScenarioError::Invalid(e.to_string()))
    }

    pub fn space(&self) -> AbstractSpace {
        AbstractSpace::new(self.space.clone())
    }

    pub fn approx_config(&self) -> ApproxConfig {
        ApproxConfig { seed: self.seed, ..self.approx.clone() }
    }

    pub fn classifier(&self) -> Arc<dyn Classifier> {
        let n = self.space.len();
        Arc::new(match &self.classifier {
            ClassifierSpec::Synthetic { base_label, boxes } => {
                ClassifierHandle::Synthetic(SyntheticClassifier::new(n, *base_label, boxes.clone()))
            }
            ClassifierSpec::Remote { endpoint, timeout_ms } => {
                ClassifierHandle::Remote(RemoteClassifier::new(endpoint.clone(), n, Duration::from_millis(*timeout_ms)))
            }
        })
    }

    /// The abstract dimension bound to `d0`, with its semantic range.
    pub fn slaved(&self) -> Option<(usize, f64, f64)> {
        let dim = self.binding.dim_for("d0")?;
        let j = self.space.iter().position(|d| d.name == dim)?;
        Some((j, self.space[j].lo, self.space[j].hi))
    }

    pub fn default_scene(&self) -> Scene {
        Scene { point: self.scene.point.clone(), slaved: self.slaved(), mode: self.scene.mode }
    }

    pub fn model(&self, ml: MlMode) -> SimModel {
        SimModel::new(self.model.clone(), ml)
    }

    pub fn concrete_model(&self) -> SimModel {
        self.model(MlMode::Concrete { classifier: self.classifier(), concretizer: self.concretizer.clone() })
    }

    pub fn target_config(&self) -> TargetConfig {
        TargetConfig {
            budget: self.budget,
            slaved: self.slaved(),
            scene_mode: self.scene.mode,
            ..TargetConfig::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips_through_json() {
        let s = Scenario::aebs_default();
        assert_eq!(Scenario::from_json(&s.to_json()).unwrap(), s);
    }

    #[test]
    fn minimal_file_fills_defaults() {
        let text = r#"{
            "param_box": [{"name": "v0", "lo": 0, "hi": 40, "unit": "mph"}, {"name": "d0", "lo": 0, "hi": 60, "unit": "m"}],
            "formula": "G(dist > 0)",
            "space": [{"name": "distance", "lo": 0, "hi": 60}],
            "binding": [{"dim": "distance", "param": "d0"}],
            "classifier": {"kind": "synthetic"},
            "scene": {"point": [0.5]}
        }"#;
        let s = Scenario::from_json(text).unwrap();
        assert_eq!(s.resolution, vec![40, 60]);
        assert_eq!(s.truth, TruthRule::Constant(1));
        assert_eq!(s.slaved(), Some((0, 0.0, 60.0)));
        assert!((s.param_box().params[0].hi - 17.8816).abs() < 1e-12);
    }

    #[test]
    fn cross_references_are_checked() {
        let mut s = Scenario::aebs_default();
        s.formula = "G(speed > 0)".into();
        assert!(matches!(s.validate(), Err(ScenarioError::Invalid(m)) if m.contains("speed")));

        let mut s = Scenario::aebs_default();
        s.binding = Binding::link("depth", "d0");
        assert!(s.validate().is_err());

        let mut s = Scenario::aebs_default();
        s.scene.point = vec![0.5, 0.5];
        assert!(s.validate().is_err());

        let mut s = Scenario::aebs_default();
        s.resolution = vec![1, 60];
        assert!(s.validate().is_err());

        let mut s = Scenario::aebs_default();
        s.formula = "G(dist >".into();
        assert!(matches!(s.validate(), Err(ScenarioError::Formula(_))));

        assert!(matches!(Scenario::from_json(r#"{"bogus": 1}"#), Err(ScenarioError::Json(_))));
    }
}
