//! Closed-loop emergency-braking model with a swappable perception source.
//!
//! The plant is a point-mass subject vehicle approaching a stationary
//! obstacle. A radar reports the obstacle exactly inside `radar_range`;
//! beyond it, detection comes from the configured [`MlMode`]. The controller
//! switches between safe, warning, braking and mitigation modes on time to
//! collision.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mlanalyzer::Concretizer;
use crate::mlcomp::{Classifier, ClassifierError, FeatureVector};
use crate::trace::{Interp, Signal, TimeGrid, Trace, TraceError};

pub const MPH_TO_MPS: f64 = 0.44704;

#[derive(Debug, Error)]
pub enum CpsError {
    #[error("{name} = {value} outside [{lo}, {hi}]")]
    Input { name: &'static str, value: f64, lo: f64, hi: f64 },
    #[error("perception query at t = {t}: {source}")]
    Classifier {
        t: f64,
        #[source]
        source: ClassifierError,
    },
    #[error(transparent)]
    Trace(#[from] TraceError),
}

/// Plant and controller constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AebsParams {
    pub dt: f64,
    pub horizon: f64,
    pub radar_range: f64,
    /// TTC upper bounds (s) of the warning, braking and mitigation bands.
    pub ttc_warning: f64,
    pub ttc_braking: f64,
    pub ttc_mitigation: f64,
    /// Deceleration magnitudes (m/s^2).
    pub brake_decel: f64,
    pub mitigation_decel: f64,
    pub v_max: f64,
    pub d_max: f64,
}

impl Default for AebsParams {
    fn default() -> Self {
        Self {
            dt: 0.1,
            horizon: 10.0,
            radar_range: 30.0,
            ttc_warning: 3.0,
            ttc_braking: 2.5,
            ttc_mitigation: 0.5,
            brake_decel: 4.0,
            mitigation_decel: 6.0,
            v_max: 40.0 * MPH_TO_MPS,
            d_max: 60.0,
        }
    }
}

impl AebsParams {
    pub fn n_steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Safe = 0,
    Warning = 1,
    Braking = 2,
    Mitigation = 3,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AebsState {
    pub v_s: f64,
    pub dist: f64,
    pub mode: Mode,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SceneMode {
    /// One picture per run, with the distance coordinate taken from `dist(0)`.
    #[default]
    Static,
    /// The distance coordinate follows the live gap every step.
    Tracked,
}

/// An abstract scene point whose distance coordinate is tied to the gap.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub point: Vec<f64>,
    /// Index of the distance coordinate and its semantic range in metres.
    pub slaved: Option<(usize, f64, f64)>,
    pub mode: SceneMode,
}

impl Scene {
    pub fn fixed(point: Vec<f64>) -> Self {
        Self { point, slaved: None, mode: SceneMode::Static }
    }

    /// The abstract point shown to the camera when the gap is `dist`.
    pub fn at(&self, dist: f64) -> Vec<f64> {
        let mut p = self.point.clone();
        if let Some((j, lo, hi)) = self.slaved {
            p[j] = ((dist - lo) / (hi - lo)).clamp(0.0, 1.0);
        }
        p
    }
}

/// Source of obstacle detection beyond radar range.
#[derive(Clone)]
pub enum MlMode {
    /// Always reports the truth (the obstacle is always present).
    Perfect,
    /// Always reports the negation of the truth.
    AlwaysWrong,
    /// Label 1 from the classifier on the concretized scene means "detected".
    Concrete { classifier: Arc<dyn Classifier>, concretizer: Concretizer },
}

impl fmt::Debug for MlMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MlMode::Perfect => f.write_str("Perfect"),
            MlMode::AlwaysWrong => f.write_str("AlwaysWrong"),
            MlMode::Concrete { concretizer, .. } => write!(f, "Concrete({concretizer:?})"),
        }
    }
}

impl MlMode {
    pub fn tag(&self) -> &'static str {
        match self {
            MlMode::Perfect => "plus",
            MlMode::AlwaysWrong => "minus",
            MlMode::Concrete { .. } => "concrete",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimModel {
    pub params: AebsParams,
    pub ml: MlMode,
}

impl SimModel {
    pub fn new(params: AebsParams, ml: MlMode) -> Self {
        Self { params, ml }
    }

    /// The same plant and controller with a different perception source.
    pub fn make_variant(&self, ml: MlMode) -> SimModel {
        SimModel { params: self.params.clone(), ml }
    }

    fn detect(&self, dist: f64, scene: &Scene, scene_dist: f64, t: f64) -> Result<bool, CpsError> {
        if dist <= self.params.radar_range {
            return Ok(true);
        }
        match &self.ml {
            MlMode::Perfect => Ok(true),
            MlMode::AlwaysWrong => Ok(false),
            MlMode::Concrete { classifier, concretizer } => {
                let x: FeatureVector = concretizer.concretize(&scene.at(scene_dist));
                let v = classifier.classify(&x).map_err(|source| CpsError::Classifier { t, source })?;
                Ok(v.label == 1)
            }
        }
    }

    fn control(&self, v_s: f64, dist: f64, detected: bool) -> (Mode, f64) {
        if !detected {
            return (Mode::Safe, 0.0);
        }
        let p = &self.params;
        let ttc = dist / v_s.max(1e-6);
        if ttc > p.ttc_warning {
            (Mode::Safe, 0.0)
        } else if ttc > p.ttc_braking {
            (Mode::Warning, 0.0)
        } else if ttc > p.ttc_mitigation {
            (Mode::Braking, -p.brake_decel)
        } else {
            (Mode::Mitigation, -p.mitigation_decel)
        }
    }

    /// Applies the controller to `state` given the detection flag and
    /// integrates one step. The returned state carries the chosen mode.
    pub fn step(&self, state: AebsState, detected: bool) -> AebsState {
        let (mode, a) = self.control(state.v_s, state.dist, detected);
        let v_s = (state.v_s + a * self.params.dt).max(0.0);
        AebsState { v_s, dist: state.dist - v_s * self.params.dt, mode }
    }

    /// Simulates from `v_s(0) = v0`, `dist(0) = d0` and returns a trace with
    /// signals `v_s`, `dist`, `mode` and `detected`.
    pub fn simulate(&self, v0: f64, d0: f64, scene: &Scene) -> Result<Trace, CpsError> {
        let p = &self.params;
        let slack = 1e-9;
        if !(v0 >= -slack && v0 <= p.v_max + slack) {
            return Err(CpsError::Input { name: "v0", value: v0, lo: 0.0, hi: p.v_max });
        }
        if !(d0 >= -slack && d0 <= p.d_max + slack) {
            return Err(CpsError::Input { name: "d0", value: d0, lo: 0.0, hi: p.d_max });
        }
        let n = p.n_steps();
        let grid = TimeGrid::new(0.0, p.dt, n)?;
        let mut v_s = Vec::with_capacity(n);
        let mut dist = Vec::with_capacity(n);
        let mut mode = Vec::with_capacity(n);
        let mut detected = Vec::with_capacity(n);

        let mut state = AebsState { v_s: v0.max(0.0), dist: d0, mode: Mode::Safe };
        // Once the gap closes, every signal holds its value at impact.
        let mut held: Option<(Mode, bool)> = None;
        for k in 0..n {
            let (m, det, next) = match held {
                Some((m, det)) => (m, det, state),
                None => {
                    let scene_dist = match scene.mode {
                        SceneMode::Static => d0,
                        SceneMode::Tracked => state.dist,
                    };
                    let det = self.detect(state.dist, scene, scene_dist, grid.time(k))?;
                    let next = self.step(state, det);
                    (next.mode, det, next)
                }
            };
            v_s.push(state.v_s);
            dist.push(state.dist);
            mode.push(m as u8 as f64);
            detected.push(if det { 1.0 } else { 0.0 });
            if held.is_none() {
                if state.dist <= 0.0 {
                    held = Some((m, det));
                } else {
                    state = next;
                }
            }
        }
        let signals = vec![
            Signal::new("v_s", grid, v_s, Interp::Linear)?,
            Signal::new("dist", grid, dist, Interp::Linear)?,
            Signal::new("mode", grid, mode, Interp::HoldPrevious)?,
            Signal::new("detected", grid, detected, Interp::HoldPrevious)?,
        ];
        Ok(Trace::new(grid, signals)?)
    }
}
