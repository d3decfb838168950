use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{evaluate, FalsifierError, RouMap};
use crate::cps::{Scene, SceneMode, SimModel};
use crate::mlanalyzer::Uml;
use crate::stl::Formula;
use crate::trace::Trace;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetConfig {
    /// Maximum number of simulations.
    pub budget: usize,
    /// Number of lowest-robustness phase 1 points refined in phase 2.
    pub seeds: usize,
    pub rounds: usize,
    pub scene_mode: SceneMode,
    /// Scene dimension tied to the gap, with its semantic range.
    pub slaved: Option<(usize, f64, f64)>,
}

impl Default for TargetConfig {
    fn default() -> Self {
        Self { budget: 20_000, seeds: 5, rounds: 3, scene_mode: SceneMode::Static, slaved: None }
    }
}

/// An evaluated input: CPS parameters, abstract scene point and robustness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub params: Vec<f64>,
    pub scene: Vec<f64>,
    pub rho: f64,
    pub entry: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Counterexample {
    pub params: Vec<f64>,
    pub scene: Vec<f64>,
    pub rho: f64,
    pub entry: usize,
    #[serde(skip)]
    pub trace: Option<Trace>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TargetedResult {
    /// Sorted by robustness, most negative first.
    pub counterexamples: Vec<Counterexample>,
    pub disproved: Vec<Candidate>,
    pub evaluations: usize,
    /// Budget ran out before every phase 1 candidate was evaluated.
    pub incomplete: bool,
}

struct Eval {
    params: Vec<f64>,
    scene: Vec<f64>,
    entry: usize,
    rho: f64,
    sat: bool,
    trace: Trace,
}

struct Search {
    entry: usize,
    /// Bounds of `params ++ scene`; coordinates with `None` are fixed.
    bounds: Vec<Option<(f64, f64)>>,
}

fn scene_for(point: &[f64], cfg: &TargetConfig) -> Scene {
    Scene { point: point.to_vec(), slaved: cfg.slaved, mode: cfg.scene_mode }
}

fn run(
    model: &SimModel,
    formula: &Formula,
    cfg: &TargetConfig,
    index: usize,
    params: Vec<f64>,
    scene: Vec<f64>,
    entry: usize,
) -> Result<Eval, FalsifierError> {
    let (trace, rho, sat) = evaluate(model, formula, &params, &scene_for(&scene, cfg)).map_err(|e| match e {
        FalsifierError::Candidate { source, .. } => FalsifierError::Candidate { index, source },
        other => other,
    })?;
    Ok(Eval { params, scene, entry, rho, sat, trace })
}

fn descend(
    model: &SimModel,
    formula: &Formula,
    cfg: &TargetConfig,
    seed: &Eval,
    search: &Search,
    budget: usize,
) -> Result<Vec<Eval>, FalsifierError> {
    let np = seed.params.len();
    let mut x: Vec<f64> = seed.params.iter().chain(&seed.scene).copied().collect();
    let mut fx = seed.rho;
    let mut step: Vec<f64> = search.bounds.iter().map(|b| b.map_or(0.0, |(lo, hi)| (hi - lo) / 4.0)).collect();
    let mut out = Vec::new();
    'rounds: for _ in 0..cfg.rounds {
        for c in 0..x.len() {
            let Some((lo, hi)) = search.bounds[c] else { continue };
            if step[c] <= 0.0 {
                continue;
            }
            for dir in [1.0, -1.0] {
                if out.len() >= budget {
                    break 'rounds;
                }
                let mut y = x.clone();
                y[c] = (x[c] + dir * step[c]).clamp(lo, hi);
                if y[c] == x[c] {
                    continue;
                }
                let e = run(model, formula, cfg, 0, y[..np].to_vec(), y[np..].to_vec(), search.entry)?;
                let better = e.rho < fx;
                if better {
                    fx = e.rho;
                    x = y;
                }
                out.push(e);
                if better {
                    break;
                }
            }
        }
        step.iter_mut().for_each(|s| *s *= 0.5);
    }
    Ok(out)
}

/// Searches the ROU cells selected by each `U^ml` entry for inputs violating
/// `formula` on the concrete `model`.
///
/// Phase 1 evaluates every (cell center, representative scene) pair. Phase 2
/// refines the `cfg.seeds` lowest-robustness points by coordinate descent
/// over the free scene coordinates within the region box, halving the step
/// every round. Parameters are never moved off ROU cell centers, so a
/// classifier that is right everywhere yields no counterexamples.
pub fn falsify_targeted(
    model: &SimModel,
    formula: &Formula,
    rou: &RouMap,
    uml: &Uml,
    cfg: &TargetConfig,
) -> Result<TargetedResult, FalsifierError> {
    if cfg.budget == 0 {
        return Err(FalsifierError::Config("budget must be at least 1".into()));
    }
    let grid = &rou.grid;
    let np = grid.param_box.len();
    let mut phase1: Vec<(Vec<f64>, Vec<f64>, usize)> = Vec::new();
    let mut searches = Vec::new();
    for (e, entry) in uml.entries.iter().enumerate() {
        let mut ranges = Vec::new();
        for r in &entry.params {
            let p = grid
                .param_box
                .index_of(&r.name)
                .ok_or_else(|| FalsifierError::Config(format!("unknown parameter {:?} in U^ml", r.name)))?;
            ranges.push((p, r.lo, r.hi));
        }
        let cells: Vec<usize> = rou
            .cells
            .iter()
            .copied()
            .filter(|&k| {
                ranges.iter().all(|&(p, lo, hi)| {
                    let (a, b) = grid.extent(k, p);
                    a <= hi && lo <= b
                })
            })
            .collect();
        // Parameters stay at their cell center; only the scene moves.
        let mut bounds: Vec<Option<(f64, f64)>> = vec![None; np];
        for j in 0..entry.scene_lo.len() {
            let free = cfg.slaved.is_none_or(|(s, _, _)| s != j);
            bounds.push(free.then_some((entry.scene_lo[j], entry.scene_hi[j])));
        }
        for &k in &cells {
            for rep in &entry.representatives {
                phase1.push((grid.center(k), rep.clone(), e));
            }
        }
        searches.push(Search { entry: e, bounds });
    }

    let incomplete = phase1.len() > cfg.budget;
    phase1.truncate(cfg.budget);
    let evals: Vec<Eval> = phase1
        .into_par_iter()
        .enumerate()
        .map(|(i, (params, scene, e))| run(model, formula, cfg, i, params, scene, e))
        .collect::<Result<_, _>>()?;
    let mut all = evals;

    let remaining = cfg.budget - all.len();
    if !incomplete && remaining > 0 && cfg.seeds > 0 && !all.is_empty() {
        let mut order: Vec<usize> = (0..all.len()).collect();
        order.sort_by(|&a, &b| all[a].rho.total_cmp(&all[b].rho).then(a.cmp(&b)));
        order.truncate(cfg.seeds);
        let share = remaining / order.len();
        let refined: Vec<Vec<Eval>> = order
            .par_iter()
            .map(|&i| descend(model, formula, cfg, &all[i], &searches[all[i].entry], share))
            .collect::<Result<_, _>>()?;
        all.extend(refined.into_iter().flatten());
    }

    let evaluations = all.len();
    let mut seen = BTreeSet::new();
    let mut counterexamples = Vec::new();
    let mut disproved = Vec::new();
    for e in all {
        let key: Vec<u64> = e.params.iter().chain(&e.scene).map(|v| v.to_bits()).collect();
        if !seen.insert(key) {
            continue;
        }
        if e.rho < 0.0 && !e.sat {
            counterexamples.push(Counterexample {
                params: e.params,
                scene: e.scene,
                rho: e.rho,
                entry: e.entry,
                trace: Some(e.trace),
            });
        } else if e.rho > 0.0 {
            disproved.push(Candidate { params: e.params, scene: e.scene, rho: e.rho, entry: e.entry });
        }
    }
    counterexamples.sort_by(|a, b| a.rho.total_cmp(&b.rho));
    Ok(TargetedResult { counterexamples, disproved, evaluations, incomplete })
}
