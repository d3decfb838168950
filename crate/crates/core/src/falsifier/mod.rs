//! Validity domains over a gridded parameter box, the region of uncertainty
//! between the optimistic and pessimistic perception abstractions, targeted
//! search for counterexamples, and the end-to-end pipeline.

mod pipeline;
mod targeted;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cps::{CpsError, Scene, SimModel, MPH_TO_MPS};
use crate::mlanalyzer::AnalyzerError;
use crate::stl::{eval_qualitative, eval_robustness, EvalError, Formula};
use crate::trace::Trace;

pub use pipeline::{comp_falsify, CellPoint, FalsificationReport, PipelineError, Spent, MAX_TRACE_FILES, SCHEMA};
pub use targeted::{falsify_targeted, Candidate, Counterexample, TargetConfig, TargetedResult};

#[derive(Debug, Error)]
pub enum FalsifierError {
    #[error("simulating cell {cell}: {source}")]
    Simulation {
        cell: usize,
        #[source]
        source: CpsError,
    },
    #[error("simulating candidate {index}: {source}")]
    Candidate {
        index: usize,
        #[source]
        source: CpsError,
    },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("grids differ in {0}")]
    GridMismatch(&'static str),
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Analyzer(#[from] AnalyzerError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Param {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    #[serde(default)]
    pub unit: String,
}

impl Param {
    pub fn new(name: impl Into<String>, lo: f64, hi: f64, unit: impl Into<String>) -> Self {
        Self { name: name.into(), lo, hi, unit: unit.into() }
    }

    /// The same range in SI units (`mph` becomes `m/s`).
    pub fn to_si(&self) -> Param {
        match self.unit.as_str() {
            "mph" => Param::new(self.name.clone(), self.lo * MPH_TO_MPS, self.hi * MPH_TO_MPS, "m/s"),
            _ => self.clone(),
        }
    }
}

/// Named CPS parameter ranges. The AEBS model reads `v0` then `d0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamBox {
    pub params: Vec<Param>,
}

impl ParamBox {
    pub fn new(params: Vec<Param>) -> Result<Self, FalsifierError> {
        if params.is_empty() {
            return Err(FalsifierError::Config("parameter box has no parameters".into()));
        }
        for p in &params {
            if !(p.lo.is_finite() && p.hi.is_finite() && p.lo < p.hi) {
                return Err(FalsifierError::Config(format!("parameter {} has empty range [{}, {}]", p.name, p.lo, p.hi)));
            }
        }
        Ok(Self { params })
    }

    /// `v0` in [0, 40] mph (stored in m/s) and `d0` in [0, 60] m.
    pub fn aebs() -> Self {
        Self { params: vec![Param::new("v0", 0.0, 40.0, "mph").to_si(), Param::new("d0", 0.0, 60.0, "m")] }
    }

    pub fn to_si(&self) -> Self {
        Self { params: self.params.iter().map(Param::to_si).collect() }
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.params.iter().position(|p| p.name == name)
    }
}

/// A uniform partition of a [`ParamBox`]. Cells are numbered row-major with
/// the last parameter varying fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellGrid {
    pub param_box: ParamBox,
    pub resolution: Vec<usize>,
}

impl CellGrid {
    pub fn new(param_box: ParamBox, resolution: Vec<usize>) -> Result<Self, FalsifierError> {
        if resolution.len() != param_box.len() {
            return Err(FalsifierError::Config(format!(
                "{} resolutions for {} parameters",
                resolution.len(),
                param_box.len()
            )));
        }
        if resolution.iter().any(|&r| r < 2) {
            return Err(FalsifierError::Config("resolution must be at least 2 per parameter".into()));
        }
        Ok(Self { param_box, resolution })
    }

    pub fn len(&self) -> usize {
        self.resolution.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn coords(&self, mut k: usize) -> Vec<usize> {
        let mut c = vec![0; self.resolution.len()];
        for (j, r) in self.resolution.iter().enumerate().rev() {
            c[j] = k % r;
            k /= r;
        }
        c
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        coords.iter().zip(&self.resolution).fold(0, |k, (c, r)| k * r + c)
    }

    pub fn extent(&self, k: usize, p: usize) -> (f64, f64) {
        let c = self.coords(k)[p];
        let par = &self.param_box.params[p];
        let w = (par.hi - par.lo) / self.resolution[p] as f64;
        (par.lo + c as f64 * w, par.lo + (c + 1) as f64 * w)
    }

    pub fn center(&self, k: usize) -> Vec<f64> {
        (0..self.resolution.len())
            .map(|p| {
                let (lo, hi) = self.extent(k, p);
                0.5 * (lo + hi)
            })
            .collect()
    }

    /// CSV matrix of per-cell values for a 2-parameter grid, with cell
    /// centers as the header row and first column. Other dimensions fall back
    /// to one row per cell.
    pub fn to_csv(&self, value: impl Fn(usize) -> String) -> String {
        let names: Vec<&str> = self.param_box.params.iter().map(|p| p.name.as_str()).collect();
        let mut s = String::new();
        if self.resolution.len() == 2 {
            let cols: Vec<String> = (0..self.resolution[1]).map(|j| self.center(j)[1].to_string()).collect();
            s.push_str(&format!("{}\\{},{}\n", names[0], names[1], cols.join(",")));
            for i in 0..self.resolution[0] {
                let k0 = self.index(&[i, 0]);
                let row: Vec<String> = (0..self.resolution[1]).map(|j| value(k0 + j)).collect();
                s.push_str(&format!("{},{}\n", self.center(k0)[0], row.join(",")));
            }
        } else {
            s.push_str(&format!("{},value\n", names.join(",")));
            for k in 0..self.len() {
                let c: Vec<String> = self.center(k).iter().map(|v| v.to_string()).collect();
                s.push_str(&format!("{},{}\n", c.join(","), value(k)));
            }
        }
        s
    }
}

/// Per-cell satisfaction of a formula at the cell centers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityGrid {
    pub grid: CellGrid,
    pub formula: String,
    /// `plus`, `minus` or `concrete`.
    pub variant: String,
    pub status: Vec<bool>,
    pub rho: Vec<f64>,
}

impl ValidityGrid {
    pub fn sat_cells(&self) -> impl Iterator<Item = usize> + '_ {
        self.status.iter().enumerate().filter(|(_, s)| **s).map(|(k, _)| k)
    }

    pub fn unsat_cells(&self) -> impl Iterator<Item = usize> + '_ {
        self.status.iter().enumerate().filter(|(_, s)| !**s).map(|(k, _)| k)
    }

    /// Status matrix with 1 for sat and 0 for unsat.
    pub fn to_csv(&self) -> String {
        self.grid.to_csv(|k| if self.status[k] { "1".into() } else { "0".into() })
    }
}

/// Cells satisfied under the optimistic abstraction and violated under the
/// pessimistic one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouMap {
    pub grid: CellGrid,
    pub cells: Vec<usize>,
}

impl RouMap {
    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains(&self, k: usize) -> bool {
        self.cells.binary_search(&k).is_ok()
    }

    /// Interval hull of the member cells along parameter `p`.
    pub fn hull(&self, p: usize) -> (f64, f64) {
        self.cells.iter().map(|&k| self.grid.extent(k, p)).fold(
            (f64::INFINITY, f64::NEG_INFINITY),
            |(lo, hi), (a, b)| (lo.min(a), hi.max(b)),
        )
    }

    pub fn to_csv(&self) -> String {
        self.grid.to_csv(|k| if self.contains(k) { "1".into() } else { "0".into() })
    }
}

/// Simulates `(v0, d0)` and scores the trace at `t = 0`.
pub fn evaluate(
    model: &SimModel,
    formula: &Formula,
    params: &[f64],
    scene: &Scene,
) -> Result<(Trace, f64, bool), FalsifierError> {
    let trace = model.simulate(params[0], params[1], scene).map_err(|source| FalsifierError::Candidate { index: 0, source })?;
    let rho = eval_robustness(formula, &trace, 0.0)?;
    let sat = eval_qualitative(formula, &trace, 0.0)?;
    Ok((trace, rho, sat))
}

/// Evaluates `formula` at every cell center of `grid` under `model`, in
/// parallel, with results in cell order.
pub fn validity_domain(
    model: &SimModel,
    formula: &Formula,
    grid: &CellGrid,
    scene: &Scene,
) -> Result<ValidityGrid, FalsifierError> {
    if grid.param_box.len() != 2 {
        return Err(FalsifierError::Config("the simulation model takes exactly two parameters (v0, d0)".into()));
    }
    let results: Vec<(bool, f64)> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            evaluate(model, formula, &grid.center(k), scene)
                .map(|(_, rho, sat)| (sat, rho))
                .map_err(|e| match e {
                    FalsifierError::Candidate { source, .. } => FalsifierError::Simulation { cell: k, source },
                    other => other,
                })
        })
        .collect::<Result<_, _>>()?;
    let (status, rho) = results.into_iter().unzip();
    Ok(ValidityGrid { grid: grid.clone(), formula: formula.to_string(), variant: model.ml.tag().into(), status, rho })
}

/// Cells sat in `plus` and unsat in `minus`.
pub fn region_of_uncertainty(plus: &ValidityGrid, minus: &ValidityGrid) -> Result<RouMap, FalsifierError> {
    if plus.grid != minus.grid {
        return Err(FalsifierError::GridMismatch("box or resolution"));
    }
    if plus.formula != minus.formula {
        return Err(FalsifierError::GridMismatch("formula"));
    }
    let cells = (0..plus.status.len()).filter(|&k| plus.status[k] && !minus.status[k]).collect();
    Ok(RouMap { grid: plus.grid.clone(), cells })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cps::{AebsParams, MlMode};
    use crate::stl::parse;

    fn grid(r: [usize; 2]) -> CellGrid {
        CellGrid::new(ParamBox::aebs(), r.to_vec()).unwrap()
    }

    fn vd(ml: MlMode, f: &str, r: [usize; 2]) -> ValidityGrid {
        let m = SimModel::new(AebsParams::default(), ml);
        validity_domain(&m, &parse(f).unwrap(), &grid(r), &Scene::fixed(vec![])).unwrap()
    }

    #[test]
    fn cell_numbering_round_trips() {
        let g = grid([4, 6]);
        for k in 0..g.len() {
            assert_eq!(g.index(&g.coords(k)), k);
        }
        assert_eq!(g.coords(7), vec![1, 1]);
        assert_eq!(g.extent(7, 1), (10.0, 20.0));
        assert_eq!(g.center(0)[1], 5.0);
    }

    #[test]
    fn resolution_below_two_is_rejected() {
        assert!(CellGrid::new(ParamBox::aebs(), vec![1, 60]).is_err());
        assert!(CellGrid::new(ParamBox::aebs(), vec![40]).is_err());
    }

    #[test]
    fn mph_converts() {
        let b = ParamBox::aebs();
        assert!((b.params[0].hi - 17.8816).abs() < 1e-12);
        assert_eq!(b.params[0].unit, "m/s");
    }

    #[test]
    fn tautology_is_sat_everywhere() {
        for ml in [MlMode::Perfect, MlMode::AlwaysWrong] {
            assert!(vd(ml, "G(dist > -1000000)", [8, 12]).status.iter().all(|s| *s));
        }
    }

    #[test]
    fn standing_still_is_sat() {
        let b = ParamBox::new(vec![Param::new("v0", 0.0, 1e-9, "m/s"), Param::new("d0", 0.0, 60.0, "m")]).unwrap();
        let g = CellGrid::new(b, vec![2, 6]).unwrap();
        let m = SimModel::new(AebsParams::default(), MlMode::AlwaysWrong);
        let v = validity_domain(&m, &parse("G(dist > 0)").unwrap(), &g, &Scene::fixed(vec![])).unwrap();
        assert!(v.status.iter().all(|s| *s));
        for k in 0..g.len() {
            assert!((v.rho[k] - g.center(k)[1]).abs() < 1e-6);
        }
    }

    #[test]
    fn identical_grids_give_empty_rou() {
        let g = vd(MlMode::Perfect, "G(!(dist <= 0))", [10, 12]);
        assert!(region_of_uncertainty(&g, &g).unwrap().is_empty());
    }

    #[test]
    fn all_unsat_minus_gives_plus_sat_cells() {
        let plus = vd(MlMode::Perfect, "G(!(dist <= 0))", [10, 12]);
        let mut minus = plus.clone();
        minus.status.iter_mut().for_each(|s| *s = false);
        let rou = region_of_uncertainty(&plus, &minus).unwrap();
        assert_eq!(rou.cells, plus.sat_cells().collect::<Vec<_>>());
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let a = vd(MlMode::Perfect, "G(dist > 0)", [10, 12]);
        let b = vd(MlMode::AlwaysWrong, "G(dist > 0)", [10, 13]);
        assert!(matches!(region_of_uncertainty(&a, &b), Err(FalsifierError::GridMismatch(_))));
    }

    #[test]
    fn rou_sits_beyond_radar_range() {
        let plus = vd(MlMode::Perfect, "G(!(dist <= 0))", [40, 60]);
        let minus = vd(MlMode::AlwaysWrong, "G(!(dist <= 0))", [40, 60]);
        let rou = region_of_uncertainty(&plus, &minus).unwrap();
        assert!(!rou.is_empty());
        for &k in &rou.cells {
            assert!(rou.grid.center(k)[1] > 30.0);
            assert!(plus.status[k]);
        }
        let unsat_plus: Vec<usize> = plus.unsat_cells().collect();
        assert!(rou.cells.iter().all(|k| !unsat_plus.contains(k)));
        assert_eq!(plus.to_csv().lines().count(), 41);
        assert_eq!(rou.to_csv().lines().nth(1).unwrap().split(',').count(), 61);
    }
}
