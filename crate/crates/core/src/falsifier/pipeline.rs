use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    evaluate, falsify_targeted, region_of_uncertainty, validity_domain, Candidate, Counterexample, FalsifierError,
    RouMap, ValidityGrid,
};
use crate::cps::MlMode;
use crate::mlanalyzer::{analyze, project_to_cps, restrict_to_rou, AnalyzerError, MlReport, Uml};
use crate::scenario::Scenario;

pub const SCHEMA: &str = "rou-falsify/1";

/// A grid cell flagged as violating, with its center and robustness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellPoint {
    pub cell: usize,
    pub params: Vec<f64>,
    pub rho: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Spent {
    pub grid_simulations: usize,
    pub confirm_simulations: usize,
    pub targeted_budget: usize,
    pub targeted_evaluations: usize,
    pub targeted_incomplete: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FalsificationReport {
    pub schema: String,
    /// Seconds since the Unix epoch; the only field that varies between runs.
    pub timestamp: u64,
    pub seed: u64,
    pub formula: String,
    pub grid_plus: Option<ValidityGrid>,
    pub grid_minus: Option<ValidityGrid>,
    pub rou: Option<RouMap>,
    /// Why the ML analysis did not run, if it did not.
    pub ml_skipped: Option<String>,
    pub ml_analysis: Option<MlReport>,
    pub uml: Option<Uml>,
    /// Cells violated even with perfect perception.
    pub abstraction_counterexamples: Vec<CellPoint>,
    /// The subset that also violates on the concrete model with the default
    /// scene.
    pub confirmed_abstraction_counterexamples: Vec<CellPoint>,
    pub ml_counterexamples: Vec<Counterexample>,
    pub disproved: Vec<Candidate>,
    pub spent: Spent,
}

impl FalsificationReport {
    fn empty(scenario: &Scenario) -> Self {
        Self {
            schema: SCHEMA.into(),
            timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            seed: scenario.seed,
            formula: scenario.formula.clone(),
            grid_plus: None,
            grid_minus: None,
            rou: None,
            ml_skipped: None,
            ml_analysis: None,
            uml: None,
            abstraction_counterexamples: Vec::new(),
            confirmed_abstraction_counterexamples: Vec::new(),
            ml_counterexamples: Vec::new(),
            disproved: Vec::new(),
            spent: Spent::default(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Writes `report.json`, the grid and ROU matrices, the ML samples and
    /// the traces of the first [`MAX_TRACE_FILES`] ML-driven counterexamples
    /// into `dir`, creating it if needed. Artifacts of stages that did not
    /// run are skipped. Returns the written paths.
    pub fn write_to(&self, dir: &Path) -> io::Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut files: Vec<(String, String)> = vec![("report.json".into(), self.to_json())];
        if let Some(g) = &self.grid_plus {
            files.push(("grid_plus.csv".into(), g.to_csv()));
        }
        if let Some(g) = &self.grid_minus {
            files.push(("grid_minus.csv".into(), g.to_csv()));
        }
        if let Some(r) = &self.rou {
            files.push(("rou.csv".into(), r.to_csv()));
        }
        if let Some(ml) = &self.ml_analysis {
            files.push(("ml_samples.csv".into(), ml.samples_csv()));
        }
        for (i, c) in self.ml_counterexamples.iter().take(MAX_TRACE_FILES).enumerate() {
            if let Some(t) = &c.trace {
                files.push((format!("cex_{i:03}.csv"), t.to_csv()));
            }
        }
        let mut written = Vec::new();
        for (name, body) in files {
            let path = dir.join(name);
            fs::write(&path, body)?;
            written.push(path);
        }
        Ok(written)
    }
}

pub const MAX_TRACE_FILES: usize = 20;

/// A failed pipeline stage, with everything computed before it.
#[derive(Debug, thiserror::Error)]
#[error("stage {stage}: {source}")]
pub struct PipelineError {
    pub stage: &'static str,
    #[source]
    pub source: FalsifierError,
    pub partial: Box<FalsificationReport>,
}

/// Runs the full compositional falsification pass for `scenario`:
/// validity domains under perfect and always-wrong perception, their region
/// of uncertainty, ML analysis restricted to it, and targeted search on the
/// concrete model. Parallel stages merge by index, so the report does not
/// depend on the thread count.
pub fn comp_falsify(scenario: &Scenario) -> Result<FalsificationReport, PipelineError> {
    let mut report = FalsificationReport::empty(scenario);
    macro_rules! stage {
        ($name:literal, $e:expr) => {
            match $e {
                Ok(v) => v,
                Err(e) => {
                    return Err(PipelineError { stage: $name, source: e.into(), partial: Box::new(report) });
                }
            }
        };
    }
    let setup = || -> Result<_, FalsifierError> {
        scenario.validate().map_err(|e| FalsifierError::Config(e.to_string()))?;
        let formula = scenario.formula().map_err(|e| FalsifierError::Config(e.to_string()))?;
        let grid = scenario.grid().map_err(|e| FalsifierError::Config(e.to_string()))?;
        Ok((formula, grid))
    };
    let (formula, grid) = stage!("setup", setup());
    let scene = scenario.default_scene();

    let plus_model = scenario.model(MlMode::Perfect);
    let plus = stage!("validity_plus", validity_domain(&plus_model, &formula, &grid, &scene));
    report.spent.grid_simulations += grid.len();
    report.abstraction_counterexamples = plus
        .unsat_cells()
        .map(|k| CellPoint { cell: k, params: grid.center(k), rho: plus.rho[k] })
        .collect();
    report.grid_plus = Some(plus);

    let minus_model = plus_model.make_variant(MlMode::AlwaysWrong);
    let minus = stage!("validity_minus", validity_domain(&minus_model, &formula, &grid, &scene));
    report.spent.grid_simulations += grid.len();
    report.grid_minus = Some(minus);

    let rou = stage!(
        "rou",
        region_of_uncertainty(report.grid_plus.as_ref().expect("set"), report.grid_minus.as_ref().expect("set"))
    );
    report.rou = Some(rou.clone());

    let concrete = scenario.concrete_model();
    let confirmed: Vec<Result<Option<CellPoint>, FalsifierError>> = report
        .abstraction_counterexamples
        .par_iter()
        .map(|c| {
            let (_, rho, sat) = evaluate(&concrete, &formula, &c.params, &scene)?;
            Ok((rho < 0.0 && !sat).then(|| CellPoint { cell: c.cell, params: c.params.clone(), rho }))
        })
        .collect();
    report.spent.confirm_simulations = confirmed.len();
    let confirmed = stage!("confirm", confirmed.into_iter().collect::<Result<Vec<_>, _>>());
    report.confirmed_abstraction_counterexamples = confirmed.into_iter().flatten().collect();

    let space = match restrict_to_rou(&scenario.space(), &rou, &scenario.binding) {
        Ok(s) => s,
        Err(AnalyzerError::EmptyRestriction) => {
            report.ml_skipped = Some("region of uncertainty is empty".into());
            return Ok(report);
        }
        Err(e) => {
            return Err(PipelineError { stage: "restrict", source: e.into(), partial: Box::new(report) });
        }
    };
    let classifier = scenario.classifier();
    let ml = stage!(
        "ml_analysis",
        analyze(
            &space,
            &scenario.concretizer,
            classifier.as_ref(),
            &scenario.truth,
            &scenario.approx_config(),
            scenario.link_radius,
        )
    );
    let uml = stage!("project", project_to_cps(&ml.regions, &scenario.binding, &space));
    report.ml_analysis = Some(ml);
    report.uml = Some(uml.clone());

    let cfg = scenario.target_config();
    report.spent.targeted_budget = cfg.budget;
    let found = stage!("falsify_targeted", falsify_targeted(&concrete, &formula, &rou, &uml, &cfg));
    report.spent.targeted_evaluations = found.evaluations;
    report.spent.targeted_incomplete = found.incomplete;
    report.ml_counterexamples = found.counterexamples;
    report.disproved = found.disproved;
    Ok(report)
}
