//! The whole pipeline in one call, writing the report and its CSV artifacts.
//!
//!     cargo run --release --example comp_falsify -- [scenario.json] [out_dir]

use std::path::PathBuf;

use rou_falsify::falsifier::comp_falsify;
use rou_falsify::scenario::Scenario;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let scenario = match args.next() {
        Some(path) => Scenario::load(path)?,
        None => Scenario::aebs_default(),
    };
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("rou-falsify-example"));

    let report = match comp_falsify(&scenario) {
        Ok(r) => r,
        Err(e) => {
            e.partial.write_to(&out)?;
            return Err(e.into());
        }
    };
    let written = report.write_to(&out)?;

    println!("property      {}", report.formula);
    println!("grid          {} simulations", report.spent.grid_simulations);
    println!("ROU           {} cells", report.rou.as_ref().map_or(0, |r| r.cells.len()));
    println!(
        "abstraction   {} counterexamples, {} confirmed on the concrete model",
        report.abstraction_counterexamples.len(),
        report.confirmed_abstraction_counterexamples.len()
    );
    if let Some(why) = &report.ml_skipped {
        println!("ML analysis   skipped: {why}");
    }
    println!(
        "ML-driven     {} counterexamples in {} of {} simulations",
        report.ml_counterexamples.len(),
        report.spent.targeted_evaluations,
        report.spent.targeted_budget
    );
    if let Some(worst) = report.ml_counterexamples.first() {
        println!("worst         v0 = {:.2} m/s, d0 = {:.2} m, rho = {:.3}", worst.params[0], worst.params[1], worst.rho);
    }
    println!("\n{} files in {}", written.len(), out.display());
    Ok(())
}
