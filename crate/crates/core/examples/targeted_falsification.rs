//! Runs the pipeline stage by stage: region of uncertainty, ML analysis
//! restricted to it, projection back to CPS inputs, then targeted search.

use rou_falsify::cps::MlMode;
use rou_falsify::falsifier::{falsify_targeted, region_of_uncertainty, validity_domain};
use rou_falsify::mlanalyzer::{analyze, project_to_cps, restrict_to_rou};
use rou_falsify::scenario::Scenario;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let s = Scenario::aebs_default();
    let (phi, grid, scene) = (s.formula()?, s.grid()?, s.default_scene());

    let plus = validity_domain(&s.model(MlMode::Perfect), &phi, &grid, &scene)?;
    let minus = validity_domain(&s.model(MlMode::AlwaysWrong), &phi, &grid, &scene)?;
    let rou = region_of_uncertainty(&plus, &minus)?;
    let (lo, hi) = rou.hull(1);
    println!("region of uncertainty: {} cells, d0 in [{lo:.1}, {hi:.1}] m", rou.cells.len());

    let space = restrict_to_rou(&s.space(), &rou, &s.binding)?;
    let f = s.classifier();
    let ml = analyze(&space, &s.concretizer, f.as_ref(), &s.truth, &s.approx_config(), s.link_radius)?;
    println!("ML analysis: {} samples, {} misclassified, {} regions", ml.samples.len(), ml.misclassified, ml.regions.len());

    let uml = project_to_cps(&ml.regions, &s.binding, &space)?;
    for (i, e) in uml.entries.iter().enumerate() {
        let ranges: Vec<String> = e.params.iter().map(|p| format!("{} [{:.1}, {:.1}]", p.name, p.lo, p.hi)).collect();
        println!("  entry {i} ({:?}): {}, {} representatives", e.tag, ranges.join(", "), e.representatives.len());
    }

    let found = falsify_targeted(&s.concrete_model(), &phi, &rou, &uml, &s.target_config())?;
    println!(
        "\n{} simulations: {} counterexamples, {} candidates disproved{}",
        found.evaluations,
        found.counterexamples.len(),
        found.disproved.len(),
        if found.incomplete { " (budget exhausted)" } else { "" }
    );
    for c in found.counterexamples.iter().take(5) {
        println!(
            "  v0 = {:5.2} m/s, d0 = {:5.2} m, scene {:?}, rho = {:.3}",
            c.params[0],
            c.params[1],
            c.scene.iter().map(|x| (x * 1000.0).round() / 1000.0).collect::<Vec<_>>(),
            c.rho
        );
    }
    Ok(())
}
