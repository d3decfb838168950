//! Simulates the emergency-braking model under perfect, always-wrong and
//! classifier-driven perception from the same initial state.
//!
//!     cargo run --example aebs_simulation -- 17 35 > trace.csv

use std::sync::Arc;

use rou_falsify::cps::{AebsParams, MlMode, Scene, SceneMode, SimModel};
use rou_falsify::mlanalyzer::Concretizer;
use rou_falsify::mlcomp::{Classifier, PlantedBox, SyntheticClassifier};
use rou_falsify::stl::{eval_robustness, parse};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<f64> = std::env::args().skip(1).map(|a| a.parse()).collect::<Result<_, _>>()?;
    let (v0, d0) = match args[..] {
        [v, d] => (v, d),
        _ => (17.0, 35.0),
    };
    let blind: Arc<dyn Classifier> =
        Arc::new(SyntheticClassifier::new(3, 1, vec![PlantedBox::new(vec![0.4, 0.0, 0.15], vec![0.5, 1.0, 0.25])]));
    let perfect = SimModel::new(AebsParams::default(), MlMode::Perfect);
    let variants = [
        ("perfect", perfect.clone()),
        ("always wrong", perfect.make_variant(MlMode::AlwaysWrong)),
        ("blind spot", perfect.make_variant(MlMode::Concrete { classifier: blind, concretizer: Concretizer::Identity })),
    ];
    // a dark scene straight ahead, inside the classifier's blind spot
    let scene = Scene { point: vec![0.45, 0.0, 0.2], slaved: Some((1, 0.0, 60.0)), mode: SceneMode::Static };
    let phi = parse("G(!(dist <= 0))")?;

    eprintln!("v0 = {v0} m/s, d0 = {d0} m, property {phi}");
    let mut last = None;
    for (name, model) in variants {
        let trace = model.simulate(v0, d0, &scene)?;
        let rho = eval_robustness(&phi, &trace, 0.0)?;
        let min_gap = trace.signal("dist").unwrap().values().iter().copied().fold(f64::INFINITY, f64::min);
        eprintln!("{name:>13}: rho = {rho:7.3}, closest gap {min_gap:.2} m");
        last = Some(trace);
    }
    print!("{}", last.unwrap().to_csv());
    Ok(())
}
