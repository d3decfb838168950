//! Approximates a classifier over an abstract scene space with a 1-NN
//! surrogate, then boxes up the misclassified samples.

use rou_falsify::mlanalyzer::{analyze, AbstractSpace, ApproxConfig, Concretizer, Dim, TruthRule};
use rou_falsify::mlcomp::{PlantedBox, SyntheticClassifier};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let space = AbstractSpace::new(vec![
        Dim::new("x", 0.0, 1.0, ""),
        Dim::new("distance", 0.0, 60.0, "m"),
        Dim::new("brightness", 0.0, 1.0, ""),
    ]);
    let f = SyntheticClassifier::new(3, 1, vec![PlantedBox::new(vec![0.4, 0.0, 0.15], vec![0.5, 1.0, 0.25])]);
    let cfg = ApproxConfig { epsilon: 0.004, batch: 250, ..ApproxConfig::default() };

    let report = analyze(&space, &Concretizer::Identity, &f, &TruthRule::Constant(1), &cfg, 0.1)?;
    println!(
        "{} samples, test error {:.4} after {} iterations (history {:?})",
        report.samples.len(),
        report.error,
        report.iterations,
        report.history
    );
    println!("{} misclassified samples in {} regions:", report.misclassified, report.regions.len());
    for r in &report.regions {
        let lo = space.to_semantic(&r.lo);
        let hi = space.to_semantic(&r.hi);
        println!(
            "  {:?}: x [{:.2}, {:.2}], distance [{:.1}, {:.1}] m, brightness [{:.2}, {:.2}], {} members",
            r.tag,
            lo[0],
            hi[0],
            lo[1],
            hi[1],
            lo[2],
            hi[2],
            r.members.len()
        );
    }
    Ok(())
}
