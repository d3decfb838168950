//! A synthetic perception model with a planted blind spot, and its error
//! rate against the ground truth.

use rou_falsify::mlcomp::{confusion, Classifier, FeatureVector, LabeledSet, PlantedBox, SyntheticClassifier};
use rou_falsify::sampling::uniform_random;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // features: horizontal position, distance, brightness
    let blind = PlantedBox::new(vec![0.4, 0.0, 0.15], vec![0.5, 1.0, 0.25]);
    let f = SyntheticClassifier::new(3, 1, vec![blind.clone()]);

    for x in [[0.45, 0.6, 0.2], [0.45, 0.6, 0.8], [0.1, 0.6, 0.2]] {
        let v = f.classify(&FeatureVector(x.to_vec()))?;
        println!("{x:?} -> label {} (score {:.3})", v.label, v.score);
    }

    // Every scene contains a car, so the truth is always 1.
    let set = LabeledSet::new(
        uniform_random(20_000, 3, 1).points.into_iter().map(|p| (FeatureVector(p), 1)).collect(),
    );
    let c = confusion(&f, &set)?;
    println!(
        "\n{} false negatives in {} scenes, error rate {:.4} (box volume {:.4})",
        c.false_negatives,
        c.total,
        c.error_rate(),
        blind.volume()
    );
    Ok(())
}
