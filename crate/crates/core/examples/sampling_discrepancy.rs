//! Compares the star discrepancy of the built-in samplers in two dimensions.

use rou_falsify::sampling::{discrepancy_estimate, grid, halton, lattice, uniform_random};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("{:>6} {:>8} {:>8} {:>8} {:>8}", "m", "halton", "lattice", "grid", "uniform");
    for k in [4, 8, 16] {
        let m = k * k;
        let h = discrepancy_estimate(&halton(m, 2)?, 4096)?;
        let l = discrepancy_estimate(&lattice(m, 2, None)?, 4096)?;
        let g = discrepancy_estimate(&grid(k, 2)?, 4096)?;
        let u = (0..10).map(|s| discrepancy_estimate(&uniform_random(m, 2, s), 4096)).sum::<Result<f64, _>>()? / 10.0;
        println!("{m:>6} {h:>8.4} {l:>8.4} {g:>8.4} {u:>8.4}");
    }
    println!("\n(uniform is the mean over 10 seeds)");

    let b = halton(4, 3)?;
    println!("\nfirst Halton points in 3-d, provenance {}:", b.provenance_json());
    for p in &b.points {
        println!("  {p:?}");
    }
    Ok(())
}
