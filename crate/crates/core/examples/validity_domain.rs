//! Computes the validity domains of the braking property under perfect and
//! always-wrong perception and draws them as an ASCII map.
//!
//! `#` violated even with perfect perception, `?` region of uncertainty,
//! `.` satisfied either way.

use rou_falsify::cps::MlMode;
use rou_falsify::falsifier::{region_of_uncertainty, validity_domain};
use rou_falsify::scenario::Scenario;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut s = Scenario::aebs_default();
    s.resolution = vec![20, 30];
    let (phi, grid, scene) = (s.formula()?, s.grid()?, s.default_scene());

    let plus = validity_domain(&s.model(MlMode::Perfect), &phi, &grid, &scene)?;
    let minus = validity_domain(&s.model(MlMode::AlwaysWrong), &phi, &grid, &scene)?;
    let rou = region_of_uncertainty(&plus, &minus)?;

    let (nv, nd) = (grid.resolution[0], grid.resolution[1]);
    println!("d0 (m) ->  0{:>width$}", "60", width = nd - 1);
    for i in (0..nv).rev() {
        let row: String = (0..nd)
            .map(|j| {
                let k = grid.index(&[i, j]);
                if !plus.status[k] {
                    '#'
                } else if rou.contains(k) {
                    '?'
                } else {
                    '.'
                }
            })
            .collect();
        println!("v0 {:5.2} {row}", grid.center(grid.index(&[i, 0]))[0]);
    }
    println!(
        "\n{} cells violated with perfect perception, {} in the region of uncertainty (d0 from {:.1} m)",
        plus.unsat_cells().count(),
        rou.cells.len(),
        rou.hull(1).0
    );
    Ok(())
}
