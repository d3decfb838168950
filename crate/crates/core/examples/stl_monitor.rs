//! Monitors a few properties on a hand-built braking trace and prints both
//! the robustness and the boolean verdict.

use rou_falsify::stl::{eval_qualitative, eval_robustness, robustness_signal, Formula};
use rou_falsify::trace::{Interp, Signal, TimeGrid, Trace};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = TimeGrid::new(0.0, 0.5, 9)?;
    let dist = vec![20.0, 16.0, 12.5, 9.5, 7.0, 5.0, 3.5, 2.5, 2.0];
    let v = vec![8.0, 7.5, 6.5, 5.5, 4.5, 3.5, 2.5, 1.5, 0.5];
    let trace = Trace::new(
        grid,
        vec![Signal::new("dist", grid, dist, Interp::Linear)?, Signal::new("v_s", grid, v, Interp::Linear)?],
    )?;

    for text in [
        "G(dist > 0)",
        "G(dist > 3)",
        "F[0,2](v_s < 5)",
        "(dist > 5) U[0,4] (v_s <= 1)",
        "G[0,2](dist - 2 * v_s >= 0)",
    ] {
        let phi: Formula = text.parse()?;
        let rho = eval_robustness(&phi, &trace, 0.0)?;
        let sat = eval_qualitative(&phi, &trace, 0.0)?;
        println!("{text:32} rho = {rho:8.3}  {}", if sat { "sat" } else { "unsat" });
    }

    // Bounded operators need look-ahead, so the signal is shorter than the trace.
    let phi: Formula = "G[0,1](dist > 4)".parse()?;
    let rho = robustness_signal(&phi, &trace)?;
    println!("\n{phi} over time ({} of {} points defined):", rho.len(), trace.grid().n_steps());
    for (k, r) in rho.iter().enumerate() {
        println!("  t = {:.1}  rho = {r:6.2}", trace.grid().time(k));
    }
    Ok(())
}
