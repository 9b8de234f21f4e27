//! Runs the property suite for one parameter pair and prints a summary table.

use fracplap::verify::run_suite;
use fracplap::{make_grid, FracParams};

fn main() -> fracplap::Result<()> {
    let params = FracParams::new(0.75, 2.0, 1.0)?;
    let grid = make_grid(1.0, 256)?;
    for r in run_suite(&[params], &grid, 42) {
        let ratio = r.refinement_ratio.map_or("-".to_string(), |x| format!("{x:.3}"));
        println!(
            "{:<20} {:?} margin {:>11.3e} tol {:.0e} ratio {ratio}",
            format!("{:?}", r.property),
            r.status,
            r.worst_margin,
            r.tolerance_used
        );
    }
    Ok(())
}
