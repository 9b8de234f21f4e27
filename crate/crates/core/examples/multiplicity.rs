//! Computes several distinct pairs of solutions with deflation.

use fracplap::energy::{ProblemState, DEFAULT_EPS_REG};
use fracplap::nonlinearity::{Coefficient, NonlinearitySpec};
use fracplap::solvers::multiplicity_search;
use fracplap::{make_grid, FracParams};

fn main() -> fracplap::Result<()> {
    let st = ProblemState::new(
        FracParams::new(0.6, 2.0, 1.0)?,
        make_grid(1.0, 256)?,
        NonlinearitySpec::sublinear(1.5, Coefficient::constant(1.0)),
        DEFAULT_EPS_REG,
    )?;
    let m = multiplicity_search(&st, 3, 1e-6, 42)?;
    println!("{} of {} pairs converged", m.converged_count, m.requested);
    for (i, pair) in m.pairs.iter().enumerate() {
        println!("pair {i}: E = {:.6e}, residual {:.2e}", pair.positive.energy_value, pair.positive.residual);
    }
    for row in &m.pairwise_distances {
        println!("{}", row.iter().map(|d| format!("{d:8.4}")).collect::<String>());
    }
    Ok(())
}
