//! Minimizes a sublinear problem by preconditioned descent.

use fracplap::energy::{ProblemState, DEFAULT_EPS_REG};
use fracplap::nonlinearity::{Coefficient, NonlinearitySpec};
use fracplap::solvers::minimize_direct;
use fracplap::{make_grid, sup_norm, FracParams, GridFunction};

fn main() -> fracplap::Result<()> {
    let st = ProblemState::new(
        FracParams::new(0.6, 2.0, 1.0)?,
        make_grid(1.0, 256)?,
        NonlinearitySpec::sublinear(1.5, Coefficient::constant(1.0)),
        DEFAULT_EPS_REG,
    )?;
    let init = GridFunction::dirichlet_clamped(st.grid.sample(|t| 0.1 * (std::f64::consts::PI * t).sin()));
    let r = minimize_direct(&st, &init, 1e-6, 10_000)?;
    println!(
        "converged {} after {} iterations: E = {:.8}, residual {:.2e}, sup|u| = {:.6}",
        r.converged,
        r.iterations,
        r.energy_value,
        r.residual,
        sup_norm(&r.solution)
    );
    let history = &r.energy_history;
    println!("energy {:.6} -> {:.6}", history[0], history[history.len() - 1]);
    Ok(())
}
