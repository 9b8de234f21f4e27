//! Finds a nontrivial saddle of a superlinear problem.

use fracplap::energy::{ProblemState, DEFAULT_EPS_REG};
use fracplap::nonlinearity::NonlinearitySpec;
use fracplap::solvers::mountain_pass;
use fracplap::{make_grid, FracParams};

fn main() -> fracplap::Result<()> {
    let st = ProblemState::new(
        FracParams::new(0.7, 2.0, 1.0)?,
        make_grid(1.0, 128)?,
        NonlinearitySpec::superlinear(4.0),
        DEFAULT_EPS_REG,
    )?;
    let m = mountain_pass(&st, 21, 1e-5, 500, 42)?;
    println!("rim: E = {:.6} on the sphere of radius {:.4}", m.rim_value, m.rim_radius);
    println!("endpoint energy {:.4}", m.endpoint_energy);
    println!(
        "saddle: E = {:.6}, residual {:.2e}, converged {}, trivial {}",
        m.report.energy_value, m.report.residual, m.report.converged, m.report.trivial
    );
    Ok(())
}
