//! Checks that the flux identity of a computed minimizer is constant,
//! at two resolutions.

use fracplap::energy::{ProblemState, DEFAULT_EPS_REG};
use fracplap::nonlinearity::{Coefficient, NonlinearitySpec};
use fracplap::solvers::{minimize_direct, regularity_check};
use fracplap::{make_grid, FracParams, GridFunction};

fn main() -> fracplap::Result<()> {
    for n in [256, 512] {
        let st = ProblemState::new(
            FracParams::new(0.3, 2.0, 1.0)?,
            make_grid(1.0, n)?,
            NonlinearitySpec::sublinear(1.5, Coefficient::constant(1.0)),
            DEFAULT_EPS_REG,
        )?;
        let init = GridFunction::dirichlet_clamped(st.grid.sample(|t| 0.1 * (std::f64::consts::PI * t).sin()));
        let u = minimize_direct(&st, &init, 1e-10, 10_000)?.solution;
        let r = regularity_check(&st, &u)?;
        println!(
            "n = {n}: constant {:.6}, deviation {:.3e} (tolerance {:.3e}, certified {})",
            r.constant_estimate, r.deviation, r.tolerance, r.certified
        );
        println!("  unweighted right integral {:.3e}, left-sided form {:.3e}", r.deviation_gl_right, r.deviation_left_form);
    }
    Ok(())
}
