//! Evaluates the energy and its gradient and checks one directional
//! derivative against a central difference.

use fracplap::energy::{energy, gradient, ProblemState, DEFAULT_EPS_REG};
use fracplap::nonlinearity::{Coefficient, NonlinearitySpec};
use fracplap::{make_grid, FracParams, GridFunction};

fn main() -> fracplap::Result<()> {
    let st = ProblemState::new(
        FracParams::new(0.6, 2.5, 1.0)?,
        make_grid(1.0, 128)?,
        NonlinearitySpec::sublinear(1.5, Coefficient::constant(1.0)),
        DEFAULT_EPS_REG,
    )?;
    let u = GridFunction::dirichlet_clamped(st.grid.sample(|t| (std::f64::consts::PI * t).sin()));
    let v = GridFunction::dirichlet_clamped(st.grid.sample(|t| t * (1.0 - t) * (3.0 * t).cos()));

    let g = gradient(&st, &u)?;
    // the gradient is the Riesz vector for the pairing Σ h g_i v_i
    let analytic: f64 = st.grid.h * g.values.iter().zip(&v.values).map(|(a, b)| a * b).sum::<f64>();

    let h = 1e-6;
    let shifted = |s: f64| {
        GridFunction::dirichlet_clamped(u.values.iter().zip(&v.values).map(|(a, b)| a + s * b).collect())
    };
    let fd = (energy(&st, &shifted(h))? - energy(&st, &shifted(-h))?) / (2.0 * h);

    println!("E(u) = {:.10}", energy(&st, &u)?);
    println!("<E'(u), v> = {analytic:.10}, central difference {fd:.10}");
    println!("relative error {:.3e}", (analytic - fd).abs() / fd.abs().max(1e-14));
    Ok(())
}
