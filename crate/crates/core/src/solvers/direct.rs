use super::{armijo, check_init, dot, require, Method, Metric, SolveReport};
use crate::energy::ProblemState;
use crate::error::{invalid, Result};
use crate::grid::GridFunction;
use crate::nonlinearity::{Family, Regime};

/// Consecutive accepted steps without an energy decrease before descent stops.
const STALL_LIMIT: usize = 50;

/// Metric-preconditioned steepest descent with Armijo backtracking.
///
/// Accepts the sublinear families (checked against (f1)–(f2)) and pure
/// forcing terms; superlinear problems are rejected.
pub fn minimize_direct(st: &ProblemState, init: &GridFunction, tol: f64, max_iter: usize) -> Result<SolveReport> {
    match st.spec.family {
        Family::SuperlinearPower => {
            return Err(invalid("minimize_direct needs a sublinear nonlinearity"))
        }
        Family::SublinearPower | Family::Table => {
            require(st, Regime::Sublinear, &["F1", "F2"], "minimize_direct")?
        }
        Family::Source => {}
    }
    check_init(st, init)?;
    let metric = Metric::new(st)?;
    descend(st, &metric, init.interior().to_vec(), tol, max_iter)
}

pub(crate) fn descend(st: &ProblemState, metric: &Metric, mut x: Vec<f64>, tol: f64, max_iter: usize) -> Result<SolveReport> {
    let mut e = st.energy_x(&x)?;
    let mut history = vec![e];
    let mut iters = 0;
    let mut residual;
    let mut stalled = 0;
    loop {
        let g = st.partials_x(&x)?;
        residual = st.residual_from_partials(&g);
        if residual <= tol || iters >= max_iter {
            break;
        }
        let d: Vec<f64> = metric.solve(&g).iter().map(|v| -v).collect();
        let slope = dot(&g, &d);
        let Some((a, e_new)) = armijo(st, &x, e, slope, &d) else {
            break;
        };
        for (xi, di) in x.iter_mut().zip(&d) {
            *xi += a * di;
        }
        // at the rounding floor Armijo keeps accepting steps that change nothing
        stalled = if e_new < e { 0 } else { stalled + 1 };
        e = e_new;
        history.push(e);
        iters += 1;
        if stalled >= STALL_LIMIT {
            residual = st.residual_from_partials(&st.partials_x(&x)?);
            break;
        }
    }
    let mut rep = SolveReport::new(st, &x, e, residual, iters, residual <= tol, Method::Direct);
    rep.energy_history = history;
    Ok(rep)
}
