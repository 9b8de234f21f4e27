use nalgebra::DMatrix;
use serde::Serialize;

use crate::energy::ProblemState;
use crate::error::{invalid, Result};
use crate::fracops::{cell_integral_matrix, left_integral_matrix, OperatorSet};
use crate::grid::GridFunction;
use crate::nonlinearity::eval;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityReport {
    /// Mean of `g` over the interior nodes.
    pub constant_estimate: f64,
    /// `max |g − mean|`.
    pub deviation: f64,
    /// `1e-2·|constant_estimate| + 1e-6`.
    pub tolerance: f64,
    pub certified: bool,
    /// Deviation when the flux transform uses the unweighted GL right integral.
    pub deviation_gl_right: f64,
    /// Deviation of the left-sided form `_0I_t^{1−α}ψ + ∫₀ᵗ f`.
    pub deviation_left_form: f64,
}

/// Checks that `g(t) = _tI_T^{1−α} ψ(t) + ∫₀ᵗ f(s, u(s)) ds` is constant, where
/// `ψ = φ(D^α u)`.
///
/// The right-sided transform integrates the quadrature-weighted flux against
/// the exact kernel cellwise, matching the factorization of the discrete
/// derivative; `∫₀ᵗ f` uses the trapezoid rule.
pub fn regularity_check(st: &ProblemState, u: &GridFunction) -> Result<RegularityReport> {
    let alpha = st.params.alpha;
    let p = st.p();
    if alpha >= 1.0 / p {
        return Err(invalid(format!("regularity_check needs alpha < 1/p, got alpha = {alpha}, p = {p}")));
    }
    u.check_len(&st.grid)?;
    if !u.dirichlet {
        return Err(invalid("regularity_check needs a dirichlet grid function"));
    }
    let n = st.grid.n;
    let h = st.grid.h;
    let psi: Vec<f64> = st.ops.deriv(&u.values).iter().map(|s| st.phi(*s)).collect();
    let weighted: Vec<f64> = psi.iter().zip(&st.ops.norm_weights).map(|(a, w)| a * w / h).collect();

    let mut cum = vec![0.0; n + 1];
    let f: Vec<f64> = (0..=n)
        .map(|i| eval(&st.spec, st.nodes()[i], u.values[i]).map(|v| v.0))
        .collect::<Result<_>>()?;
    for i in 1..=n {
        cum[i] = cum[i - 1] + 0.5 * h * (f[i - 1] + f[i]);
    }

    let k = cell_integral_matrix(1.0 - alpha, &st.grid);
    let (c, dev) = spread(&OperatorSet::mul_t(&k, &weighted), &cum, n);
    let j: DMatrix<f64> = left_integral_matrix(1.0 - alpha, &st.grid);
    let (_, dev_gl) = spread(&OperatorSet::mul_t(&j, &psi), &cum, n);
    let (_, dev_left) = spread(&OperatorSet::mul(&j, &psi), &cum, n);
    let tolerance = 1e-2 * c.abs() + 1e-6;
    Ok(RegularityReport {
        constant_estimate: c,
        deviation: dev,
        tolerance,
        certified: dev <= tolerance,
        deviation_gl_right: dev_gl,
        deviation_left_form: dev_left,
    })
}

/// Mean and max deviation of `z + c` over the interior nodes.
fn spread(z: &[f64], c: &[f64], n: usize) -> (f64, f64) {
    let g: Vec<f64> = (1..n).map(|i| z[i] + c[i]).collect();
    let mean = g.iter().sum::<f64>() / g.len() as f64;
    let dev = g.iter().fold(0.0f64, |m, v| m.max((v - mean).abs()));
    (mean, dev)
}
