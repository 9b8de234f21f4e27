//! Critical-point solvers for the discrete energy and the regularity-identity check.
//!
//! All three solvers work on the interior unknowns and share one metric: the
//! discrete α-norm Gram matrix `M = D_intᵀ W D_int`. Search directions are
//! `−M⁻¹∇E` (the gradient in the solution-space metric), which keeps the step
//! sizes independent of the mesh.

mod direct;
mod mountain_pass;
mod multiplicity;
mod regularity;

use nalgebra::{Cholesky, DVector, Dyn};
use serde::Serialize;

pub use direct::minimize_direct;
pub use mountain_pass::{mountain_pass, MountainPassReport};
pub use multiplicity::{multiplicity_search, MultiplicityReport, SolutionPair};
pub use regularity::{regularity_check, RegularityReport};

use crate::energy::ProblemState;
use crate::error::{invalid, Result};
use crate::grid::GridFunction;
use crate::nonlinearity::{validate_hypotheses, Regime};

/// Armijo sufficient-decrease constant.
pub const ARMIJO_C1: f64 = 1e-4;
/// Backtracking factor.
pub const ARMIJO_SHRINK: f64 = 0.5;
/// Smallest step before a line search gives up.
const MIN_STEP: f64 = 1e-20;
/// Samples used by the solver entry gates.
const GATE_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Direct,
    MountainPass,
    Multiplicity,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub solution: GridFunction,
    #[serde(serialize_with = "crate::numfmt::f64_or_sentinel")]
    pub energy_value: f64,
    #[serde(serialize_with = "crate::numfmt::f64_or_sentinel")]
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub method: Method,
    pub seed: u64,
    pub eps_reg_used: f64,
    /// `sup_norm(solution) ≤ 1e-10`.
    pub trivial: bool,
    /// Energy after every accepted iterate, starting with the initial value.
    #[serde(skip)]
    pub energy_history: Vec<f64>,
}

impl SolveReport {
    pub(crate) fn new(st: &ProblemState, x: &[f64], energy: f64, residual: f64, iterations: usize, converged: bool, method: Method) -> Self {
        let solution = GridFunction::from_interior(x);
        Self {
            trivial: crate::grid::sup_norm(&solution) <= 1e-10,
            solution,
            energy_value: energy,
            residual,
            iterations,
            converged,
            method,
            seed: 0,
            eps_reg_used: st.eps_reg,
            energy_history: Vec::new(),
        }
    }
}

/// Cholesky factor of the α-norm Gram matrix on the interior.
pub(crate) struct Metric {
    chol: Cholesky<f64, Dyn>,
}

impl Metric {
    pub(crate) fn new(st: &ProblemState) -> Result<Self> {
        let n = st.grid.n;
        let d = st.ops.left_deriv.view((0, 1), (n + 1, n - 1));
        let mut wd = d.clone_owned();
        for (i, w) in st.ops.norm_weights.iter().enumerate() {
            wd.row_mut(i).scale_mut(*w);
        }
        let gram = d.transpose() * wd;
        let chol = Cholesky::new(gram).ok_or_else(|| invalid("α-norm Gram matrix is not positive definite"))?;
        Ok(Self { chol })
    }

    pub(crate) fn solve(&self, g: &[f64]) -> Vec<f64> {
        self.chol.solve(&DVector::from_column_slice(g)).data.into()
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn axpy(x: &[f64], a: f64, d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(xi, di)| xi + a * di).collect()
}

/// Energy with out-of-range evaluations mapped to `+∞` (rejected by line searches).
pub(crate) fn energy_or_inf(st: &ProblemState, x: &[f64]) -> f64 {
    st.energy_x(x).unwrap_or(f64::INFINITY)
}

/// Backtracking Armijo search along `d` from `x`; returns the step and new energy.
pub(crate) fn armijo(st: &ProblemState, x: &[f64], e0: f64, slope: f64, d: &[f64]) -> Option<(f64, f64)> {
    let mut a = 1.0;
    while a >= MIN_STEP {
        let e = energy_or_inf(st, &axpy(x, a, d));
        if e <= e0 + ARMIJO_C1 * a * slope {
            return Some((a, e));
        }
        a *= ARMIJO_SHRINK;
    }
    None
}

/// Golden-section maximization of `f` on `[lo, hi]`.
pub(crate) fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - r * (hi - lo);
    let mut d = lo + r * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - r * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + r * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}

/// `sin(kπt/T)` on the interior nodes.
pub(crate) fn sine_mode(st: &ProblemState, k: usize) -> Vec<f64> {
    let t_end = st.grid.t_end;
    st.nodes()[1..st.grid.n]
        .iter()
        .map(|t| (k as f64 * std::f64::consts::PI * t / t_end).sin())
        .collect()
}

/// Rescales `x` to unit α-norm.
pub(crate) fn normalize(st: &ProblemState, x: &[f64]) -> Vec<f64> {
    let u = GridFunction::from_interior(x);
    let nrm = crate::fracops::alpha_norm(&st.ops, &u, st.p()).unwrap_or(1.0);
    x.iter().map(|v| v / nrm).collect()
}

pub(crate) fn require(st: &ProblemState, regime: Regime, ids: &[&str], what: &str) -> Result<()> {
    let rep = validate_hypotheses(&st.spec, &st.params, regime, GATE_SAMPLES, 0);
    for id in ids {
        match rep.get(id) {
            Some(r) if r.holds => {}
            Some(r) => {
                return Err(invalid(format!(
                    "{what} requires ({id}); worst margin {:.3e}",
                    r.worst_margin
                )))
            }
            None => return Err(invalid(format!("{what}: hypothesis {id} not evaluated"))),
        }
    }
    Ok(())
}

pub(crate) fn check_init(st: &ProblemState, u: &GridFunction) -> Result<()> {
    u.check_len(&st.grid)?;
    if !u.dirichlet {
        return Err(invalid("initial guess must be a dirichlet grid function"));
    }
    Ok(())
}
