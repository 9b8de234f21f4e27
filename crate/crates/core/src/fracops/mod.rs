//! Discrete Riemann–Liouville and Caputo operators on a uniform grid.
//!
//! * Left integral `_0I_t^α`: Grünwald–Letnikov weights of order −α, scaled by `h^α`.
//! * Left derivative `_0D_t^α`: exact RL derivative of the piecewise-linear
//!   interpolant (the L1 construction). Reproduces constants and `t` exactly.
//! * Right operators are reflections `J·L·J` of the left ones. On the interior
//!   block they coincide with the transposes, so summation by parts is exact
//!   for Dirichlet grid functions.

mod gamma;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub use gamma::{gamma, rgamma};

use crate::error::{invalid, Result};
use crate::grid::{weighted_lp, FracParams, Grid, GridFunction};

/// Operator selector for [`apply`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
#[clap(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum OpKind {
    LeftInt,
    RightInt,
    LeftDeriv,
    RightDeriv,
    CaputoLeft,
    CaputoRight,
}

impl OpKind {
    pub const ALL: [OpKind; 6] = [
        OpKind::LeftInt,
        OpKind::RightInt,
        OpKind::LeftDeriv,
        OpKind::RightDeriv,
        OpKind::CaputoLeft,
        OpKind::CaputoRight,
    ];
}

/// Dense operator matrices for one (α, grid) pair.
#[derive(Debug, Clone)]
pub struct OperatorSet {
    pub alpha: f64,
    pub grid: Grid,
    pub left_deriv: DMatrix<f64>,
    pub right_deriv: DMatrix<f64>,
    pub left_int: DMatrix<f64>,
    pub right_int: DMatrix<f64>,
    /// Quadrature weights applied to derivative samples in the α-norm.
    pub norm_weights: Vec<f64>,
}

/// Grünwald–Letnikov weights `w_k = (−1)^k C(order, k)` for `k < len`.
pub fn gl_weights(order: f64, len: usize) -> Vec<f64> {
    let mut w = Vec::with_capacity(len);
    if len == 0 {
        return w;
    }
    w.push(1.0);
    for k in 1..len {
        let prev = w[k - 1];
        w.push(prev * ((k as f64 - 1.0 - order) / k as f64));
    }
    w
}

/// Kernel increments `b_k = (k+1)^γ − k^γ`, with `b_0 = 1`.
pub fn kernel_increments(gamma_exp: f64, len: usize) -> Vec<f64> {
    (0..len)
        .map(|k| {
            if k == 0 {
                1.0
            } else {
                let k = k as f64;
                (k + 1.0).powf(gamma_exp) - k.powf(gamma_exp)
            }
        })
        .collect()
}

fn lower_toeplitz(coeffs: &[f64], scale: f64) -> DMatrix<f64> {
    let m = coeffs.len();
    DMatrix::from_fn(m, m, |i, j| if j <= i { scale * coeffs[i - j] } else { 0.0 })
}

fn reflect(a: &DMatrix<f64>) -> DMatrix<f64> {
    let m = a.nrows();
    DMatrix::from_fn(m, m, |i, j| a[(m - 1 - i, m - 1 - j)])
}

/// Left RL derivative matrix of order α ∈ (0, 1].
///
/// Row 0 holds the cell average `h^{-α}/Γ(2−α)` of the singular boundary term.
pub fn left_derivative_matrix(alpha: f64, grid: &Grid) -> DMatrix<f64> {
    let n = grid.n;
    let h = grid.h;
    let c = h.powf(-alpha) * rgamma(2.0 - alpha);
    let b = kernel_increments(1.0 - alpha, n + 1);
    let mut a = vec![1.0; n + 1];
    for k in 1..=n {
        a[k] = b[k] - b[k - 1];
    }
    let mut d = DMatrix::zeros(n + 1, n + 1);
    d[(0, 0)] = c;
    let r1 = rgamma(1.0 - alpha);
    for i in 1..=n {
        for j in 1..=i {
            d[(i, j)] = c * a[i - j];
        }
        d[(i, 0)] = grid.node(i).powf(-alpha) * r1 - c * b[i - 1];
    }
    d
}

/// Left GL fractional integral matrix of order `order > 0`.
pub fn left_integral_matrix(order: f64, grid: &Grid) -> DMatrix<f64> {
    lower_toeplitz(&gl_weights(-order, grid.n + 1), grid.h.powf(order))
}

/// Fractional integral of order `order` of the piecewise-constant function equal
/// to `y_j` on `(t_{j−1}, t_j]`, sampled at the nodes. Column 0 is unused.
pub fn cell_integral_matrix(order: f64, grid: &Grid) -> DMatrix<f64> {
    let n = grid.n;
    let b = kernel_increments(order, n + 1);
    let s = grid.h.powf(order) * rgamma(1.0 + order);
    DMatrix::from_fn(n + 1, n + 1, |i, j| {
        if j >= 1 && j <= i {
            s * b[i - j]
        } else {
            0.0
        }
    })
}

/// Derivative-sample weights `h/2, h, …, h, (1+α)h/2`.
///
/// At α = 1 the last entry makes the rule exact for cellwise constants.
pub fn norm_weights(alpha: f64, grid: &Grid) -> Vec<f64> {
    let mut w = grid.trapezoid_weights();
    w[grid.n] = 0.5 * (1.0 + alpha) * grid.h;
    w
}

pub fn build_operators(params: &FracParams, grid: &Grid) -> OperatorSet {
    let alpha = params.alpha;
    let left_deriv = left_derivative_matrix(alpha, grid);
    let left_int = left_integral_matrix(alpha, grid);
    OperatorSet {
        alpha,
        grid: *grid,
        right_deriv: reflect(&left_deriv),
        right_int: left_int.transpose(),
        left_deriv,
        left_int,
        norm_weights: norm_weights(alpha, grid),
    }
}

impl OperatorSet {
    pub(crate) fn mul(m: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
        let x = DVector::from_column_slice(v);
        (m * x).data.into()
    }

    pub(crate) fn mul_t(m: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
        let x = DVector::from_column_slice(v);
        m.tr_mul(&x).data.into()
    }

    /// `D u` as a plain vector.
    pub fn deriv(&self, u: &[f64]) -> Vec<f64> {
        Self::mul(&self.left_deriv, u)
    }

    /// `Dᵀ y`, the adjoint used by the gradient.
    pub fn deriv_adjoint(&self, y: &[f64]) -> Vec<f64> {
        Self::mul_t(&self.left_deriv, y)
    }
}

pub fn apply(ops: &OperatorSet, kind: OpKind, u: &GridFunction) -> Result<GridFunction> {
    u.check_len(&ops.grid)?;
    let g = &ops.grid;
    let n = g.n;
    let r1 = rgamma(1.0 - ops.alpha);
    let values = match kind {
        OpKind::LeftInt => OperatorSet::mul(&ops.left_int, &u.values),
        OpKind::RightInt => OperatorSet::mul(&ops.right_int, &u.values),
        OpKind::LeftDeriv => OperatorSet::mul(&ops.left_deriv, &u.values),
        OpKind::RightDeriv => OperatorSet::mul(&ops.right_deriv, &u.values),
        OpKind::CaputoLeft => {
            let mut v = OperatorSet::mul(&ops.left_deriv, &u.values);
            let u0 = u.values[0];
            for (i, vi) in v.iter_mut().enumerate().skip(1) {
                *vi -= u0 * g.node(i).powf(-ops.alpha) * r1;
            }
            v
        }
        OpKind::CaputoRight => {
            let mut v = OperatorSet::mul(&ops.right_deriv, &u.values);
            let un = u.values[n];
            for (i, vi) in v.iter_mut().enumerate().take(n) {
                *vi -= un * (g.t_end - g.node(i)).powf(-ops.alpha) * r1;
            }
            v
        }
    };
    Ok(GridFunction::free(values))
}

/// The working norm `‖D^α u‖_{L^p}` of a Dirichlet grid function.
pub fn alpha_norm(ops: &OperatorSet, u: &GridFunction, p: f64) -> Result<f64> {
    u.check_len(&ops.grid)?;
    if !u.dirichlet {
        return Err(invalid("alpha_norm needs a dirichlet grid function"));
    }
    if !(p >= 1.0) {
        return Err(invalid(format!("p = {p} below 1")));
    }
    Ok(weighted_lp(&ops.deriv(&u.values), &ops.norm_weights, p))
}
