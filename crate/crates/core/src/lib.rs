//! Numerical toolkit for the mixed fractional p-Laplacian Dirichlet problem
//!
//! ```text
//!   _tD_T^α( |_0D_t^α u|^{p-2} _0D_t^α u ) = f(t, u),   u(0) = u(T) = 0
//! ```
//!
//! on a uniform grid over `[0, T]`. The crate provides discrete Riemann–Liouville
//! and Caputo operators, the energy functional with its exact discrete gradient,
//! three critical-point solvers (direct minimization, mountain pass, deflated
//! multiplicity search), a regularity-identity check, and a verification engine
//! that measures every quantitative identity and inequality of the theory.

pub mod cli;
pub mod energy;
pub mod error;
pub mod fracops;
pub mod grid;
pub mod nonlinearity;
pub mod solvers;
pub mod verify;

mod numfmt;

pub use error::{Error, Result};
pub use fracops::{alpha_norm, apply, build_operators, gamma, OpKind, OperatorSet};
pub use grid::{lp_norm, make_grid, sup_norm, FracParams, Grid, GridFunction};
