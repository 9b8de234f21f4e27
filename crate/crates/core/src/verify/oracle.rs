//! Reference fractional integral by product integration on piecewise-linear
//! interpolants (second order for smooth data), independent of the GL weights.

use nalgebra::DMatrix;

use crate::fracops::rgamma;
use crate::grid::Grid;

/// Matrix of `_0I_t^γ` applied to the piecewise-linear interpolant of nodal data.
pub fn product_integration_matrix(gamma_exp: f64, grid: &Grid) -> DMatrix<f64> {
    let n = grid.n;
    let g1 = gamma_exp + 1.0;
    let scale = grid.h.powf(gamma_exp) * rgamma(gamma_exp + 2.0);
    let mut a = DMatrix::zeros(n + 1, n + 1);
    for i in 1..=n {
        let fi = i as f64;
        a[(i, 0)] = scale * ((fi - 1.0).powf(g1) - (fi - g1) * fi.powf(gamma_exp));
        for j in 1..i {
            let k = (i - j) as f64;
            a[(i, j)] = scale * ((k + 1.0).powf(g1) - 2.0 * k.powf(g1) + (k - 1.0).powf(g1));
        }
        a[(i, i)] = scale;
    }
    a
}
