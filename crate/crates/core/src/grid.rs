//! Uniform grids on `[0, T]`, nodal grid functions and discrete norms.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Largest supported number of subintervals (operators are stored densely).
pub const MAX_N: usize = 8192;

/// Problem constants α, p, T and the conjugate exponent of p.
///
/// α is accepted on `(0, 1]`; the endpoint α = 1 is the classical limit in
/// which every operator degenerates to its first-order counterpart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FracParams {
    pub alpha: f64,
    pub p: f64,
    #[serde(rename = "T")]
    pub t_end: f64,
    pub q_conj: f64,
}

impl FracParams {
    pub fn new(alpha: f64, p: f64, t_end: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(invalid(format!("alpha = {alpha} out of (0,1]")));
        }
        if !(p > 1.0) || !p.is_finite() {
            return Err(invalid(format!("p = {p} must exceed 1")));
        }
        if !(t_end > 0.0) || !t_end.is_finite() {
            return Err(invalid(format!("T = {t_end} must be positive")));
        }
        Ok(Self {
            alpha,
            p,
            t_end,
            q_conj: p / (p - 1.0),
        })
    }

    /// Critical exponent p/(1 − αp) when αp < 1, otherwise `None` (no upper limit).
    pub fn critical_exponent(&self) -> Option<f64> {
        let ap = self.alpha * self.p;
        (ap < 1.0).then(|| self.p / (1.0 - ap))
    }
}

/// Uniform partition of `[0, T]` into `n` cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub n: usize,
    pub h: f64,
    #[serde(rename = "T")]
    pub t_end: f64,
}

impl Grid {
    /// Node `t_i = i·h`; the last node is pinned to `T` exactly.
    pub fn node(&self, i: usize) -> f64 {
        if i == self.n {
            self.t_end
        } else {
            i as f64 * self.h
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n).map(|i| self.node(i)).collect()
    }

    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Trapezoid weights `h/2, h, …, h, h/2`.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let mut w = vec![self.h; self.n + 1];
        w[0] = 0.5 * self.h;
        w[self.n] = 0.5 * self.h;
        w
    }

    /// Samples `g` at every node.
    pub fn sample(&self, g: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..=self.n).map(|i| g(self.node(i))).collect()
    }
}

pub fn make_grid(t_end: f64, n: usize) -> Result<Grid> {
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(invalid(format!("T = {t_end} must be positive")));
    }
    if n < 2 {
        return Err(invalid(format!("n = {n} must be at least 2")));
    }
    if n > MAX_N {
        return Err(invalid(format!("n = {n} exceeds the cap {MAX_N}")));
    }
    Ok(Grid {
        n,
        h: t_end / n as f64,
        t_end,
    })
}

/// Nodal values on a grid, optionally flagged as satisfying `u(0) = u(T) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    #[serde(serialize_with = "crate::numfmt::vec_f64_or_sentinel")]
    pub values: Vec<f64>,
    pub dirichlet: bool,
}

impl GridFunction {
    /// Unconstrained grid function.
    pub fn free(values: Vec<f64>) -> Self {
        Self {
            values,
            dirichlet: false,
        }
    }

    /// Dirichlet grid function; both end values must already be exactly zero.
    pub fn dirichlet(values: Vec<f64>) -> Result<Self> {
        match (values.first(), values.last()) {
            (Some(&a), Some(&b)) if a == 0.0 && b == 0.0 => Ok(Self {
                values,
                dirichlet: true,
            }),
            _ => Err(invalid("dirichlet grid function needs zero end values")),
        }
    }

    /// Dirichlet grid function from arbitrary values, forcing the ends to zero.
    pub fn dirichlet_clamped(mut values: Vec<f64>) -> Self {
        if let Some(v) = values.first_mut() {
            *v = 0.0;
        }
        if let Some(v) = values.last_mut() {
            *v = 0.0;
        }
        Self {
            values,
            dirichlet: true,
        }
    }

    /// Dirichlet function from interior values `u_1, …, u_{n−1}`.
    pub fn from_interior(x: &[f64]) -> Self {
        let mut values = Vec::with_capacity(x.len() + 2);
        values.push(0.0);
        values.extend_from_slice(x);
        values.push(0.0);
        Self {
            values,
            dirichlet: true,
        }
    }

    pub fn interior(&self) -> &[f64] {
        let m = self.values.len();
        &self.values[1..m - 1]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| c * v).collect(),
            dirichlet: self.dirichlet,
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            values: self.values.iter().map(|v| -v).collect(),
            dirichlet: self.dirichlet,
        }
    }

    pub(crate) fn check_len(&self, grid: &Grid) -> Result<()> {
        if self.values.len() != grid.n + 1 {
            return Err(invalid(format!(
                "grid function has {} values, grid has {} nodes",
                self.values.len(),
                grid.n + 1
            )));
        }
        Ok(())
    }
}

/// Weighted `(Σ w_i |v_i|^p)^{1/p}`.
pub(crate) fn weighted_lp(v: &[f64], w: &[f64], p: f64) -> f64 {
    let s: f64 = v.iter().zip(w).map(|(x, wi)| wi * x.abs().powf(p)).sum();
    s.powf(1.0 / p)
}

/// Trapezoid-rule Lᵖ norm.
pub fn lp_norm(u: &GridFunction, p: f64, grid: &Grid) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(invalid(format!("p = {p} below 1")));
    }
    u.check_len(grid)?;
    Ok(weighted_lp(&u.values, &grid.trapezoid_weights(), p))
}

pub fn sup_norm(u: &GridFunction) -> f64 {
    u.values.iter().fold(0.0, |m, v| m.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn grid_nodes() {
        let g = make_grid(1.0, 4).unwrap();
        assert_eq!(g.nodes(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(make_grid(2.0, 2).unwrap().h, 1.0);
        assert!(make_grid(1.0, 1).is_err());
        assert!(make_grid(0.0, 8).is_err());
        assert!(make_grid(-1.0, 8).is_err());
    }

    #[test]
    fn last_node_is_t() {
        let g = make_grid(0.7, 3).unwrap();
        assert_eq!(g.node(3), 0.7);
        assert_relative_eq!(g.h * g.n as f64, 0.7, max_relative = 1e-15);
    }

    #[test]
    fn params_validation() {
        let p = FracParams::new(0.5, 3.0, 1.0).unwrap();
        assert_relative_eq!(1.0 / p.p + 1.0 / p.q_conj, 1.0, epsilon = 1e-15);
        assert!(FracParams::new(0.0, 2.0, 1.0).is_err());
        assert!(FracParams::new(1.2, 2.0, 1.0).is_err());
        assert!(FracParams::new(0.5, 1.0, 1.0).is_err());
        assert!(FracParams::new(0.5, 2.0, 0.0).is_err());
        assert!(FracParams::new(1.0, 2.0, 1.0).is_ok());
        assert_eq!(FracParams::new(0.3, 2.0, 1.0).unwrap().critical_exponent(), Some(5.0));
        assert_eq!(FracParams::new(0.6, 2.0, 1.0).unwrap().critical_exponent(), None);
    }

    #[test]
    fn norms_examples() {
        let g = make_grid(1.0, 1024).unwrap();
        let zero = GridFunction::free(vec![0.0; 1025]);
        assert_eq!(lp_norm(&zero, 2.0, &g).unwrap(), 0.0);
        let one = GridFunction::free(vec![1.0; 1025]);
        for p in [1.0, 1.5, 2.0, 7.0] {
            assert_relative_eq!(lp_norm(&one, p, &g).unwrap(), 1.0, max_relative = 1e-13);
        }
        let t = GridFunction::free(g.nodes());
        assert!((lp_norm(&t, 2.0, &g).unwrap() - 1.0 / 3f64.sqrt()).abs() < 1e-4);
        assert!(lp_norm(&t, 0.5, &g).is_err());

        let g8 = make_grid(1.0, 8).unwrap();
        let s = GridFunction::free(g8.sample(|t| (PI * t).sin()));
        assert_relative_eq!(sup_norm(&s), 1.0, max_relative = 1e-15);
        let l = GridFunction::free(g8.sample(|t| t - 0.5));
        assert_eq!(sup_norm(&l), 0.5);
        assert_eq!(sup_norm(&GridFunction::free(vec![0.0; 9])), 0.0);
    }

    #[test]
    fn trapezoid_is_second_order() {
        let f = |t: f64| (3.0 * t).exp();
        let exact = (((6.0f64).exp() - 1.0) / 6.0).sqrt();
        let err = |n: usize| {
            let g = make_grid(1.0, n).unwrap();
            (lp_norm(&GridFunction::free(g.sample(f)), 2.0, &g).unwrap() - exact).abs()
        };
        let ratio = err(128) / err(64);
        assert!((ratio - 0.25).abs() < 0.01, "ratio {ratio}");
    }

    #[test]
    fn dirichlet_constructors() {
        assert!(GridFunction::dirichlet(vec![0.0, 1.0, 0.0]).is_ok());
        assert!(GridFunction::dirichlet(vec![1e-300, 1.0, 0.0]).is_err());
        let u = GridFunction::dirichlet_clamped(vec![3.0, 1.0, 2.0]);
        assert_eq!(u.values, vec![0.0, 1.0, 0.0]);
        assert_eq!(GridFunction::from_interior(&[1.0, 2.0]).values, vec![0.0, 1.0, 2.0, 0.0]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn vals() -> impl Strategy<Value = Vec<f64>> {
            prop::collection::vec(-10.0f64..10.0, 33)
        }

        proptest! {
            #[test]
            fn homogeneity(u in vals(), lam in -5.0f64..5.0, p in 1.0f64..6.0) {
                let g = make_grid(1.0, 32).unwrap();
                let a = lp_norm(&GridFunction::free(u.clone()), p, &g).unwrap();
                let b = lp_norm(&GridFunction::free(u.iter().map(|x| lam * x).collect()), p, &g).unwrap();
                prop_assert!((lam.abs() * a - b).abs() <= 1e-12 * (1.0 + b));
            }

            #[test]
            fn triangle(u in vals(), v in vals(), p in 1.0f64..6.0) {
                let g = make_grid(2.0, 32).unwrap();
                let n = |x: Vec<f64>| lp_norm(&GridFunction::free(x), p, &g).unwrap();
                let s: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
                prop_assert!(n(s) <= n(u) + n(v) + 1e-12);
            }

            #[test]
            fn interpolation_bound(u in vals(), p in 1.0f64..4.0, dq in 0.0f64..6.0) {
                let g = make_grid(1.0, 32).unwrap();
                let f = GridFunction::dirichlet_clamped(u);
                let q = p + dq;
                let lq = lp_norm(&f, q, &g).unwrap().powf(q);
                let lp = lp_norm(&f, p, &g).unwrap().powf(p);
                prop_assert!(lq <= sup_norm(&f).powf(q - p) * lp * (1.0 + 1e-10) + 1e-300);
            }
        }
    }
}
