//! Energy functional, its exact discrete gradient, the weak residual and the
//! monotonicity gap of the p-Laplacian part.
//!
//! For a Dirichlet grid function `u` with `ψ = D u`:
//!
//! ```text
//!   E(u)        = Σ w_i Φ(ψ_i) − Σ ω_i F(t_i, u_i)
//!   ⟨E'(u), v⟩  = Σ w_i φ(ψ_i)(D v)_i − Σ ω_i f(t_i, u_i) v_i
//! ```
//!
//! with `w` the derivative-sample weights of the α-norm, `ω` the trapezoid
//! weights, `φ(s) = |s|^{p−2}s` and `Φ' = φ`.

use crate::error::{invalid, Result};
use crate::fracops::{build_operators, OperatorSet};
use crate::grid::{weighted_lp, FracParams, Grid, GridFunction};
use crate::nonlinearity::{eval, eval_du, NonlinearitySpec};

/// Default regularization of `φ` for `p < 2`.
pub const DEFAULT_EPS_REG: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct ProblemState {
    pub params: FracParams,
    pub grid: Grid,
    pub ops: OperatorSet,
    pub spec: NonlinearitySpec,
    /// Zero whenever `p ≥ 2`.
    pub eps_reg: f64,
    nodes: Vec<f64>,
    quad: Vec<f64>,
    basis_norms: Vec<f64>,
}

impl ProblemState {
    pub fn new(params: FracParams, grid: Grid, spec: NonlinearitySpec, eps_reg: f64) -> Result<Self> {
        if (params.t_end - grid.t_end).abs() > 1e-12 * params.t_end {
            return Err(invalid("grid and params disagree on T"));
        }
        if !(eps_reg >= 0.0) || !eps_reg.is_finite() {
            return Err(invalid(format!("eps_reg = {eps_reg} must be a non-negative number")));
        }
        spec.check(params.t_end)
            .map_err(|(k, m)| invalid(format!("nonlinearity.{k} {m}")))?;
        let ops = build_operators(&params, &grid);
        let p = params.p;
        let n = grid.n;
        let basis_norms = (1..n)
            .map(|j| {
                let s: f64 = (j..=n)
                    .map(|i| ops.norm_weights[i] * ops.left_deriv[(i, j)].abs().powf(p))
                    .sum();
                s.powf(1.0 / p)
            })
            .collect();
        Ok(Self {
            eps_reg: if p >= 2.0 { 0.0 } else { eps_reg },
            nodes: grid.nodes(),
            quad: grid.trapezoid_weights(),
            basis_norms,
            params,
            grid,
            ops,
            spec,
        })
    }

    pub fn p(&self) -> f64 {
        self.params.p
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Trapezoid weights used for the nonlinear term.
    pub fn quad_weights(&self) -> &[f64] {
        &self.quad
    }

    /// Number of interior unknowns.
    pub fn dim(&self) -> usize {
        self.grid.n - 1
    }

    /// `φ(s)`, regularized when `eps_reg > 0`.
    pub fn phi(&self, s: f64) -> f64 {
        let p = self.p();
        if self.eps_reg > 0.0 {
            (s * s + self.eps_reg * self.eps_reg).powf(0.5 * (p - 2.0)) * s
        } else if s == 0.0 {
            0.0
        } else {
            s.abs().powf(p - 2.0) * s
        }
    }

    /// `φ'(s)`.
    pub fn phi_prime(&self, s: f64) -> f64 {
        let p = self.p();
        if self.eps_reg > 0.0 {
            let e2 = self.eps_reg * self.eps_reg;
            (s * s + e2).powf(0.5 * (p - 4.0)) * ((p - 1.0) * s * s + e2)
        } else {
            (p - 1.0) * s.abs().powf(p - 2.0)
        }
    }

    /// Potential `Φ` with `Φ(0) = 0` and `Φ' = φ`.
    pub fn potential(&self, s: f64) -> f64 {
        let p = self.p();
        if self.eps_reg > 0.0 {
            ((s * s + self.eps_reg * self.eps_reg).powf(0.5 * p) - self.eps_reg.powf(p)) / p
        } else {
            s.abs().powf(p) / p
        }
    }

    fn check(&self, u: &GridFunction) -> Result<()> {
        u.check_len(&self.grid)?;
        if !u.dirichlet {
            return Err(invalid("expected a dirichlet grid function"));
        }
        Ok(())
    }

    pub(crate) fn embed(&self, x: &[f64]) -> Vec<f64> {
        GridFunction::from_interior(x).values
    }

    /// Energy of the Dirichlet function with interior values `x`.
    pub fn energy_x(&self, x: &[f64]) -> Result<f64> {
        let u = self.embed(x);
        self.energy_full(&u)
    }

    fn energy_full(&self, u: &[f64]) -> Result<f64> {
        let psi = self.ops.deriv(u);
        let w = &self.ops.norm_weights;
        let a: f64 = psi.iter().zip(w).map(|(s, wi)| wi * self.potential(*s)).sum();
        let mut b = 0.0;
        for i in 1..self.grid.n {
            b += self.quad[i] * eval(&self.spec, self.nodes[i], u[i])?.1;
        }
        Ok(a - b)
    }

    /// `Dᵀ(w ⊙ φ(D u))` on the full grid.
    fn flux_adjoint(&self, u: &[f64]) -> Vec<f64> {
        let psi = self.ops.deriv(u);
        let y: Vec<f64> = psi
            .iter()
            .zip(&self.ops.norm_weights)
            .map(|(s, wi)| wi * self.phi(*s))
            .collect();
        self.ops.deriv_adjoint(&y)
    }

    /// Partial derivatives `∂E/∂x_j` with respect to the interior values.
    pub fn partials_x(&self, x: &[f64]) -> Result<Vec<f64>> {
        let u = self.embed(x);
        let z = self.flux_adjoint(&u);
        (1..self.grid.n)
            .map(|i| Ok(z[i] - self.quad[i] * eval(&self.spec, self.nodes[i], u[i])?.0))
            .collect()
    }

    /// `max_j |∂E/∂x_j| / ‖e_j‖_{α,p}`.
    pub fn residual_from_partials(&self, partials: &[f64]) -> f64 {
        partials
            .iter()
            .zip(&self.basis_norms)
            .fold(0.0, |m, (g, c)| m.max(g.abs() / c))
    }

    /// Interior block of the Hessian `Dᵀ W diag(φ'(Du)) D − diag(ω f_u)`.
    pub fn hessian_x(&self, x: &[f64]) -> Result<nalgebra::DMatrix<f64>> {
        let u = self.embed(x);
        let psi = self.ops.deriv(&u);
        let n = self.grid.n;
        let m = n - 1;
        let d = self.ops.left_deriv.view((0, 1), (n + 1, m));
        let scale: Vec<f64> = psi
            .iter()
            .zip(&self.ops.norm_weights)
            .map(|(s, wi)| wi * self.phi_prime(*s))
            .collect();
        let mut wd = d.clone_owned();
        for (i, si) in scale.iter().enumerate() {
            wd.row_mut(i).scale_mut(*si);
        }
        let mut h = d.transpose() * wd;
        for j in 0..m {
            h[(j, j)] -= self.quad[j + 1] * eval_du(&self.spec, self.nodes[j + 1], u[j + 1])?;
        }
        Ok(h)
    }
}

pub fn energy(st: &ProblemState, u: &GridFunction) -> Result<f64> {
    st.check(u)?;
    st.energy_full(&u.values)
}

/// Riesz vector of `E'(u)` for the pairing `Σ h g_i v_i`; zero at both ends.
pub fn gradient(st: &ProblemState, u: &GridFunction) -> Result<GridFunction> {
    st.check(u)?;
    let part = st.partials_x(u.interior())?;
    let h = st.grid.h;
    let g: Vec<f64> = part.iter().map(|v| v / h).collect();
    Ok(GridFunction::from_interior(&g))
}

/// Riesz vector of the p-Laplacian part alone, `Dᵀ W φ(Du) / h`.
pub fn p_laplacian_action(st: &ProblemState, u: &GridFunction) -> Result<GridFunction> {
    st.check(u)?;
    let z = st.flux_adjoint(&u.values);
    let h = st.grid.h;
    let g: Vec<f64> = z[1..st.grid.n].iter().map(|v| v / h).collect();
    Ok(GridFunction::from_interior(&g))
}

/// Dual-norm surrogate over the α-normalized nodal basis.
pub fn weak_residual(st: &ProblemState, u: &GridFunction) -> Result<f64> {
    st.check(u)?;
    Ok(st.residual_from_partials(&st.partials_x(u.interior())?))
}

/// `⟨J'(u) − J'(v), u − v⟩ − (‖u‖^{p−1} − ‖v‖^{p−1})(‖u‖ − ‖v‖)` for the
/// unregularized p-Laplacian part `J(u) = ‖u‖_{α,p}^p / p`. Non-negative.
pub fn monotonicity_gap(st: &ProblemState, u: &GridFunction, v: &GridFunction) -> Result<f64> {
    let (gap, _) = monotonicity_terms(st, u, v)?;
    Ok(gap)
}

/// Gap together with the magnitude of the two terms it subtracts.
pub(crate) fn monotonicity_terms(st: &ProblemState, u: &GridFunction, v: &GridFunction) -> Result<(f64, f64)> {
    st.check(u)?;
    st.check(v)?;
    let p = st.p();
    let w = &st.ops.norm_weights;
    let du = st.ops.deriv(&u.values);
    let dv = st.ops.deriv(&v.values);
    let phi = |s: f64| if s == 0.0 { 0.0 } else { s.abs().powf(p - 2.0) * s };
    let pair: f64 = (0..du.len())
        .map(|i| w[i] * (phi(du[i]) - phi(dv[i])) * (du[i] - dv[i]))
        .sum();
    let nu = weighted_lp(&du, w, p);
    let nv = weighted_lp(&dv, w, p);
    let prod = (nu.powf(p - 1.0) - nv.powf(p - 1.0)) * (nu - nv);
    Ok((pair - prod, pair.abs() + prod.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::nonlinearity::Coefficient;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn state(alpha: f64, p: f64, n: usize, spec: NonlinearitySpec) -> ProblemState {
        let params = FracParams::new(alpha, p, 1.0).unwrap();
        ProblemState::new(params, make_grid(1.0, n).unwrap(), spec, DEFAULT_EPS_REG).unwrap()
    }

    fn source() -> NonlinearitySpec {
        NonlinearitySpec::source(Coefficient::Sinusoidal {
            offset: 0.0,
            amplitude: PI * PI,
            wavenumber: 1.0,
        })
    }

    fn random_dirichlet(rng: &mut ChaCha8Rng, g: &Grid) -> GridFunction {
        let c: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        GridFunction::dirichlet_clamped(g.sample(|t| {
            c.iter()
                .enumerate()
                .map(|(k, ck)| ck * ((k + 1) as f64 * PI * t).sin())
                .sum()
        }))
    }

    #[test]
    fn zero_is_critical() {
        let st = state(0.7, 2.0, 64, NonlinearitySpec::superlinear(4.0));
        let z = GridFunction::dirichlet(vec![0.0; 65]).unwrap();
        assert_eq!(energy(&st, &z).unwrap(), 0.0);
        assert!(gradient(&st, &z).unwrap().values.iter().all(|v| *v == 0.0));
        assert_eq!(weak_residual(&st, &z).unwrap(), 0.0);
    }

    #[test]
    fn classical_energy_example() {
        let st = state(1.0, 2.0, 512, source());
        let u = GridFunction::dirichlet_clamped(st.grid.sample(|t| (PI * t).sin()));
        let e = energy(&st, &u).unwrap();
        assert!((e + PI * PI / 4.0).abs() < 2e-2, "{e}");
        assert!(weak_residual(&st, &u).unwrap() <= 1e-3);
    }

    #[test]
    fn eps_reg_only_below_two() {
        let st = state(0.5, 3.0, 16, NonlinearitySpec::superlinear(4.0));
        assert_eq!(st.eps_reg, 0.0);
        let st = state(0.5, 1.5, 16, NonlinearitySpec::sublinear(1.2, Coefficient::constant(1.0)));
        assert_eq!(st.eps_reg, DEFAULT_EPS_REG);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (p, tol) in [(2.0, 1e-5), (3.0, 1e-4), (1.5, 1e-4)] {
            let st = state(0.6, p, 128, NonlinearitySpec::sublinear(0.5 * (1.0 + p), Coefficient::constant(1.0)));
            for _ in 0..10 {
                let u = random_dirichlet(&mut rng, &st.grid);
                let v = random_dirichlet(&mut rng, &st.grid);
                let eps = 1e-6;
                let plus = GridFunction::dirichlet_clamped(u.values.iter().zip(&v.values).map(|(a, b)| a + eps * b).collect());
                let minus = GridFunction::dirichlet_clamped(u.values.iter().zip(&v.values).map(|(a, b)| a - eps * b).collect());
                let fd = (energy(&st, &plus).unwrap() - energy(&st, &minus).unwrap()) / (2.0 * eps);
                let g = gradient(&st, &u).unwrap();
                let an: f64 = g.values.iter().zip(&v.values).map(|(a, b)| st.grid.h * a * b).sum();
                assert!(((fd - an) / an).abs() <= tol, "p = {p}: {fd} vs {an}");
            }
        }
    }

    #[test]
    fn evenness_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let st = state(0.4, 2.5, 64, NonlinearitySpec::sublinear(1.7, Coefficient::constant(2.0)));
        for _ in 0..20 {
            let u = random_dirichlet(&mut rng, &st.grid);
            assert_eq!(energy(&st, &u).unwrap(), energy(&st, &u.neg()).unwrap());
            assert_eq!(gradient(&st, &u.neg()).unwrap(), gradient(&st, &u).unwrap().neg());
        }
    }

    #[test]
    fn p_laplacian_part_is_homogeneous() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let st = state(0.3, 2.7, 64, NonlinearitySpec::sublinear(1.5, Coefficient::constant(1.0)));
        let j = |u: &GridFunction| crate::fracops::alpha_norm(&st.ops, u, 2.7).unwrap().powf(2.7) / 2.7;
        for _ in 0..10 {
            let u = random_dirichlet(&mut rng, &st.grid);
            let lam: f64 = rng.random_range(-3.0..3.0);
            let a = j(&u.scaled(lam));
            let b = lam.abs().powf(2.7) * j(&u);
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-300));
        }
    }

    #[test]
    fn coercive_along_rays() {
        let st = state(0.6, 2.0, 128, NonlinearitySpec::sublinear(1.5, Coefficient::constant(1.0)));
        let u = GridFunction::dirichlet_clamped(st.grid.sample(|t| (PI * t).sin()));
        let limit = crate::fracops::alpha_norm(&st.ops, &u, 2.0).unwrap().powi(2) / 2.0;
        let mut prev = f64::INFINITY;
        for k in 2..=10 {
            let lam = 2f64.powi(k);
            let ratio = energy(&st, &u.scaled(lam)).unwrap() / lam.powi(2);
            let err = (ratio - limit).abs();
            assert!(err < prev);
            prev = err;
        }
        assert!(prev / limit < 0.05);
    }

    #[test]
    fn mountain_geometry_along_ray() {
        let st = state(0.7, 2.0, 128, NonlinearitySpec::superlinear(4.0));
        let u = GridFunction::dirichlet_clamped(st.grid.sample(|t| (PI * t).sin()));
        assert!(energy(&st, &u.scaled(1e-2)).unwrap() > 0.0);
        let far: Vec<f64> = (0..8).map(|k| energy(&st, &u.scaled(2f64.powi(k))).unwrap()).collect();
        assert!(far.windows(2).skip(3).all(|w| w[1] < w[0]));
        assert!(far[7] < -1e3);
    }

    #[test]
    fn monotonicity_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let st = state(0.5, 2.0, 64, NonlinearitySpec::sublinear(1.5, Coefficient::constant(1.0)));
        let v = random_dirichlet(&mut rng, &st.grid);
        assert_eq!(monotonicity_gap(&st, &v, &v).unwrap(), 0.0);
        let gap = monotonicity_gap(&st, &v.scaled(2.0), &v).unwrap();
        let nv = crate::fracops::alpha_norm(&st.ops, &v, 2.0).unwrap().powi(2);
        assert!(gap.abs() <= 1e-12 * nv);
        for alpha in [0.3, 0.7] {
            for p in [1.5, 2.0, 3.0] {
                let st = state(alpha, p, 64, NonlinearitySpec::sublinear(1.2, Coefficient::constant(1.0)));
                for _ in 0..1000 / 6 {
                    let u = random_dirichlet(&mut rng, &st.grid);
                    let v = random_dirichlet(&mut rng, &st.grid);
                    let (gap, scale) = monotonicity_terms(&st, &u, &v).unwrap();
                    assert!(gap >= -1e-12 * (1.0 + scale));
                }
            }
        }
    }

    #[test]
    fn hessian_matches_partials() {
        let st = state(0.6, 2.0, 32, NonlinearitySpec::sublinear(1.5, Coefficient::constant(1.0)));
        let x: Vec<f64> = (1..32).map(|i| (PI * i as f64 / 32.0).sin()).collect();
        let h = st.hessian_x(&x).unwrap();
        let eps = 1e-6;
        for j in [0usize, 7, 15, 30] {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += eps;
            xm[j] -= eps;
            let gp = st.partials_x(&xp).unwrap();
            let gm = st.partials_x(&xm).unwrap();
            for i in 0..31 {
                let fd = (gp[i] - gm[i]) / (2.0 * eps);
                assert!((fd - h[(i, j)]).abs() <= 1e-5 * (1.0 + h[(i, j)].abs()), "({i},{j})");
            }
        }
    }

    #[test]
    fn rejects_non_dirichlet() {
        let st = state(0.5, 2.0, 8, NonlinearitySpec::superlinear(4.0));
        let u = GridFunction::free(vec![1.0; 9]);
        assert!(energy(&st, &u).is_err());
        assert!(gradient(&st, &u).is_err());
    }
}
