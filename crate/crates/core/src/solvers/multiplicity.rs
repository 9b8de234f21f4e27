use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::direct::descend;
use super::{axpy, dot, golden_max, normalize, require, sine_mode, Method, Metric, SolveReport};
use crate::energy::ProblemState;
use crate::error::Result;
use crate::fracops::alpha_norm;
use crate::grid::{weighted_lp, GridFunction};
use crate::nonlinearity::Regime;

const NEWTON_ITERS: usize = 200;
const DESCENT_ITERS: usize = 10_000;
const DRAWS_PER_LEVEL: usize = 4;

/// A solution `u` together with its mirror `−u`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionPair {
    pub positive: SolveReport,
    pub negative: SolveReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiplicityReport {
    pub pairs: Vec<SolutionPair>,
    /// `d_ij = min(‖u_i − u_j‖_{α,p}, ‖u_i + u_j‖_{α,p})`, the distance between pairs.
    pub pairwise_distances: Vec<Vec<f64>>,
    pub separation: f64,
    pub requested: usize,
    pub converged_count: usize,
}

/// Finds up to `k` distinct `±` pairs of negative-energy critical points.
///
/// The first pair comes from descent started at the energy-minimizing point on
/// the ray through `sin(πt/T)`. Later starts are drawn in nested sine spans and
/// refined by damped Newton iterations on the deflated residual
/// `m(u)·∇E(u)`, where `m = Π_j (1 + ‖u − u_j‖^{−p})(1 + ‖u + u_j‖^{−p})`
/// repels every pair already found.
pub fn multiplicity_search(st: &ProblemState, k: usize, tol: f64, seed: u64) -> Result<MultiplicityReport> {
    require(st, Regime::Sublinear, &["F1", "F2", "F3"], "multiplicity_search")?;
    let metric = Metric::new(st)?;
    let p = st.p();
    let separation = 1e-3 * st.params.t_end.powf(st.params.alpha);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut found: Vec<Vec<f64>> = Vec::new();
    let mut pairs = Vec::new();

    if k >= 1 {
        let x0 = ray_minimizer(st, &sine_mode(st, 1));
        let rep = descend(st, &metric, x0, tol, DESCENT_ITERS)?;
        if accept(st, &rep, &found, separation) {
            found.push(rep.solution.interior().to_vec());
            pairs.push(pair(st, rep, seed)?);
        }
    }
    for level in 2..=k {
        for _ in 0..DRAWS_PER_LEVEL {
            let mut c: Vec<f64> = (0..level).map(|_| { let z: f64 = StandardNormal.sample(&mut rng); 0.1 * z }).collect();
            c[level - 1] = 1.0;
            let mut w = vec![0.0; st.dim()];
            for (j, cj) in c.iter().enumerate() {
                for (wi, si) in w.iter_mut().zip(sine_mode(st, j + 1)) {
                    *wi += cj * si;
                }
            }
            let x0 = ray_minimizer(st, &w);
            let rep = deflated_newton(st, &metric, x0, &found, tol, p)?;
            if accept(st, &rep, &found, separation) {
                found.push(rep.solution.interior().to_vec());
                pairs.push(pair(st, rep, seed)?);
                break;
            }
        }
    }

    let fns: Vec<GridFunction> = found.iter().map(|x| GridFunction::from_interior(x)).collect();
    let pairwise_distances = fns
        .iter()
        .map(|a| fns.iter().map(|b| pair_distance(st, a, b)).collect())
        .collect();
    Ok(MultiplicityReport {
        converged_count: pairs.len(),
        pairs,
        pairwise_distances,
        separation,
        requested: k,
    })
}

fn pair_distance(st: &ProblemState, a: &GridFunction, b: &GridFunction) -> f64 {
    let p = st.p();
    let diff = GridFunction::from_interior(&a.interior().iter().zip(b.interior()).map(|(x, y)| x - y).collect::<Vec<_>>());
    let sum = GridFunction::from_interior(&a.interior().iter().zip(b.interior()).map(|(x, y)| x + y).collect::<Vec<_>>());
    let d1 = alpha_norm(&st.ops, &diff, p).unwrap_or(f64::NAN);
    let d2 = alpha_norm(&st.ops, &sum, p).unwrap_or(f64::NAN);
    d1.min(d2)
}

fn accept(st: &ProblemState, rep: &SolveReport, found: &[Vec<f64>], sep: f64) -> bool {
    rep.converged
        && rep.energy_value < 0.0
        && found
            .iter()
            .all(|x| pair_distance(st, &rep.solution, &GridFunction::from_interior(x)) >= sep)
}

fn pair(st: &ProblemState, mut positive: SolveReport, seed: u64) -> Result<SolutionPair> {
    positive.method = Method::Multiplicity;
    positive.seed = seed;
    let neg: Vec<f64> = positive.solution.interior().iter().map(|v| -v).collect();
    let g = st.partials_x(&neg)?;
    let mut negative = SolveReport::new(
        st,
        &neg,
        st.energy_x(&neg)?,
        st.residual_from_partials(&g),
        positive.iterations,
        positive.converged,
        Method::Multiplicity,
    );
    negative.seed = seed;
    Ok(SolutionPair { positive, negative })
}

/// Point of least energy on the ray through `w`.
fn ray_minimizer(st: &ProblemState, w: &[f64]) -> Vec<f64> {
    let w = normalize(st, w);
    let at = |s: f64| -> Vec<f64> { w.iter().map(|v| s * v).collect() };
    let neg_e = |s: f64| -st.energy_x(&at(s)).unwrap_or(f64::INFINITY);
    let grid: Vec<f64> = (0..200).map(|i| 10f64.powf(-4.0 + 7.0 * i as f64 / 199.0)).collect();
    let vals: Vec<f64> = grid.iter().map(|s| neg_e(*s)).collect();
    let j = (0..grid.len()).fold(0, |bj, i| if vals[i] > vals[bj] { i } else { bj });
    let lo = grid[j.saturating_sub(1)];
    let hi = grid[(j + 1).min(grid.len() - 1)];
    at(golden_max(neg_e, lo, hi, 60))
}

/// `(log m, ∇ log m)` for the deflation multiplier.
fn deflation(st: &ProblemState, x: &[f64], found: &[Vec<f64>], p: f64) -> (f64, Vec<f64>) {
    let mut log_m = 0.0;
    let mut grad = vec![0.0; x.len()];
    for uj in found {
        for sign in [1.0, -1.0] {
            let y: Vec<f64> = x.iter().zip(uj).map(|(a, b)| a - sign * b).collect();
            let full = st.embed(&y);
            let dy = st.ops.deriv(&full);
            let nrm = weighted_lp(&dy, &st.ops.norm_weights, p);
            let inv = nrm.powf(-p);
            log_m += inv.ln_1p();
            // ∇‖y‖ = Dᵀ W φ_p(Dy) / ‖y‖^{p−1}
            let flux: Vec<f64> = dy
                .iter()
                .zip(&st.ops.norm_weights)
                .map(|(s, w)| w * if *s == 0.0 { 0.0 } else { s.abs().powf(p - 2.0) * s })
                .collect();
            let z = st.ops.deriv_adjoint(&flux);
            let factor = -p * nrm.powf(-p - 1.0) / (1.0 + inv) * nrm.powf(1.0 - p);
            for (gi, zi) in grad.iter_mut().zip(&z[1..st.grid.n]) {
                *gi += factor * zi;
            }
        }
    }
    (log_m, grad)
}

fn merit(st: &ProblemState, metric: &Metric, x: &[f64], found: &[Vec<f64>], p: f64) -> f64 {
    let Ok(g) = st.partials_x(x) else {
        return f64::INFINITY;
    };
    let (log_m, _) = deflation(st, x, found, p);
    log_m.exp() * dot(&g, &metric.solve(&g)).sqrt()
}

fn deflated_newton(st: &ProblemState, metric: &Metric, mut x: Vec<f64>, found: &[Vec<f64>], tol: f64, p: f64) -> Result<SolveReport> {
    let mut iters = 0;
    let mut residual;
    loop {
        let g = st.partials_x(&x)?;
        residual = st.residual_from_partials(&g);
        if residual <= tol || iters >= NEWTON_ITERS {
            break;
        }
        let h = st.hessian_x(&x)?;
        let rhs = DVector::from_iterator(g.len(), g.iter().map(|v| -v));
        let d: Vec<f64> = match h.lu().solve(&rhs) {
            Some(s) if s.iter().all(|v| v.is_finite()) => s.data.into(),
            _ => metric.solve(&g).iter().map(|v| -v).collect(),
        };
        let (_, grad_log_m) = deflation(st, &x, found, p);
        let denom = 1.0 - dot(&grad_log_m, &d);
        let tau = if denom.abs() > 1e-12 { 1.0 / denom } else { 1.0 };
        let d: Vec<f64> = d.iter().map(|v| tau * v).collect();
        let m0 = merit(st, metric, &x, found, p);
        let mut a = 1.0;
        while a > 1e-8 && !(merit(st, metric, &axpy(&x, a, &d), found, p) < (1.0 - 1e-4 * a) * m0) {
            a *= 0.5;
        }
        x = axpy(&x, a, &d);
        iters += 1;
    }
    let e = st.energy_x(&x)?;
    Ok(SolveReport::new(st, &x, e, residual, iters, residual <= tol, Method::Multiplicity))
}
