//! Property verification: each identity or inequality of the theory is measured
//! on seeded random grid functions and reported with its worst margin.
//!
//! Margins are relative, positive when the property holds with room to spare.
//! A report passes iff `worst_margin >= -tolerance_used`. For properties whose
//! error is set by the discretization, the margin also folds in the refinement
//! requirement: `min(-error, -tol * ratio / MAX_REFINEMENT_RATIO)`.

pub mod ensemble;
pub mod oracle;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::energy::{energy, gradient, monotonicity_terms, ProblemState, DEFAULT_EPS_REG};
use crate::error::{invalid, Result};
use crate::fracops::{
    alpha_norm, apply, build_operators, gamma, left_integral_matrix, OpKind, OperatorSet,
};
use crate::grid::{make_grid, sup_norm, weighted_lp, FracParams, Grid, GridFunction, MAX_N};
use crate::nonlinearity::{Coefficient, NonlinearitySpec};

use ensemble::{ensemble, Boundary, Sample};
use oracle::product_integration_matrix;

/// Samples per property in [`run_suite`].
pub const SUITE_SAMPLES: usize = 100;
/// Tolerance of identities that hold exactly up to rounding.
pub const EXACT_TOL: f64 = 1e-12;
/// Largest accepted error ratio when n doubles.
pub const MAX_REFINEMENT_RATIO: f64 = 0.75;
/// Second order used by the semigroup check.
pub const SEMIGROUP_BETA: f64 = 0.5;
/// Central-difference step of the gradient check.
pub const FD_STEP: f64 = 1e-6;
/// Tolerance of the pointwise interpolation inequality behind EMBED_LQ.
pub const INTERP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, clap::ValueEnum)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
#[clap(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PropertyId {
    Semigroup,
    LeftInverse,
    IbpExact,
    IbpIntegral,
    RlCaputo,
    YoungBound,
    Poincare,
    SupEmbed,
    EmbedLq,
    TranslationCompact,
    MonotoneGap,
    GradFd,
    EvenEnergy,
}

impl PropertyId {
    pub const ALL: [PropertyId; 13] = [
        PropertyId::Semigroup,
        PropertyId::LeftInverse,
        PropertyId::IbpExact,
        PropertyId::IbpIntegral,
        PropertyId::RlCaputo,
        PropertyId::YoungBound,
        PropertyId::Poincare,
        PropertyId::SupEmbed,
        PropertyId::EmbedLq,
        PropertyId::TranslationCompact,
        PropertyId::MonotoneGap,
        PropertyId::GradFd,
        PropertyId::EvenEnergy,
    ];

    /// The statement that is measured.
    pub fn statement(self) -> &'static str {
        match self {
            PropertyId::Semigroup => "I^a I^b u = I^(a+b) u",
            PropertyId::LeftInverse => "D^a I^a u = u",
            PropertyId::IbpExact => "sum (D u) v = sum u (D_right v) for dirichlet u, v",
            PropertyId::IbpIntegral => "int (I u) v = int u (I_right v)",
            PropertyId::RlCaputo => "caputo u = D u - u(0) t^-a / G(1-a), and its right mirror",
            PropertyId::YoungBound => "|I u|_p on [0,t] <= t^a / G(a+1) |u|_p on [0,t]",
            PropertyId::Poincare => "|u|_p <= T^a / G(a+1) |u|_(a,p)",
            PropertyId::SupEmbed => "|u|_inf <= T^(a-1/p) / (G(a) ((a-1)q+1)^(1/q)) |u|_(a,p)",
            PropertyId::EmbedLq => "|u|_q^q <= |u|_inf^(q-p) |u|_p^p, C_q = max |u|_q / |u|_(a,p)",
            PropertyId::TranslationCompact => {
                "sup |u(.+h) - u|_p <= (2h^a + T^a - (T+h)^a) / G(a+1), decreasing in h"
            }
            PropertyId::MonotoneGap => "<J'u - J'v, u - v> >= (|u|^(p-1) - |v|^(p-1))(|u| - |v|)",
            PropertyId::GradFd => "central differences of E match <grad E, v>",
            PropertyId::EvenEnergy => "E(-u) = E(u) and grad E(-u) = -grad E(u)",
        }
    }

    fn salt(self) -> u64 {
        (self as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Passed,
    Failed,
    Skipped,
}

/// A named auxiliary number of a report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Detail {
    pub name: String,
    #[serde(serialize_with = "crate::numfmt::f64_or_sentinel")]
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub property: PropertyId,
    pub samples: usize,
    #[serde(serialize_with = "crate::numfmt::f64_or_sentinel")]
    pub worst_margin: f64,
    /// Closed-form constant of the inequality, or the empirical one for EMBED_LQ.
    #[serde(serialize_with = "crate::numfmt::opt_f64_or_sentinel")]
    pub bound_constant: Option<f64>,
    pub tolerance_used: f64,
    pub passed: bool,
    #[serde(serialize_with = "crate::numfmt::opt_f64_or_sentinel")]
    pub refinement_ratio: Option<f64>,
    pub status: Status,
    pub alpha: f64,
    pub p: f64,
    #[serde(rename = "T")]
    pub t_end: f64,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub details: Vec<Detail>,
}

impl VerificationReport {
    pub fn detail(&self, name: &str) -> Option<f64> {
        self.details.iter().find(|d| d.name == name).map(|d| d.value)
    }

    fn skipped(property: PropertyId, params: &FracParams, grid: &Grid, reason: String) -> Self {
        VerificationReport {
            property,
            samples: 0,
            worst_margin: 0.0,
            bound_constant: None,
            tolerance_used: 0.0,
            passed: true,
            refinement_ratio: None,
            status: Status::Skipped,
            alpha: params.alpha,
            p: params.p,
            t_end: grid.t_end,
            n: grid.n,
            reason: Some(reason),
            details: Vec::new(),
        }
    }
}

/// Slack for inequalities with continuous constants and for O(h) errors.
pub fn discretization_tol(n: usize) -> f64 {
    if n >= 512 {
        0.03
    } else {
        0.05
    }
}

pub fn poincare_constant(params: &FracParams) -> f64 {
    params.t_end.powf(params.alpha) / gamma(params.alpha + 1.0).expect("alpha > 0")
}

/// Requires `α > 1/p`.
pub fn sup_embed_constant(params: &FracParams) -> f64 {
    let (a, p, q) = (params.alpha, params.p, params.q_conj);
    params.t_end.powf(a - 1.0 / p) / (gamma(a).expect("alpha > 0") * ((a - 1.0) * q + 1.0).powf(1.0 / q))
}

/// Bound on `‖u(·+h) − u‖_{L^p(0,T−h)}` for `‖u‖_{α,p} ≤ 1`.
pub fn translation_bound(alpha: f64, t_end: f64, h: f64) -> f64 {
    (2.0 * h.powf(alpha) + t_end.powf(alpha) - (t_end + h).powf(alpha))
        / gamma(alpha + 1.0).expect("alpha > 0")
}

/// `None` when the property applies, otherwise why not.
pub fn precondition(property: PropertyId, params: &FracParams, grid: &Grid) -> Option<String> {
    match property {
        PropertyId::SupEmbed if params.alpha * params.p <= 1.0 => Some(format!(
            "needs alpha > 1/p, got alpha = {} and 1/p = {}",
            params.alpha,
            1.0 / params.p
        )),
        PropertyId::TranslationCompact if grid.n < 64 => {
            Some(format!("needs n >= 64 for a T/64 shift, got n = {}", grid.n))
        }
        _ => None,
    }
}

/// Runs one property on `samples` seeded grid functions.
pub fn verify(
    property: PropertyId,
    params: &FracParams,
    grid: &Grid,
    samples: usize,
    seed: u64,
) -> Result<VerificationReport> {
    if let Some(reason) = precondition(property, params, grid) {
        return Err(invalid(format!("{property:?}: {reason}")));
    }
    if samples == 0 {
        return Err(invalid("samples must be positive"));
    }
    if (params.t_end - grid.t_end).abs() > 1e-12 * params.t_end {
        return Err(invalid(format!(
            "params T = {} differs from grid T = {}",
            params.t_end, grid.t_end
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ property.salt());
    let ctx = Ctx { params, grid, ops: build_operators(params, grid) };
    let out = match property {
        PropertyId::Semigroup => ctx.semigroup(&mut rng, samples),
        PropertyId::LeftInverse => ctx.left_inverse(&mut rng, samples),
        PropertyId::IbpExact => ctx.ibp_exact(&mut rng, samples),
        PropertyId::IbpIntegral => ctx.ibp_integral(&mut rng, samples),
        PropertyId::RlCaputo => ctx.rl_caputo(&mut rng, samples),
        PropertyId::YoungBound => ctx.young(&mut rng, samples),
        PropertyId::Poincare => ctx.poincare(&mut rng, samples),
        PropertyId::SupEmbed => ctx.sup_embed(&mut rng, samples),
        PropertyId::EmbedLq => ctx.embed_lq(&mut rng, samples),
        PropertyId::TranslationCompact => ctx.translation(&mut rng, samples),
        PropertyId::MonotoneGap => ctx.monotone_gap(&mut rng, samples),
        PropertyId::GradFd => ctx.grad_fd(&mut rng, samples),
        PropertyId::EvenEnergy => ctx.even_energy(&mut rng, samples),
    }?;
    let worst_margin = if out.margin.is_nan() { f64::NEG_INFINITY } else { out.margin };
    let passed = worst_margin.is_finite() && worst_margin >= -out.tol;
    Ok(VerificationReport {
        property,
        samples,
        worst_margin,
        bound_constant: out.bound,
        tolerance_used: out.tol,
        passed,
        refinement_ratio: out.ratio,
        status: if passed { Status::Passed } else { Status::Failed },
        alpha: params.alpha,
        p: params.p,
        t_end: grid.t_end,
        n: grid.n,
        reason: None,
        details: out.details,
    })
}

/// Every property for every parameter set, in `PropertyId` order per set.
/// Inapplicable properties appear as `SKIPPED` with a reason.
pub fn run_suite(params_list: &[FracParams], grid: &Grid, seed: u64) -> Vec<VerificationReport> {
    let mut out = Vec::with_capacity(params_list.len() * PropertyId::ALL.len());
    for params in params_list {
        let grid_here = if (params.t_end - grid.t_end).abs() > 1e-12 * params.t_end {
            make_grid(params.t_end, grid.n).expect("valid grid")
        } else {
            grid.clone()
        };
        let reports: Vec<VerificationReport> = std::thread::scope(|s| {
            let handles: Vec<_> = PropertyId::ALL
                .iter()
                .map(|&prop| {
                    let g = &grid_here;
                    s.spawn(move || run_one(prop, params, g, seed))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("property thread")).collect()
        });
        out.extend(reports);
    }
    out
}

fn run_one(prop: PropertyId, params: &FracParams, grid: &Grid, seed: u64) -> VerificationReport {
    if let Some(reason) = precondition(prop, params, grid) {
        return VerificationReport::skipped(prop, params, grid, reason);
    }
    match verify(prop, params, grid, SUITE_SAMPLES, seed) {
        Ok(r) => r,
        Err(e) => {
            let mut r = VerificationReport::skipped(prop, params, grid, e.to_string());
            r.status = Status::Failed;
            r.passed = false;
            r.worst_margin = f64::NEG_INFINITY;
            r
        }
    }
}

struct Outcome {
    margin: f64,
    tol: f64,
    bound: Option<f64>,
    ratio: Option<f64>,
    details: Vec<Detail>,
}

impl Outcome {
    fn exact(margin: f64) -> Self {
        Outcome { margin, tol: EXACT_TOL, bound: None, ratio: None, details: Vec::new() }
    }
}

fn detail(name: &str, value: f64) -> Detail {
    Detail { name: name.to_string(), value }
}

struct Ctx<'a> {
    params: &'a FracParams,
    grid: &'a Grid,
    ops: OperatorSet,
}

fn lp(v: &[f64], grid: &Grid, p: f64) -> f64 {
    weighted_lp(v, &grid.trapezoid_weights(), p)
}

fn dot_w(a: &[f64], b: &[f64], w: &[f64]) -> f64 {
    a.iter().zip(b).zip(w).map(|((x, y), wi)| x * y * wi).sum()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn mat_vec(m: &nalgebra::DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    (m * DVector::from_column_slice(v)).data.into()
}

/// Relative gap to a bound; positive when `value < bound`.
fn rel_margin(bound: f64, value: f64) -> f64 {
    if bound == 0.0 && value == 0.0 {
        0.0
    } else {
        (bound - value) / bound
    }
}

impl Ctx<'_> {
    fn p(&self) -> f64 {
        self.params.p
    }

    fn doubled(&self) -> Option<Grid> {
        let n2 = 2 * self.grid.n;
        (n2 <= MAX_N).then(|| make_grid(self.grid.t_end, n2).expect("valid grid"))
    }

    /// Worst error over `count` cases, then the ratio of worst smooth-case
    /// errors at n and 2n.
    fn refined(
        &self,
        count: usize,
        smooth: impl Fn(usize) -> bool,
        err: impl Fn(&Grid, usize) -> f64,
    ) -> Outcome {
        let tol = discretization_tol(self.grid.n);
        let mut worst = 0.0f64;
        let mut smooth_worst = 0.0f64;
        for k in 0..count {
            let e = err(self.grid, k);
            worst = worst.max(e);
            if smooth(k) {
                smooth_worst = smooth_worst.max(e);
            }
        }
        let ratio = self.doubled().and_then(|g2| {
            let fine = (0..count)
                .filter(|&k| smooth(k))
                .map(|k| err(&g2, k))
                .fold(0.0f64, f64::max);
            (smooth_worst > 0.0).then(|| fine / smooth_worst)
        });
        let mut margin = -worst;
        if let Some(r) = ratio {
            margin = margin.min(-tol * r / MAX_REFINEMENT_RATIO);
        }
        Outcome {
            margin,
            tol,
            bound: None,
            ratio,
            details: vec![detail("worst_error", worst), detail("worst_smooth_error", smooth_worst)],
        }
    }

    /// `f(grid)` for the working grid and, when allowed, its refinement.
    fn per_grid<T>(&self, f: impl Fn(&Grid) -> T) -> (T, Option<T>) {
        (f(self.grid), self.doubled().map(|g2| f(&g2)))
    }

    fn pick<'b, T>(&self, g: &Grid, pair: &'b (T, Option<T>)) -> &'b T {
        if g.n == self.grid.n {
            &pair.0
        } else {
            pair.1.as_ref().expect("refined grid")
        }
    }

    /// Smooth samples against the product-integration oracle for `I^{α+β}`;
    /// rough samples against the discrete `I^{α+β}`, which the GL weights
    /// reproduce exactly since their generating functions multiply.
    fn semigroup(&self, rng: &mut ChaCha8Rng, count: usize) -> Result<Outcome> {
        let (a, b, p) = (self.params.alpha, SEMIGROUP_BETA, self.p());
        let samples = ensemble(rng, count, self.grid, Boundary::Free);
        let mats = self.per_grid(|g| {
            (
                left_integral_matrix(a, g) * left_integral_matrix(b, g),
                product_integration_matrix(a + b, g),
                left_integral_matrix(a + b, g),
            )
        });
        let err = |g: &Grid, k: usize| {
            let (composed, oracle, discrete) = self.pick(g, &mats);
            let u = samples[k].on(g);
            let reference = if samples[k].is_smooth() { oracle } else { discrete };
            let want = mat_vec(reference, &u.values);
            let got = mat_vec(composed, &u.values);
            let diff: Vec<f64> = got.iter().zip(&want).map(|(x, y)| x - y).collect();
            lp(&diff, g, p) / lp(&want, g, p).max(f64::MIN_POSITIVE)
        };
        let mut out = self.refined(count, |k| samples[k].is_smooth(), err);
        out.details.push(detail("beta", b));
        Ok(out)
    }

    fn left_inverse(&self, rng: &mut ChaCha8Rng, count: usize) -> Result<Outcome> {
        let p = self.p();
        let samples: Vec<Sample> =
            (0..count).map(|_| Sample::draw_smooth(rng, Boundary::Dirichlet)).collect();
        let ops = self.per_grid(|g| build_operators(self.params, g));
        let err = |g: &Grid, k: usize| {
            let ops = self.pick(g, &ops);
            let u = samples[k].on(g);
            let back = ops.deriv(&mat_vec(&ops.left_int, &u.values));
            let diff: Vec<f64> = back.iter().zip(&u.values).map(|(x, y)| x - y).collect();
            lp(&diff, g, p) / lp(&u.values, g, p).max(f64::MIN_POSITIVE)
        };
        Ok(self.refined(count, |_| true, err))
    }

    fn ibp_exact(&self, rng: &mut ChaCha8Rng, count: usize) -> Result<Outcome> {
        let us = ensemble(rng, count, self.grid, Boundary::Dirichlet);
        let vs = ensemble(rng, count, self.grid, Boundary::Dirichlet);
        let mut worst = 0.0f64;
        for (u, v) in us.iter().zip(&vs) {
            let (u, v) = (u.on(self.grid), v.on(self.grid));
            let du = apply(&self.ops, OpKind::LeftDeriv, &u)?.values;
            let rv = apply(&self.ops, OpKind::RightDeriv, &v)?.values;
            let lhs: f64 = du.iter().zip(&v.values).map(|(x, y)| x * y).sum();
            let rhs: f64 = u.values.iter().zip(&rv).map(|(x, y)| x * y).sum();
            let scale: f64 = du.iter().zip(&v.values).map(|(x, y)| (x * y).abs()).sum::<f64>()
                + u.values.iter().zip(&rv).map(|(x, y)| (x * y).abs()).sum::<f64>();
            worst = worst.max((lhs - rhs).abs() / scale.max(f64::MIN_POSITIVE));
        }
        Ok(Outcome::exact(-worst))
    }

    fn ibp_integral(&self, rng: &mut ChaCha8Rng, count: usize) -> Result<Outcome> {
        let (a, p, q) = (self.params.alpha, self.p(), self.params.q_conj);
        let us = ensemble(rng, count, self.grid, Boundary::Free);
        let vs = ensemble(rng, count, self.grid, Boundary::Free);
        let mats = self.per_grid(|g| left_integral_matrix(a, g));
        let err = |g: &Grid, k: usize| {
            let l = self.pick(g, &mats);
            let (u, v) = (us[k].on(g), vs[k].on(g));
            let w = g.trapezoid_weights();
            let lu = mat_vec(l, &u.values);
            let rv: Vec<f64> = l.tr_mul(&DVector::from_column_slice(&v.values)).data.into();
            let gap = dot_w(&lu, &v.values, &w) - dot_w(&u.values, &rv, &w);
            let scale = lp(&lu, g, p) * lp(&v.values, g, q) + lp(&u.values, g, p) * lp(&rv, g, q);
            gap.abs() / scale.max(f64::MIN_POSITIVE)
        };
        Ok(self.refined(count, |k| us[k].is_smooth() && vs[k].is_smooth(), err))
    }

    fn rl_caputo(&self, rng: &mut ChaCha8Rng, count: usize) -> Result<Outcome> {
        let g = self.grid;
        let n = g.n;
        let samples = ensemble(rng, count, g, Boundary::Free);
        let mut worst = 0.0f64;
        for s in &samples {
            let mut u = s.on(g);
            if u.values[0] == 0.0 {
                u.values[0] = 1.0;
            }
            let u0 = u.values[0];
            let un = u.values[n];
            let cl = apply(&self.ops, OpKind::CaputoLeft, &u)?.values;
            let cr = apply(&self.ops, OpKind::CaputoRight, &u)?.values;
            // RL derivative of u minus its boundary value
            let shifted_l = GridFunction::free(u.values.iter().map(|x| x - u0).collect());
            let shifted_r = GridFunction::free(u.values.iter().map(|x| x - un).collect());
            let dl = apply(&self.ops, OpKind::LeftDeriv, &shifted_l)?.values;
            let dr = apply(&self.ops, OpKind::RightDeriv, &shifted_r)?.values;
            let scale_l = sup_norm(&GridFunction::free(dl[1..].to_vec()))
                .max(sup_norm(&GridFunction::free(cl[1..].to_vec())))
                .max(f64::MIN_POSITIVE);
            let scale_r = sup_norm(&GridFunction::free(dr[..n].to_vec()))
                .max(sup_norm(&GridFunction::free(cr[..n].to_vec())))
                .max(f64::MIN_POSITIVE);
            let el = max_abs_diff(&cl[1..], &dl[1..]) / scale_l;
            let er = max_abs_diff(&cr[..n], &dr[..n]) / scale_r;
            worst = worst.max(el).max(er);
        }
        Ok(Outcome::exact(-worst))
    }

    fn young(&self, rng: &mut ChaCha8Rng, count: usize) -> Result<Outcome> {
        let g = self.grid;
        let (a, p) = (self.params.alpha, self.p());
        let samples = ensemble(rng, count, g, Boundary::Free);
        let g1 = gamma(a + 1.0)?;
        let cuts: Vec<usize> = [g.n / 4, g.n / 2, 3 * g.n / 4, g.n]
            .into_iter()
            .filter(|&m| m >= 1)
            .collect();
        let mut worst = f64::INFINITY;
        for s in &samples {
            let u = s.on(g);
            let iu = mat_vec(&self.ops.left_int, &u.values);
            for &m in &cuts {
                let sub = make_grid(g.node(m), m)?;
                let c = sub.t_end.powf(a) / g1;
                let bound = c * lp(&u.values[..=m], &sub, p);
                worst = worst.min(rel_margin(bound, lp(&iu[..=m], &sub, p)));
            }
        }
        Ok(Outcome {
            margin: worst,
            tol: discretization_tol(g.n),
            bound: Some(poincare_constant(self.params)),
            ratio: None,
            details: Vec::new(),
        })
    }

    fn dirichlet_samples(&self, rng: &mut ChaCha8Rng, count: usize) -> Vec<GridFunction> {
        ensemble(rng, count, self.grid, Boundary::Dirichlet)
            .iter()
            .map(|s| s.on(self.grid))
            .collect()
    }

    fn poincare(&self, rng: &mut ChaCha8Rng, count: usize) -> Result<Outcome> {
        let c = poincare_constant(self.params);
        let mut worst = f64::INFINITY;
        for u in self.dirichlet_samples(rng, count) {
            let bound = c * alpha_norm(&self.ops, &u, self.p())?;
            worst = worst.min(rel_margin(bound, lp(&u.values, self.grid, self.p())));
        }
        Ok(Outcome {
            margin: worst,
            tol: discretization_tol(self.grid.n),
            bound: Some(c),
            ratio: None,
            details: Vec::new(),
        })
    }

    fn sup_embed(&self, rng: &mut ChaCha8Rng, count: usize) -> Result<Outcome> {
        let c = sup_embed_constant(self.params);
        let mut worst = f64::INFINITY;
        for u in self.dirichlet_samples(rng, count) {
            let bound = c * alpha_norm(&self.ops, &u, self.p())?;
            worst = worst.min(rel_margin(bound, sup_norm(&u)));
        }
        Ok(Outcome {
            margin: worst,
            tol: discretization_tol(self.grid.n),
            bound: Some(c),
            ratio: None,
            details: Vec::new(),
        })
    }

    /// Exponents from `p` up to `0.9 p̃` (or `8p` without a critical exponent).
    fn q_ladder(&self) -> Vec<f64> {
        let p = self.p();
        let top = match self.params.critical_exponent() {
            Some(pt) => 0.9 * pt,
            None => 8.0 * p,
        };
        let rungs = 8;
        (0..rungs)
            .map(|k| p * (top / p).powf(k as f64 / (rungs - 1) as f64))
            .collect()
    }

    fn embed_lq(&self, rng: &mut ChaCha8Rng, count: usize) -> Result<Outcome> {
        let p = self.p();
        let ladder = self.q_ladder();
        let mut worst = f64::INFINITY;
        let mut constant = 0.0f64;
        for u in self.dirichlet_samples(rng, count) {
            let an = alpha_norm(&self.ops, &u, p)?;
            let sup = sup_norm(&u);
            let lp_p = lp(&u.values, self.grid, p).powf(p);
            for &q in &ladder {
                let lq = lp(&u.values, self.grid, q);
                let bound = sup.powf(q - p) * lp_p;
                worst = worst.min(rel_margin(bound, lq.powf(q)));
                if an > 0.0 {
                    constant = constant.max(lq / an);
                }
            }
        }
        let mut details = vec![detail("q_min", ladder[0]), detail("q_max", ladder[ladder.len() - 1])];
        if let Some(pt) = self.params.critical_exponent() {
            details.push(detail("p_tilde", pt));
        }
        Ok(Outcome { margin: worst, tol: INTERP_TOL, bound: Some(constant), ratio: None, details })
    }

    fn translation(&self, rng: &mut ChaCha8Rng, count: usize) -> Result<Outcome> {
        let g = self.grid;
        let (a, p) = (self.params.alpha, self.p());
        let family: Vec<GridFunction> = (0..count)
            .map(|_| Sample::draw_smooth(rng, Boundary::Dirichlet).on(g))
            .map(|u| {
                let s = alpha_norm(&self.ops, &u, p).expect("dirichlet sample");
                u.scaled(1.0 / s)
            })
            .collect();
        let mut details = vec![detail("family_norm", 1.0)];
        let mut worst = f64::INFINITY;
        let mut previous: Option<f64> = None;
        let mut last_bound = 0.0;
        for div in [16usize, 32, 64] {
            let k = ((g.n as f64) / div as f64).round().max(1.0) as usize;
            let h = k as f64 * g.h;
            let sub = make_grid(g.t_end - h, g.n - k)?;
            let sup = family
                .iter()
                .map(|u| {
                    let d: Vec<f64> = (0..=g.n - k).map(|i| u.values[i + k] - u.values[i]).collect();
                    lp(&d, &sub, p)
                })
                .fold(0.0f64, f64::max);
            let bound = translation_bound(a, g.t_end, h);
            worst = worst.min(rel_margin(bound, sup));
            if let Some(prev) = previous {
                worst = worst.min(rel_margin(prev, sup));
            }
            previous = Some(sup);
            last_bound = bound;
            details.push(detail(&format!("shift_T/{div}"), h));
            details.push(detail(&format!("sup_T/{div}"), sup));
            details.push(detail(&format!("bound_T/{div}"), bound));
        }
        Ok(Outcome {
            margin: worst,
            tol: discretization_tol(g.n),
            bound: Some(last_bound),
            ratio: None,
            details,
        })
    }

    fn state(&self, eps_reg: f64) -> Result<ProblemState> {
        let p = self.p();
        let spec = NonlinearitySpec::sublinear((1.0 + p) / 2.0, Coefficient::constant(1.0));
        ProblemState::new(*self.params, self.grid.clone(), spec, eps_reg)
    }

    fn monotone_gap(&self, rng: &mut ChaCha8Rng, count: usize) -> Result<Outcome> {
        let st = self.state(0.0)?;
        let us = self.dirichlet_samples(rng, count);
        let vs = self.dirichlet_samples(rng, count);
        let mut worst = f64::INFINITY;
        for (u, v) in us.iter().zip(&vs) {
            let (gap, scale) = monotonicity_terms(&st, u, v)?;
            worst = worst.min(gap / (1.0 + scale));
        }
        Ok(Outcome::exact(worst))
    }

    fn grad_fd(&self, rng: &mut ChaCha8Rng, count: usize) -> Result<Outcome> {
        let p = self.p();
        let eps_reg = if p < 2.0 { DEFAULT_EPS_REG } else { 0.0 };
        let st = self.state(eps_reg)?;
        let h = self.grid.h;
        let us = self.dirichlet_samples(rng, count);
        let vs = self.dirichlet_samples(rng, count);
        let mut worst = 0.0f64;
        for (u, v) in us.iter().zip(&vs) {
            let g = gradient(&st, u)?;
            let analytic: f64 = g.values.iter().zip(&v.values).map(|(a, b)| h * a * b).sum();
            let plus = GridFunction::from_interior(
                &u.interior().iter().zip(v.interior()).map(|(a, b)| a + FD_STEP * b).collect::<Vec<_>>(),
            );
            let minus = GridFunction::from_interior(
                &u.interior().iter().zip(v.interior()).map(|(a, b)| a - FD_STEP * b).collect::<Vec<_>>(),
            );
            let fd = (energy(&st, &plus)? - energy(&st, &minus)?) / (2.0 * FD_STEP);
            // size of the pairing's individual contributions
            let du = st.ops.deriv(&u.values);
            let dv = st.ops.deriv(&v.values);
            let flux: f64 = du
                .iter()
                .zip(&dv)
                .zip(&st.ops.norm_weights)
                .map(|((s, d), w)| (w * st.phi(*s) * d).abs())
                .sum();
            let mut source = 0.0;
            for i in 1..self.grid.n {
                let f = crate::nonlinearity::eval(&st.spec, st.nodes()[i], u.values[i])?.0;
                source += (st.quad_weights()[i] * f * v.values[i]).abs();
            }
            let scale = (flux + source).max(analytic.abs()).max(f64::MIN_POSITIVE);
            worst = worst.max((fd - analytic).abs() / scale);
        }
        Ok(Outcome {
            margin: -worst,
            tol: if p < 2.0 { 1e-4 } else { 1e-5 },
            bound: None,
            ratio: None,
            details: vec![detail("eps_reg", eps_reg), detail("fd_step", FD_STEP)],
        })
    }

    fn even_energy(&self, rng: &mut ChaCha8Rng, count: usize) -> Result<Outcome> {
        let p = self.p();
        let st = self.state(if p < 2.0 { DEFAULT_EPS_REG } else { 0.0 })?;
        let mut worst = 0.0f64;
        for u in self.dirichlet_samples(rng, count) {
            let m = u.neg();
            let (e1, e2) = (energy(&st, &u)?, energy(&st, &m)?);
            let (g1, g2) = (gradient(&st, &u)?, gradient(&st, &m)?);
            let gscale = sup_norm(&g1).max(f64::MIN_POSITIVE);
            let gsum = g1.values.iter().zip(&g2.values).fold(0.0f64, |a, (x, y)| a.max((x + y).abs()));
            let ee = (e1 - e2).abs() / e1.abs().max(f64::MIN_POSITIVE);
            worst = worst.max(ee).max(gsum / gscale);
        }
        Ok(Outcome::exact(-worst))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(alpha: f64, p: f64) -> FracParams {
        FracParams::new(alpha, p, 1.0).unwrap()
    }

    #[test]
    fn enumeration_is_covered() {
        let mut seen = std::collections::BTreeSet::new();
        for p in PropertyId::ALL {
            assert!(seen.insert(p));
            assert!(!p.statement().is_empty());
            // exhaustive: adding a variant without listing it breaks this match
            match p {
                PropertyId::Semigroup
                | PropertyId::LeftInverse
                | PropertyId::IbpExact
                | PropertyId::IbpIntegral
                | PropertyId::RlCaputo
                | PropertyId::YoungBound
                | PropertyId::Poincare
                | PropertyId::SupEmbed
                | PropertyId::EmbedLq
                | PropertyId::TranslationCompact
                | PropertyId::MonotoneGap
                | PropertyId::GradFd
                | PropertyId::EvenEnergy => {}
            }
        }
        assert_eq!(seen.len(), 13);
    }

    #[test]
    fn poincare_example() {
        let g = make_grid(1.0, 256).unwrap();
        let r = verify(PropertyId::Poincare, &params(0.5, 2.0), &g, 100, 1).unwrap();
        assert!(r.passed, "{r:?}");
        let c = 2.0 / std::f64::consts::PI.sqrt();
        assert!((r.bound_constant.unwrap() - c).abs() < 1e-12);
        assert!((c - 1.1284).abs() < 1e-4);
    }

    #[test]
    fn sup_embed_precondition() {
        let g = make_grid(1.0, 64).unwrap();
        assert!(verify(PropertyId::SupEmbed, &params(0.3, 2.0), &g, 10, 1).is_err());
        assert!(verify(PropertyId::SupEmbed, &params(0.8, 2.0), &g, 10, 1).is_ok());
    }

    #[test]
    fn sup_embed_constant_closed_form() {
        // α = 0.75, p = q = 2: T^{1/4} / (Γ(0.75) · (0.5)^{1/2})
        let c = sup_embed_constant(&params(0.75, 2.0));
        assert!((c - 1.0 / (1.2254167024651776 * 0.5f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn translation_bound_values() {
        assert!((translation_bound(1.0, 1.0, 0.1) - 0.1).abs() < 1e-14);
        // (2·64^-0.4 + 1 − (65/64)^0.4) / Γ(1.4)
        let b = translation_bound(0.4, 1.0, 1.0 / 64.0);
        let want = (2.0 * 64f64.powf(-0.4) + 1.0 - (65.0f64 / 64.0).powf(0.4)) / 0.8872638175030753;
        assert!((b - want).abs() < 1e-14, "{b}");
        assert!((b - 0.42006).abs() < 1e-5);
    }

    #[test]
    fn exact_identities_hold() {
        let g = make_grid(1.0, 128).unwrap();
        for prop in [PropertyId::IbpExact, PropertyId::RlCaputo, PropertyId::EvenEnergy] {
            let r = verify(prop, &params(0.6, 2.0), &g, 20, 3).unwrap();
            assert!(r.passed, "{r:?}");
            assert!(r.worst_margin.abs() <= 1e-12);
        }
    }

    #[test]
    fn suite_skips_and_orders() {
        let g = make_grid(1.0, 64).unwrap();
        let reps = run_suite(&[params(0.3, 2.0)], &g, 5);
        assert_eq!(reps.len(), 13);
        let order: Vec<PropertyId> = reps.iter().map(|r| r.property).collect();
        assert_eq!(order, PropertyId::ALL.to_vec());
        let sup = &reps[7];
        assert_eq!(sup.status, Status::Skipped);
        assert!(sup.reason.as_deref().unwrap().contains("alpha > 1/p"));
        assert!(run_suite(&[], &g, 5).is_empty());
    }

    #[test]
    fn deterministic() {
        let g = make_grid(1.0, 64).unwrap();
        let a = verify(PropertyId::YoungBound, &params(0.4, 3.0), &g, 10, 9).unwrap();
        let b = verify(PropertyId::YoungBound, &params(0.4, 3.0), &g, 10, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn passed_iff_margin_within_tolerance() {
        let g = make_grid(1.0, 64).unwrap();
        for r in run_suite(&[params(0.8, 1.5)], &g, 11) {
            if r.status != Status::Skipped {
                assert_eq!(r.passed, r.worst_margin >= -r.tolerance_used, "{r:?}");
            }
        }
    }
}
