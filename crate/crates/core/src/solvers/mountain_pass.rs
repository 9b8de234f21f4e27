use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::{armijo, axpy, dot, energy_or_inf, golden_max, normalize, require, sine_mode, Method, Metric, SolveReport};
use crate::energy::ProblemState;
use crate::error::{invalid, Error, Result};
use crate::grid::GridFunction;
use crate::nonlinearity::{Family, Regime};

/// Ray doublings allowed while looking for a negative-energy endpoint.
const RAY_BUDGET: usize = 60;
/// Extra random directions probed by the rim check.
const RIM_DIRECTIONS: usize = 8;
const GOLDEN_ITERS: usize = 60;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MountainPassReport {
    #[serde(flatten)]
    pub report: SolveReport,
    /// Radius ρ of the sphere where the rim value was measured.
    pub rim_radius: f64,
    /// β = min over probed directions w of E(ρw); positive on success.
    pub rim_value: f64,
    /// Energy at the far path endpoint e.
    pub endpoint_energy: f64,
    #[serde(skip)]
    pub endpoint: GridFunction,
}

/// Path deformation between 0 and a negative-energy endpoint `e`.
///
/// The path is the polyline `0 → v → e`. Each sweep locates its highest point
/// `u` (grid scan of `path_points` per segment plus golden refinement), stops
/// when the residual at `u` is at most `tol`, and otherwise moves the middle
/// vertex to `u` pushed downhill by one Armijo step along `−M⁻¹∇E(u)`.
pub fn mountain_pass(st: &ProblemState, path_points: usize, tol: f64, max_iter: usize, seed: u64) -> Result<MountainPassReport> {
    if matches!(st.spec.family, Family::SublinearPower | Family::Source) {
        return Err(invalid("mountain_pass needs a superlinear nonlinearity"));
    }
    require(st, Regime::Superlinear, &["S0", "S1", "S2"], "mountain_pass")?;
    if path_points < 3 {
        return Err(invalid("path_points must be at least 3"));
    }
    let metric = Metric::new(st)?;
    let phi = normalize(st, &sine_mode(st, 1));

    let mut s = 1.0;
    let mut found = false;
    for _ in 0..RAY_BUDGET {
        if energy_or_inf(st, &scale(&phi, s)) < 0.0 {
            found = true;
            break;
        }
        s *= 2.0;
    }
    if !found {
        return Err(Error::Geometry(format!("no negative-energy point on the test ray up to s = {s:e}")));
    }
    let e = scale(&phi, s);
    let endpoint_energy = st.energy_x(&e)?;
    let (rim_radius, rim_value) = rim_check(st, &phi, seed)?;

    let mut v = scale(&e, 0.5);
    let mut iters = 0;
    let (mut u, mut residual, mut energy);
    loop {
        u = path_maximum(st, &v, &e, path_points);
        let g = st.partials_x(&u)?;
        residual = st.residual_from_partials(&g);
        energy = st.energy_x(&u)?;
        if residual <= tol || iters >= max_iter {
            break;
        }
        let d: Vec<f64> = metric.solve(&g).iter().map(|x| -x).collect();
        v = match armijo(st, &u, energy, dot(&g, &d), &d) {
            Some((a, _)) => axpy(&u, a, &d),
            None => break,
        };
        iters += 1;
    }
    let mut report = SolveReport::new(st, &u, energy, residual, iters, residual <= tol, Method::MountainPass);
    report.seed = seed;
    Ok(MountainPassReport {
        report,
        rim_radius,
        rim_value,
        endpoint_energy,
        endpoint: GridFunction::from_interior(&e),
    })
}

fn scale(x: &[f64], s: f64) -> Vec<f64> {
    x.iter().map(|v| s * v).collect()
}

/// Energy for maximization: failed evaluations count as `−∞`.
fn height(st: &ProblemState, x: &[f64]) -> f64 {
    st.energy_x(x).unwrap_or(f64::NEG_INFINITY)
}

/// Highest point on the polyline `0 → v → e`.
fn path_maximum(st: &ProblemState, v: &[f64], e: &[f64], m: usize) -> Vec<f64> {
    let zero = vec![0.0; v.len()];
    let mut best: Option<(f64, Vec<f64>)> = None;
    for (a, b) in [(&zero[..], v), (v, e)] {
        let at = |s: f64| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + s * (y - x)).collect() };
        let step = 1.0 / (m - 1) as f64;
        let vals: Vec<f64> = (0..m).map(|k| height(st, &at(k as f64 * step))).collect();
        let j = (0..m).fold(0, |bj, k| if vals[k] > vals[bj] { k } else { bj });
        let lo = j.saturating_sub(1) as f64 * step;
        let hi = (j + 1).min(m - 1) as f64 * step;
        let x = at(golden_max(|s| height(st, &at(s)), lo, hi, GOLDEN_ITERS));
        let val = height(st, &x);
        if best.as_ref().is_none_or(|(bv, _)| val > *bv) {
            best = Some((val, x));
        }
    }
    best.map(|(_, x)| x).unwrap_or(zero)
}

/// Radius half the smallest ray-maximizer distance over probed unit directions,
/// and the least energy found on that sphere.
fn rim_check(st: &ProblemState, phi: &[f64], seed: u64) -> Result<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dirs = vec![phi.to_vec()];
    for _ in 0..RIM_DIRECTIONS {
        let modes = 8;
        let c: Vec<f64> = (0..modes).map(|_| StandardNormal.sample(&mut rng)).collect();
        let mut w = vec![0.0; phi.len()];
        for (k, ck) in c.iter().enumerate() {
            for (wi, si) in w.iter_mut().zip(sine_mode(st, k + 1)) {
                *wi += ck * si;
            }
        }
        dirs.push(normalize(st, &w));
    }
    let mut min_peak = f64::INFINITY;
    for w in &dirs {
        let mut top = 1.0;
        let mut k = 0;
        while energy_or_inf(st, &scale(w, top)) >= 0.0 {
            top *= 2.0;
            k += 1;
            if k > RAY_BUDGET {
                return Err(Error::Geometry("ray energy never turns negative".into()));
            }
        }
        let grid: Vec<f64> = (0..=200).map(|i| top * 10f64.powf(-6.0 + 6.0 * i as f64 / 200.0)).collect();
        let vals: Vec<f64> = grid.iter().map(|s| height(st, &scale(w, *s))).collect();
        let j = (0..grid.len()).fold(0, |bj, i| if vals[i] > vals[bj] { i } else { bj });
        let lo = grid[j.saturating_sub(1)];
        let hi = grid[(j + 1).min(grid.len() - 1)];
        let peak = golden_max(|s| height(st, &scale(w, s)), lo, hi, GOLDEN_ITERS);
        min_peak = min_peak.min(peak);
    }
    let rho = 0.5 * min_peak;
    let beta = dirs
        .iter()
        .map(|w| energy_or_inf(st, &scale(w, rho)))
        .fold(f64::INFINITY, f64::min);
    if !(beta > 0.0) {
        return Err(Error::Geometry(format!("rim value {beta:e} at radius {rho:e} is not positive")));
    }
    Ok((rho, beta))
}
