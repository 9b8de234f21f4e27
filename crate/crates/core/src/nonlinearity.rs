//! Nonlinearity families `f(t, u)` with exact antiderivatives `F(t, u) = ∫₀ᵘ f(t, s) ds`,
//! and sampled validators for the two hypothesis regimes.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{make_grid, FracParams};

/// Positive coefficient functions of `t`, given in closed form or as a nodal table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Coefficient {
    Constant { value: f64 },
    /// `c0 + c1·t`
    Affine { c0: f64, c1: f64 },
    /// `offset + amplitude·sin(π·wavenumber·t)`
    Sinusoidal {
        offset: f64,
        amplitude: f64,
        wavenumber: f64,
    },
    /// Piecewise-linear interpolation of `(t, values)`; no extrapolation.
    Table { t: Vec<f64>, values: Vec<f64> },
}

impl Coefficient {
    pub fn constant(value: f64) -> Self {
        Coefficient::Constant { value }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Coefficient::Constant { value } => *value,
            Coefficient::Affine { c0, c1 } => c0 + c1 * t,
            Coefficient::Sinusoidal {
                offset,
                amplitude,
                wavenumber,
            } => offset + amplitude * (PI * wavenumber * t).sin(),
            Coefficient::Table { t: ts, values } => {
                let k = match ts.iter().position(|&x| x >= t) {
                    Some(0) => return values[0],
                    Some(k) => k,
                    None => return *values.last().unwrap_or(&f64::NAN),
                };
                let s = (t - ts[k - 1]) / (ts[k] - ts[k - 1]);
                values[k - 1] + s * (values[k] - values[k - 1])
            }
        }
    }

    /// Checks table shape and coverage of `[0, T]`; returns a message on failure.
    pub fn check_shape(&self, t_end: f64) -> std::result::Result<(), String> {
        match self {
            Coefficient::Table { t, values } => {
                if t.len() < 2 || t.len() != values.len() {
                    return Err("table needs matching t and values with at least 2 entries".into());
                }
                if t.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err("table t must be strictly increasing".into());
                }
                if t[0] > 0.0 || t[t.len() - 1] < t_end {
                    return Err("table t must cover [0, T]".into());
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err("table values must be finite".into());
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Piecewise-linear `f(u)` on knots `u`, exactly integrated for `F`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValueTable {
    pub u: Vec<f64>,
    pub f: Vec<f64>,
}

impl ValueTable {
    pub fn check_shape(&self) -> std::result::Result<(), String> {
        if self.u.len() < 2 || self.u.len() != self.f.len() {
            return Err("table needs matching u and f with at least 2 entries".into());
        }
        if self.u.windows(2).any(|w| !(w[1] > w[0])) {
            return Err("table u must be strictly increasing".into());
        }
        if !(self.u[0] <= 0.0 && self.u[self.u.len() - 1] >= 0.0) {
            return Err("table u range must contain 0".into());
        }
        Ok(())
    }

    fn segment(&self, x: f64) -> Result<usize> {
        let m = self.u.len();
        if !(x >= self.u[0] && x <= self.u[m - 1]) {
            return Err(Error::Extrapolation(format!(
                "u = {x} outside table range [{}, {}]",
                self.u[0],
                self.u[m - 1]
            )));
        }
        Ok(self.u.windows(2).position(|w| x <= w[1]).unwrap_or(m - 2))
    }

    fn value_slope(&self, x: f64) -> Result<(f64, f64)> {
        let k = self.segment(x)?;
        let slope = (self.f[k + 1] - self.f[k]) / (self.u[k + 1] - self.u[k]);
        Ok((self.f[k] + slope * (x - self.u[k]), slope))
    }

    /// `∫_{u_0}^{x} f`, exact for the linear interpolant.
    fn primitive(&self, x: f64) -> Result<f64> {
        let k = self.segment(x)?;
        let mut acc = 0.0;
        for j in 0..k {
            acc += 0.5 * (self.f[j] + self.f[j + 1]) * (self.u[j + 1] - self.u[j]);
        }
        let (fx, _) = self.value_slope(x)?;
        Ok(acc + 0.5 * (self.f[k] + fx) * (x - self.u[k]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Family {
    /// `f = q·a(t)|u|^{q−2}u`, `F = a(t)|u|^q`
    SublinearPower,
    /// `f = |u|^{μ−2}u`, `F = |u|^μ/μ`
    SuperlinearPower,
    /// `f = a(t)·g(u)` with `g` piecewise linear
    Table,
    /// `f = a(t)`, `F = a(t)·u` (pure forcing term)
    Source,
}

/// A nonlinearity with all constants resolved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "RawSpec")]
pub struct NonlinearitySpec {
    pub family: Family,
    pub q: f64,
    pub mu: f64,
    pub r: f64,
    pub a_coeff: Coefficient,
    pub b_coeff: Coefficient,
    pub b_const: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<ValueTable>,
}

/// Wire form: family-dependent constants may be omitted and are filled in.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    family: Family,
    q: Option<f64>,
    mu: Option<f64>,
    r: Option<f64>,
    a_coeff: Option<Coefficient>,
    b_coeff: Option<Coefficient>,
    b_const: Option<f64>,
    table: Option<ValueTable>,
}

impl From<RawSpec> for NonlinearitySpec {
    fn from(raw: RawSpec) -> Self {
        let a = raw.a_coeff.unwrap_or(Coefficient::constant(1.0));
        let (q, mu) = match raw.family {
            Family::SuperlinearPower => {
                let mu = raw.mu.or(raw.q).unwrap_or(f64::NAN);
                (raw.q.unwrap_or(mu), mu)
            }
            _ => {
                let q = raw.q.or(raw.mu).unwrap_or(f64::NAN);
                (q, raw.mu.unwrap_or(q))
            }
        };
        let b_const = raw.b_const.unwrap_or(match raw.family {
            Family::SuperlinearPower => 1.0 / mu,
            _ => 1.0,
        });
        NonlinearitySpec {
            family: raw.family,
            q,
            mu,
            r: raw.r.unwrap_or(1.0),
            b_coeff: raw.b_coeff.unwrap_or_else(|| a.clone()),
            a_coeff: a,
            b_const,
            table: raw.table,
        }
    }
}

impl NonlinearitySpec {
    /// `F = a|u|^q`, with growth coefficient `b = a` and `μ = q`.
    pub fn sublinear(q: f64, a: Coefficient) -> Self {
        Self {
            family: Family::SublinearPower,
            q,
            mu: q,
            r: 1.0,
            b_coeff: a.clone(),
            a_coeff: a,
            b_const: 1.0,
            table: None,
        }
    }

    /// `F = |u|^μ/μ`, with growth exponent `q = μ` and `b = 1/μ`.
    pub fn superlinear(mu: f64) -> Self {
        Self {
            family: Family::SuperlinearPower,
            q: mu,
            mu,
            r: 1.0,
            a_coeff: Coefficient::constant(1.0),
            b_coeff: Coefficient::constant(1.0),
            b_const: 1.0 / mu,
            table: None,
        }
    }

    /// Forcing term `f(t, u) = s(t)`.
    pub fn source(s: Coefficient) -> Self {
        Self {
            family: Family::Source,
            q: f64::NAN,
            mu: f64::NAN,
            r: 1.0,
            b_coeff: s.clone(),
            a_coeff: s,
            b_const: 1.0,
            table: None,
        }
    }

    /// `f(t, u) = a(t)·g(u)` with `g` interpolating the table.
    pub fn tabulated(table: ValueTable, a: Coefficient, q: f64, mu: f64) -> Self {
        Self {
            family: Family::Table,
            q,
            mu,
            r: 1.0,
            b_coeff: a.clone(),
            a_coeff: a,
            b_const: 1.0,
            table: Some(table),
        }
    }

    /// Whether `F(t, ·)` is even by construction.
    pub fn is_even_family(&self) -> bool {
        matches!(self.family, Family::SublinearPower | Family::SuperlinearPower)
    }

    /// Field-level checks; the error names the offending field.
    pub fn check(&self, t_end: f64) -> std::result::Result<(), (&'static str, String)> {
        let need = |name: &'static str, v: f64, lo: f64| {
            if v.is_finite() && v > lo {
                Ok(())
            } else {
                Err((name, format!("must be a finite number above {lo}")))
            }
        };
        match self.family {
            Family::SublinearPower => {
                need("q", self.q, 1.0)?;
                need("mu", self.mu, 1.0)?;
            }
            Family::SuperlinearPower => {
                need("mu", self.mu, 1.0)?;
                need("q", self.q, 1.0)?;
                need("b_const", self.b_const, 0.0)?;
                need("r", self.r, 0.0)?;
            }
            Family::Table => {
                let t = self.table.as_ref().ok_or(("table", "required for TABLE".to_string()))?;
                t.check_shape().map_err(|m| ("table", m))?;
            }
            Family::Source => {}
        }
        self.a_coeff.check_shape(t_end).map_err(|m| ("a_coeff", m))?;
        self.b_coeff.check_shape(t_end).map_err(|m| ("b_coeff", m))?;
        if self.family != Family::Source {
            let g = make_grid(t_end, 255).map_err(|e| ("a_coeff", e.to_string()))?;
            for (name, c) in [("a_coeff", &self.a_coeff), ("b_coeff", &self.b_coeff)] {
                if g.nodes().iter().any(|&t| !(c.eval(t) > 0.0)) {
                    return Err((name, "must be positive at every node".to_string()));
                }
            }
        }
        Ok(())
    }
}

/// `(f(t, u), F(t, u))`.
pub fn eval(spec: &NonlinearitySpec, t: f64, u: f64) -> Result<(f64, f64)> {
    Ok(match spec.family {
        Family::SublinearPower => {
            let a = spec.a_coeff.eval(t);
            let m = u.abs();
            let f = (spec.q * a * m.powf(spec.q - 1.0)).copysign(u);
            let f = if u == 0.0 { 0.0 } else { f };
            (f, a * m.powf(spec.q))
        }
        Family::SuperlinearPower => {
            let m = u.abs();
            let f = if u == 0.0 { 0.0 } else { m.powf(spec.mu - 1.0).copysign(u) };
            (f, m.powf(spec.mu) / spec.mu)
        }
        Family::Table => {
            let tab = spec
                .table
                .as_ref()
                .ok_or_else(|| Error::InvalidArgument("TABLE family without table".into()))?;
            let a = spec.a_coeff.eval(t);
            let (g, _) = tab.value_slope(u)?;
            let big = tab.primitive(u)? - tab.primitive(0.0)?;
            (a * g, a * big)
        }
        Family::Source => {
            let s = spec.a_coeff.eval(t);
            (s, s * u)
        }
    })
}

/// `∂f/∂u`; at `u = 0` the power families use `|u| = 1e-12` to stay finite.
pub fn eval_du(spec: &NonlinearitySpec, t: f64, u: f64) -> Result<f64> {
    Ok(match spec.family {
        Family::SublinearPower => {
            let m = u.abs().max(1e-12);
            spec.q * (spec.q - 1.0) * spec.a_coeff.eval(t) * m.powf(spec.q - 2.0)
        }
        Family::SuperlinearPower => {
            let m = u.abs().max(1e-12);
            (spec.mu - 1.0) * m.powf(spec.mu - 2.0)
        }
        Family::Table => {
            let tab = spec
                .table
                .as_ref()
                .ok_or_else(|| Error::InvalidArgument("TABLE family without table".into()))?;
            spec.a_coeff.eval(t) * tab.value_slope(u)?.1
        }
        Family::Source => 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Regime {
    Sublinear,
    Superlinear,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisRecord {
    pub id: String,
    pub holds: bool,
    #[serde(serialize_with = "crate::numfmt::f64_or_sentinel")]
    pub worst_margin: f64,
    /// `(t, u)` where the worst margin occurred.
    pub witness: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub regime: Regime,
    pub records: Vec<HypothesisRecord>,
}

impl HypothesisReport {
    pub fn all_hold(&self) -> bool {
        self.records.iter().all(|r| r.holds)
    }

    pub fn get(&self, id: &str) -> Option<&HypothesisRecord> {
        self.records.iter().find(|r| r.id == id)
    }
}

/// Margins within this of zero are reported as exactly zero.
const SNAP: f64 = 1e-12;

struct Worst {
    margin: f64,
    witness: (f64, f64),
}

impl Worst {
    fn new() -> Self {
        Self {
            margin: f64::INFINITY,
            witness: (f64::NAN, f64::NAN),
        }
    }

    fn see(&mut self, margin: f64, t: f64, u: f64) {
        let margin = if margin.is_nan() { f64::NEG_INFINITY } else { margin };
        if margin < self.margin {
            self.margin = margin;
            self.witness = (t, u);
        }
    }

    fn record(self, id: &str) -> HypothesisRecord {
        let m = if self.margin.abs() <= SNAP { 0.0 } else { self.margin };
        HypothesisRecord {
            id: id.to_string(),
            holds: m >= 0.0,
            worst_margin: m,
            witness: self.witness,
        }
    }
}

/// Relative margin of `lhs ≤ rhs`.
fn rel_le(lhs: f64, rhs: f64) -> f64 {
    let scale = lhs.abs().max(rhs.abs());
    if scale == 0.0 {
        0.0
    } else {
        (rhs - lhs) / scale
    }
}

fn f_or_nan(spec: &NonlinearitySpec, t: f64, u: f64) -> (f64, f64) {
    eval(spec, t, u).unwrap_or((f64::NAN, f64::NAN))
}

/// Samples `(t, u)` pairs and records the worst signed margin of each hypothesis.
///
/// Sublinear regime reports `F1`–`F3`, superlinear regime `S0`–`S2`.
pub fn validate_hypotheses(
    spec: &NonlinearitySpec,
    params: &FracParams,
    regime: Regime,
    sample_count: usize,
    seed: u64,
) -> HypothesisReport {
    let nodes = make_grid(params.t_end, 255).expect("valid T").nodes();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // tabulated nonlinearities are only defined on their table range
    let (lo, hi) = match &spec.table {
        Some(tab) if spec.family == Family::Table => (tab.u[0], tab.u[tab.u.len() - 1]),
        _ => (f64::NEG_INFINITY, f64::INFINITY),
    };
    let top = hi.max(-lo).min(1e3).log10().max(-6.0);
    let samples: Vec<(f64, f64)> = (0..sample_count)
        .map(|_| {
            let t = nodes[rng.random_range(0..nodes.len())];
            let mag = 10f64.powf(rng.random_range(-6.0..=top));
            let u = if rng.random_bool(0.5) { mag } else { -mag };
            let u = if (lo..=hi).contains(&u) { u } else { -u };
            (t, u.clamp(lo, hi))
        })
        .collect();
    let p = params.p;
    let records = match regime {
        Regime::Sublinear => {
            let (q, mu) = (spec.q, spec.mu);
            let mut f1 = Worst::new();
            f1.see(((q - 1.0).min(p - q)) / p, f64::NAN, f64::NAN);
            for &t in &nodes {
                f1.see(-f_or_nan(spec, t, 0.0).1.abs(), t, 0.0);
                let a = spec.a_coeff.eval(t);
                let b = spec.b_coeff.eval(t);
                f1.see(a.min(b).signum(), t, f64::NAN);
            }
            let mut f2 = Worst::new();
            f2.see(((mu - 1.0).min(q - mu).min(p - q)) / p, f64::NAN, f64::NAN);
            let mut f3 = Worst::new();
            for &(t, u) in &samples {
                let (f, big) = f_or_nan(spec, t, u);
                let a = spec.a_coeff.eval(t);
                let b = spec.b_coeff.eval(t);
                let m = u.abs();
                f1.see(rel_le(a * m.powf(q), big), t, u);
                f1.see(rel_le(f.abs(), q * b * m.powf(q - 1.0)), t, u);
                f2.see(rel_le(f * u, mu * big), t, u);
                let (_, big_neg) = f_or_nan(spec, t, -u);
                let scale = big.abs().max(big_neg.abs());
                let gap = if scale == 0.0 { 0.0 } else { (big - big_neg).abs() / scale };
                f3.see(-gap, t, u);
            }
            vec![f1.record("F1"), f2.record("F2"), f3.record("F3")]
        }
        Regime::Superlinear => {
            let (q, mu) = (spec.q, spec.mu);
            let mut s0 = Worst::new();
            let upper = params.critical_exponent().map_or(f64::INFINITY, |pt| pt - q);
            s0.see((q - p).min(upper) / p, f64::NAN, f64::NAN);
            s0.see(spec.b_const.signum(), f64::NAN, f64::NAN);
            let mut s1 = Worst::new();
            s1.see((mu - p) / p, f64::NAN, f64::NAN);
            s1.see(spec.r.signum(), f64::NAN, f64::NAN);
            for &t in &nodes {
                s0.see(-f_or_nan(spec, t, 0.0).1.abs(), t, 0.0);
            }
            for &(t, u) in &samples {
                let (f, big) = f_or_nan(spec, t, u);
                s0.see(rel_le(f.abs(), q * spec.b_const * u.abs().powf(q - 1.0)), t, u);
                if u.abs() >= spec.r {
                    s1.see(rel_le(mu * big, f * u), t, u);
                    s1.see(if big > 0.0 { 0.0 } else { -1.0 }, t, u);
                }
            }
            let mut s2 = Worst::new();
            for &t in &nodes {
                for sign in [1.0, -1.0] {
                    let ratio = |k: i32| {
                        let xi = sign * 2f64.powi(-k);
                        f_or_nan(spec, t, xi).0.abs() / xi.abs().powf(p - 1.0)
                    };
                    let mut prev = ratio(0);
                    for k in 1..=40 {
                        let cur = ratio(k);
                        let scale = prev.abs().max(f64::MIN_POSITIVE);
                        s2.see((prev - cur) / scale, t, sign * 2f64.powi(-k));
                        prev = cur;
                    }
                    s2.see((1e-6 - prev) / 1e-6, t, sign * 2f64.powi(-40));
                }
            }
            vec![s0.record("S0"), s1.record("S1"), s2.record("S2")]
        }
    };
    HypothesisReport { regime, records }
}
