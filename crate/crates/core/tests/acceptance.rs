//! Acceptance criteria 1 to 11. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use fracplap::energy::{energy, ProblemState, DEFAULT_EPS_REG};
use fracplap::nonlinearity::{Coefficient, NonlinearitySpec};
use fracplap::solvers::{minimize_direct, mountain_pass, multiplicity_search, regularity_check};
use fracplap::verify::{verify, PropertyId};
use fracplap::{apply, build_operators, make_grid, sup_norm, FracParams, GridFunction, OpKind};
use statrs::function::gamma::gamma;

struct Outcome {
    pass: bool,
    summary: String,
}

fn outcome(pass: bool, summary: impl Into<String>) -> Outcome {
    Outcome { pass, summary: summary.into() }
}

fn state(alpha: f64, p: f64, n: usize, spec: NonlinearitySpec) -> ProblemState {
    let params = FracParams::new(alpha, p, 1.0).unwrap();
    ProblemState::new(params, make_grid(1.0, n).unwrap(), spec, DEFAULT_EPS_REG).unwrap()
}

fn sublinear_state(alpha: f64, n: usize) -> ProblemState {
    state(alpha, 2.0, n, NonlinearitySpec::sublinear(1.5, Coefficient::constant(1.0)))
}

fn sine_start(st: &ProblemState) -> GridFunction {
    GridFunction::dirichlet_clamped(st.grid.sample(|t| 0.1 * (PI * t).sin()))
}

/// Largest interior error relative to the largest interior exact value.
fn power_rule_error(kind: OpKind, alpha: f64, k: i32, n: usize) -> f64 {
    let g = make_grid(1.0, n).unwrap();
    let ops = build_operators(&FracParams::new(alpha, 2.0, 1.0).unwrap(), &g);
    let u = GridFunction::free(g.sample(|t| t.powi(k)));
    let got = apply(&ops, kind, &u).unwrap().values;
    let kf = k as f64;
    let (coef, expo) = match kind {
        OpKind::LeftDeriv => (gamma(kf + 1.0) / gamma(kf + 1.0 - alpha), kf - alpha),
        OpKind::LeftInt => (gamma(kf + 1.0) / gamma(kf + 1.0 + alpha), kf + alpha),
        _ => unreachable!(),
    };
    let (mut err, mut scale) = (0.0f64, 0.0f64);
    for i in 1..n {
        let exact = coef * g.node(i).powf(expo);
        err = err.max((got[i] - exact).abs());
        scale = scale.max(exact.abs());
    }
    err / scale
}

fn c1() -> Outcome {
    let t0 = Instant::now();
    let mut pass = true;
    let mut worst_err = 0.0f64;
    let mut worst_ratio = 0.0f64;
    for kind in [OpKind::LeftDeriv, OpKind::LeftInt] {
        for k in [1, 2] {
            for alpha in [0.3, 0.5, 0.7] {
                let e1 = power_rule_error(kind, alpha, k, 1024);
                let e2 = power_rule_error(kind, alpha, k, 2048);
                worst_err = worst_err.max(e1);
                // an error at the rounding floor cannot halve further
                let at_floor = e1 <= 1e-12;
                if !at_floor {
                    worst_ratio = worst_ratio.max(e2 / e1);
                }
                let ok = e1 <= 0.02 && (at_floor || e2 / e1 <= 0.6);
                if !ok {
                    pass = false;
                    println!("    {kind:?} t^{k} alpha={alpha}: err={e1:.3e} ratio={:.3}", e2 / e1);
                }
            }
        }
    }
    let el = t0.elapsed();
    outcome(
        pass && el < Duration::from_secs(5),
        format!("worst sup rel error {worst_err:.3e}, worst ratio {worst_ratio:.3}, {el:.2?}"),
    )
}

const SWEEP: [(f64, f64); 9] = [
    (0.3, 1.5),
    (0.3, 2.0),
    (0.3, 3.0),
    (0.6, 1.5),
    (0.6, 2.0),
    (0.6, 3.0),
    (0.8, 1.5),
    (0.8, 2.0),
    (0.8, 3.0),
];

fn c2() -> Outcome {
    let g = make_grid(1.0, 256).unwrap();
    let mut worst = 0.0f64;
    let mut pass = true;
    for (a, p) in SWEEP {
        let params = FracParams::new(a, p, 1.0).unwrap();
        for prop in [PropertyId::IbpExact, PropertyId::RlCaputo, PropertyId::EvenEnergy] {
            let r = verify(prop, &params, &g, 100, 42).unwrap();
            worst = worst.max(r.worst_margin.abs());
            pass &= r.passed && r.worst_margin.abs() <= 1e-12;
        }
    }
    outcome(pass, format!("worst |margin| {worst:.3e} over 27 runs of 100 samples"))
}

fn c3() -> Outcome {
    let t0 = Instant::now();
    let g = make_grid(1.0, 256).unwrap();
    let props = [
        PropertyId::Semigroup,
        PropertyId::LeftInverse,
        PropertyId::YoungBound,
        PropertyId::Poincare,
        PropertyId::SupEmbed,
        PropertyId::EmbedLq,
        PropertyId::MonotoneGap,
    ];
    let (mut runs, mut skipped, mut pass) = (0, 0, true);
    for (a, p) in SWEEP {
        let params = FracParams::new(a, p, 1.0).unwrap();
        for prop in props {
            if fracplap::verify::precondition(prop, &params, &g).is_some() {
                skipped += 1;
                continue;
            }
            let r = verify(prop, &params, &g, 100, 42).unwrap();
            runs += 1;
            if !r.passed {
                pass = false;
                println!("    {prop:?} alpha={a} p={p}: margin {:.3e} tol {}", r.worst_margin, r.tolerance_used);
            }
        }
    }
    let el = t0.elapsed();
    outcome(
        pass && el < Duration::from_secs(60),
        format!("{runs} runs passed, {skipped} gated, {el:.2?}"),
    )
}

fn c4() -> Outcome {
    let g = make_grid(1.0, 128).unwrap();
    let mut pass = true;
    let mut worst = 0.0f64;
    for (a, p) in SWEEP {
        let params = FracParams::new(a, p, 1.0).unwrap();
        let r = verify(PropertyId::GradFd, &params, &g, 100, 42).unwrap();
        let limit = if p < 2.0 { 1e-4 } else { 1e-5 };
        worst = worst.max(-r.worst_margin);
        pass &= r.passed && -r.worst_margin <= limit;
    }
    outcome(pass, format!("worst relative error {worst:.3e}"))
}

fn c5() -> Outcome {
    let t0 = Instant::now();
    let src = Coefficient::Sinusoidal { offset: 0.0, amplitude: PI * PI, wavenumber: 1.0 };
    let st = state(1.0, 2.0, 512, NonlinearitySpec::source(src));
    let r = minimize_direct(&st, &GridFunction::dirichlet(vec![0.0; 513]).unwrap(), 1e-8, 10_000).unwrap();
    let err = r
        .solution
        .values
        .iter()
        .zip(st.grid.nodes())
        .map(|(u, t)| (u - (PI * t).sin()).abs())
        .fold(0.0, f64::max);
    let target = -PI * PI / 4.0;
    let el = t0.elapsed();
    let pass = r.converged
        && err <= 1e-3
        && (r.energy_value - target).abs() <= 2e-2
        && el < Duration::from_secs(30);
    outcome(pass, format!("sup error {err:.3e}, energy {:.6} vs {target:.6}, {el:.2?}", r.energy_value))
}

fn c6() -> Outcome {
    let st = sublinear_state(0.6, 256);
    let r = minimize_direct(&st, &sine_start(&st), 1e-6, 10_000).unwrap();
    let fine = sublinear_state(0.6, 2048);
    let rf = minimize_direct(&fine, &sine_start(&fine), 1e-6, 10_000).unwrap();
    let rel = (r.energy_value - rf.energy_value).abs() / rf.energy_value.abs();
    let pass = r.converged
        && r.residual <= 1e-6
        && r.energy_value < 0.0
        && sup_norm(&r.solution) > 1e-3
        && rel <= 1e-3;
    outcome(
        pass,
        format!(
            "converged={} residual {:.2e}, E(256) {:.6}, E(2048) {:.6}, relative gap {rel:.3e} (limit 1e-3)",
            r.converged, r.residual, r.energy_value, rf.energy_value
        ),
    )
}

fn c7() -> Outcome {
    let st = state(0.7, 2.0, 128, NonlinearitySpec::superlinear(4.0));
    let m = mountain_pass(&st, 21, 1e-5, 500, 42).unwrap();
    let r = &m.report;
    let e_end = energy(&st, &m.endpoint).unwrap();
    let pass = r.converged
        && !r.trivial
        && r.residual <= 1e-5
        && e_end < 0.0
        && 0.0 < m.rim_value
        && m.rim_value <= r.energy_value;
    outcome(
        pass,
        format!(
            "E(e) {e_end:.3} < 0 < beta {:.4} <= E {:.4}, residual {:.2e}",
            m.rim_value, r.energy_value, r.residual
        ),
    )
}

fn c8() -> Outcome {
    let st = sublinear_state(0.6, 256);
    let a = multiplicity_search(&st, 3, 1e-6, 42).unwrap();
    let b = multiplicity_search(&st, 3, 1e-6, 7).unwrap();
    let mut pass = a.pairs.len() >= 3 && b.pairs.len() >= 3;
    for pair in &a.pairs {
        let (ep, en) = (pair.positive.energy_value, pair.negative.energy_value);
        let e_neg = energy(&st, &pair.positive.solution.neg()).unwrap();
        pass &= ep < 0.0 && en < 0.0 && pair.positive.converged;
        pass &= (ep - e_neg).abs() <= 1e-12 * ep.abs();
    }
    for i in 0..a.pairs.len() {
        for j in 0..i {
            pass &= a.pairwise_distances[i][j] >= a.separation;
        }
    }
    let mut ea: Vec<f64> = a.pairs.iter().map(|p| p.positive.energy_value).collect();
    let mut eb: Vec<f64> = b.pairs.iter().map(|p| p.positive.energy_value).collect();
    ea.sort_by(f64::total_cmp);
    eb.sort_by(f64::total_cmp);
    for (x, y) in ea.iter().zip(&eb) {
        pass &= (x - y).abs() <= 1e-3 * x.abs();
    }
    let shown: Vec<String> = ea.iter().map(|e| format!("{e:.6e}")).collect();
    outcome(pass, format!("{} pairs, energies [{}], separation {:.2e}", a.pairs.len(), shown.join(", "), a.separation))
}

fn c9() -> Outcome {
    let mut devs = Vec::new();
    let mut pass = true;
    for n in [256, 512] {
        let st = sublinear_state(0.3, n);
        let r = minimize_direct(&st, &sine_start(&st), 1e-10, 10_000).unwrap();
        let g = regularity_check(&st, &r.solution).unwrap();
        pass &= r.converged && g.deviation <= 1e-2 * g.constant_estimate.abs() + 1e-6;
        devs.push(g.deviation);
    }
    pass &= devs[1] <= 0.7 * devs[0];
    outcome(pass, format!("deviation {:.3e} -> {:.3e} (ratio {:.3})", devs[0], devs[1], devs[1] / devs[0]))
}

fn c10() -> Outcome {
    let g = make_grid(1.0, 256).unwrap();
    let params = FracParams::new(0.4, 2.0, 1.0).unwrap();
    let r = verify(PropertyId::TranslationCompact, &params, &g, 20, 42).unwrap();
    let s16 = r.detail("sup_T/16").unwrap();
    let s32 = r.detail("sup_T/32").unwrap();
    let s64 = r.detail("sup_T/64").unwrap();
    let norm = r.detail("family_norm").unwrap();
    let pass = r.passed && s16 > s32 && s32 > s64 && s64 < 0.2 * norm;
    outcome(pass, format!("sup shifts {s16:.4} > {s32:.4} > {s64:.4}, bound at T/64 {:.4}", r.bound_constant.unwrap()))
}

fn run_cli(args: &[&str], dir: &Path) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_fracplap"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs");
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn c11() -> Outcome {
    let cfg = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/sublinear.json");
    let verify_args = ["verify", "--alpha", "0.5", "--p", "2", "--T", "1", "--n", "256", "--seed", "42"];
    let mut files = Vec::new();
    let mut stdout = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().unwrap();
        let (code_v, out_v) = run_cli(&verify_args, dir.path());
        let (code_s, _) = run_cli(&["solve", "--config", cfg], dir.path());
        stdout.push((code_v, out_v));
        let csv = std::fs::read(dir.path().join("sublinear_solution.csv")).unwrap_or_default();
        let json = std::fs::read(dir.path().join("sublinear_report.json")).unwrap_or_default();
        files.push((code_s, csv, json));
    }
    let pass = stdout[0] == stdout[1]
        && files[0] == files[1]
        && !stdout[0].1.is_empty()
        && !files[0].1.is_empty()
        && stdout[0].0 == 0
        && files[0].0 == 0;
    outcome(
        pass,
        format!(
            "verify output {} bytes, solution {} bytes, report {} bytes, byte-identical={}",
            stdout[0].1.len(),
            files[0].1.len(),
            files[0].2.len(),
            stdout[0] == stdout[1] && files[0] == files[1]
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("operator accuracy", c1),
        ("identity suite", c2),
        ("inequality suite", c3),
        ("gradient correctness", c4),
        ("classical limit", c5),
        ("sublinear existence", c6),
        ("mountain pass", c7),
        ("multiplicity", c8),
        ("regularity identity", c9),
        ("translation estimate", c10),
        ("determinism", c11),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {tag} {name}: {}", i + 1, o.summary);
        if !o.pass {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
