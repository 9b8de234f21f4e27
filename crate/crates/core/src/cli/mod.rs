//! Command-line front end.
//!
//! Exit codes: 0 success, 1 configuration or argument error, 2 solver not
//! converged or a property/hypothesis failed, 3 I/O failure.

mod config;
mod csvio;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

pub use config::{load_config, OutputConfig, ProblemConfig, RunConfig, SolverConfig};
pub use csvio::{format_columns, read_columns, write_columns};

use crate::energy::ProblemState;
use crate::error::{Error, Result};
use crate::fracops::{apply, build_operators, OpKind};
use crate::grid::{make_grid, FracParams, GridFunction};
use crate::nonlinearity::{validate_hypotheses, Family, Regime};
use crate::solvers::{minimize_direct, mountain_pass, multiplicity_search, Method};
use crate::verify::{run_suite, verify, PropertyId, Status, SUITE_SAMPLES};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_FAILED: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// Samples drawn by the `hypotheses` subcommand.
pub const HYPOTHESIS_SAMPLES: usize = 1000;

#[derive(Debug, Parser)]
#[command(name = "fracplap", version, about = "Mixed fractional p-Laplacian toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the configured solver; write the solution CSV and the report JSON.
    Solve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the property suite, or one property, and print the reports as JSON.
    Verify {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        p: f64,
        #[arg(long = "T", default_value_t = 1.0)]
        t_end: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, value_enum)]
        property: Option<PropertyId>,
        #[arg(long, default_value_t = SUITE_SAMPLES)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Apply a fractional operator to a uniformly sampled `t,u` CSV.
    Apply {
        #[arg(long, value_enum)]
        kind: OpKind,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Check the growth hypotheses of the configured nonlinearity.
    Hypotheses {
        #[arg(long)]
        config: PathBuf,
    },
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => EXIT_IO,
        Error::Geometry(_) => EXIT_FAILED,
        _ => EXIT_CONFIG,
    }
}

fn run(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Solve { config } => solve(&load_config(&config)?),
        Command::Verify { alpha, p, t_end, n, seed, property, samples, out } => {
            let params = FracParams::new(alpha, p, t_end)?;
            let grid = make_grid(t_end, n)?;
            let reports = match property {
                Some(prop) => vec![verify(prop, &params, &grid, samples, seed)?],
                None => run_suite(&[params], &grid, seed),
            };
            emit_json(&reports, out.as_deref())?;
            let ok = reports.iter().all(|r| r.status != Status::Failed);
            Ok(if ok { EXIT_OK } else { EXIT_FAILED })
        }
        Command::Apply { kind, alpha, input, output } => {
            let (t, u) = read_columns(&input)?;
            let grid = uniform_grid(&t)?;
            let params = FracParams::new(alpha, 2.0, grid.t_end)?;
            let ops = build_operators(&params, &grid);
            let v = apply(&ops, kind, &GridFunction::free(u))?;
            write_columns(&output, &t, &v.values)?;
            Ok(EXIT_OK)
        }
        Command::Hypotheses { config } => {
            let cfg = load_config(&config)?;
            let regime = match cfg.nonlinearity.family {
                Family::SuperlinearPower => Regime::Superlinear,
                _ => Regime::Sublinear,
            };
            let report = validate_hypotheses(
                &cfg.nonlinearity,
                &cfg.params(),
                regime,
                HYPOTHESIS_SAMPLES,
                cfg.solver.seed,
            );
            emit_json(&report, None)?;
            Ok(if report.all_hold() { EXIT_OK } else { EXIT_FAILED })
        }
    }
}

/// Grid implied by sample times `0 = t_0 < … < t_n`, which must be equispaced.
fn uniform_grid(t: &[f64]) -> Result<crate::grid::Grid> {
    if t.len() < 3 {
        return Err(Error::InvalidArgument("need at least 3 rows".into()));
    }
    if t[0] != 0.0 {
        return Err(Error::InvalidArgument(format!("first t must be 0, got {}", t[0])));
    }
    let n = t.len() - 1;
    let grid = make_grid(t[n], n)?;
    for (i, ti) in t.iter().enumerate() {
        if (ti - grid.node(i)).abs() > 1e-9 * grid.t_end {
            return Err(Error::InvalidArgument(format!("t is not uniform at row {}", i + 1)));
        }
    }
    Ok(grid)
}

fn json_text<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn emit_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    let text = json_text(value);
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::Io(format!("stdout: {e}"))),
    }
}

fn solve(cfg: &RunConfig) -> Result<i32> {
    let s = &cfg.solver;
    let st = ProblemState::new(cfg.params(), cfg.grid(), cfg.nonlinearity.clone(), s.eps_reg)?;
    let nodes = st.grid.nodes();
    let out = &cfg.output;
    let (solution, report, converged) = match s.method {
        Method::Direct => {
            let t_end = st.grid.t_end;
            let init = GridFunction::dirichlet_clamped(
                st.grid
                    .sample(|t| s.init_amplitude * (std::f64::consts::PI * t / t_end).sin()),
            );
            let mut r = minimize_direct(&st, &init, s.tol, s.max_iter)?;
            r.seed = s.seed;
            (r.solution.clone(), json_text(&r), r.converged)
        }
        Method::MountainPass => {
            let mut r = mountain_pass(&st, s.path_points, s.tol, s.max_iter, s.seed)?;
            r.report.seed = s.seed;
            (r.report.solution.clone(), json_text(&r), r.report.converged)
        }
        Method::Multiplicity => {
            let mut r = multiplicity_search(&st, s.k, s.tol, s.seed)?;
            for pair in &mut r.pairs {
                pair.positive.seed = s.seed;
                pair.negative.seed = s.seed;
            }
            let first = r
                .pairs
                .first()
                .map(|p| p.positive.solution.clone())
                .unwrap_or_else(|| GridFunction::from_interior(&vec![0.0; st.dim()]));
            let ok = r.converged_count >= r.requested;
            (first, json_text(&r), ok)
        }
    };
    write_columns(Path::new(&out.solution_path), &nodes, &solution.values)?;
    std::fs::write(&out.report_path, report)
        .map_err(|e| Error::Io(format!("{}: {e}", out.report_path)))?;
    Ok(if converged { EXIT_OK } else { EXIT_FAILED })
}
