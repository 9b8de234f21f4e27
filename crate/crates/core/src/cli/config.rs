//! Run configuration: strict JSON schema, eager validation, key-path diagnostics.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::energy::DEFAULT_EPS_REG;
use crate::error::{Error, Result};
use crate::grid::{make_grid, FracParams, Grid, MAX_N};
use crate::nonlinearity::NonlinearitySpec;
use crate::solvers::Method;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    pub nonlinearity: NonlinearitySpec,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub alpha: f64,
    pub p: f64,
    #[serde(rename = "T")]
    pub t_end: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub method: Method,
    pub tol: f64,
    pub max_iter: usize,
    /// Pairs requested by the multiplicity search.
    pub k: usize,
    pub seed: u64,
    pub eps_reg: f64,
    /// Samples per polyline segment in the mountain-pass search.
    pub path_points: usize,
    /// Amplitude of the `sin(πt/T)` start of direct minimization.
    pub init_amplitude: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            method: Method::Direct,
            tol: 1e-6,
            max_iter: 10_000,
            k: 3,
            seed: 42,
            eps_reg: DEFAULT_EPS_REG,
            path_points: 21,
            init_amplitude: 0.1,
        }
    }
}

/// Relative paths resolve against the working directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub solution_path: String,
    pub report_path: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            solution_path: "solution.csv".into(),
            report_path: "report.json".into(),
        }
    }
}

fn config_err(path: &str, message: impl Into<String>) -> Error {
    Error::Config { path: path.to_string(), message: message.into() }
}

impl RunConfig {
    /// Parses and validates; errors name the offending key.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner().to_string();
            let inner = inner.split(" at line ").next().unwrap_or_default().to_string();
            if path == "." {
                config_err("config", inner)
            } else {
                config_err(&path, inner)
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let pr = &self.problem;
        if !(pr.alpha > 0.0 && pr.alpha <= 1.0) {
            return Err(config_err("problem.alpha", "out of (0,1]"));
        }
        if !(pr.p > 1.0 && pr.p.is_finite()) {
            return Err(config_err("problem.p", "must exceed 1"));
        }
        if !(pr.t_end > 0.0 && pr.t_end.is_finite()) {
            return Err(config_err("problem.T", "must be positive"));
        }
        if !(2..=MAX_N).contains(&pr.n) {
            return Err(config_err("problem.n", format!("must lie in [2, {MAX_N}]")));
        }
        self.nonlinearity
            .check(pr.t_end)
            .map_err(|(field, msg)| config_err(&format!("nonlinearity.{field}"), msg))?;
        let s = &self.solver;
        if !(s.tol > 0.0 && s.tol.is_finite()) {
            return Err(config_err("solver.tol", "must be positive"));
        }
        if s.max_iter == 0 {
            return Err(config_err("solver.max_iter", "must be positive"));
        }
        if s.k == 0 {
            return Err(config_err("solver.k", "must be positive"));
        }
        if !(s.eps_reg >= 0.0 && s.eps_reg.is_finite()) {
            return Err(config_err("solver.eps_reg", "must be non-negative"));
        }
        if s.path_points < 3 {
            return Err(config_err("solver.path_points", "must be at least 3"));
        }
        if !(s.init_amplitude > 0.0 && s.init_amplitude.is_finite()) {
            return Err(config_err("solver.init_amplitude", "must be positive"));
        }
        for (key, v) in [
            ("output.solution_path", &self.output.solution_path),
            ("output.report_path", &self.output.report_path),
        ] {
            if v.is_empty() {
                return Err(config_err(key, "must not be empty"));
            }
        }
        Ok(())
    }

    pub fn params(&self) -> FracParams {
        FracParams::new(self.problem.alpha, self.problem.p, self.problem.t_end).expect("validated")
    }

    pub fn grid(&self) -> Grid {
        make_grid(self.problem.t_end, self.problem.n).expect("validated")
    }

    /// Canonical JSON text (keys in declared order, defaults filled in).
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    RunConfig::from_json(&text)
}
