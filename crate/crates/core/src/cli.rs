//! Command-line front end.
//!
//! Exit codes: `0` when every requested check passes, `1` when a
//! certification, audit or solve check fails, `2` on configuration or input
//! errors.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::example::{self, AuditConfig, AuditReport};
use crate::grid::{Grid, PairFunction};
use crate::hybrid::{outer_solve, DEFAULT_A_MIN};
use crate::hypothesis::{full_report, Model, ProblemSpec, TheoremReport};
use crate::matrix::OrderedVector;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

pub const MIN_INTERVALS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Check the hypotheses from the constants alone.
    Check,
    /// Check, then solve the built-in system.
    Solve,
    /// Sample the claimed constants of the built-in system.
    Audit,
    /// Check, audit and solve.
    All,
}

/// Fixed-point solver for coupled quadratic fractional integral equations.
#[derive(Debug, Clone, Parser)]
#[command(name = "hybrid-perov", version)]
pub struct Args {
    #[arg(long, value_enum, default_value = "all")]
    pub mode: Mode,
    /// Number of grid subintervals.
    #[arg(long = "grid", default_value_t = 1024)]
    pub intervals: usize,
    /// Inner fixed-point tolerance (per component).
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Outer residual tolerance (per component).
    #[arg(long, default_value_t = 1e-6)]
    pub outer_tol: f64,
    #[arg(long, default_value_t = 200)]
    pub max_outer: usize,
    /// JSON problem spec; the built-in system is used when absent.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Where to write the JSON report (`-` for stdout).
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Seed for the audit sampler.
    #[arg(long, default_value_t = 20_240_601)]
    pub seed: u64,
    /// Number of random pairs for the Lipschitz audit.
    #[arg(long, default_value_t = 500)]
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub mode: Mode,
    pub intervals: usize,
    pub inner_tol: f64,
    pub outer_tol: f64,
    pub max_outer: usize,
    #[serde(skip)]
    pub spec_path: Option<PathBuf>,
    #[serde(skip)]
    pub report_path: Option<PathBuf>,
    pub seed: u64,
    pub samples: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: Mode::All,
            intervals: 1024,
            inner_tol: 1e-8,
            outer_tol: 1e-6,
            max_outer: 200,
            spec_path: None,
            report_path: None,
            seed: AuditConfig::default().seed,
            samples: AuditConfig::default().samples,
        }
    }
}

impl From<Args> for RunConfig {
    fn from(a: Args) -> Self {
        Self {
            mode: a.mode,
            intervals: a.intervals,
            inner_tol: a.tol,
            outer_tol: a.outer_tol,
            max_outer: a.max_outer,
            spec_path: a.spec,
            report_path: a.report,
            seed: a.seed,
            samples: a.samples,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.intervals < MIN_INTERVALS {
            return Err(Error::InvalidConfig(format!(
                "grid must have at least {MIN_INTERVALS} subintervals, got {}",
                self.intervals
            )));
        }
        for (name, v) in [("tol", self.inner_tol), ("outer-tol", self.outer_tol)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_outer == 0 {
            return Err(Error::InvalidConfig("max-outer must be at least 1".into()));
        }
        if self.samples < 2 {
            return Err(Error::InvalidConfig("samples must be at least 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub intervals: usize,
    pub converged: bool,
    pub outer_iterations: usize,
    pub inner_iterations: usize,
    pub residual: OrderedVector,
    pub residual_history: Vec<f64>,
    pub dampings: Vec<f64>,
    pub max_norm: OrderedVector,
    pub radius: f64,
    pub within_ball: bool,
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

/// Everything written to the JSON report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub status: Status,
    pub exit_code: i32,
    pub config: RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spec: Option<ProblemSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theorem: Option<TheoremReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub audit: Option<AuditReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveReport>,
    pub failed_checks: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl RunReport {
    fn new(config: &RunConfig) -> Self {
        Self {
            status: Status::Pass,
            exit_code: EXIT_OK,
            config: config.clone(),
            spec: None,
            theorem: None,
            audit: None,
            solve: None,
            failed_checks: Vec::new(),
            error: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serializable")
    }

    /// Human-readable summary.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        if let Some(t) = &self.theorem {
            s.push_str("== hypotheses ==\n");
            s.push_str(&t.summary());
        }
        if let Some(a) = &self.audit {
            s.push_str("== audit ==\n");
            s.push_str(&format!("sampled Lip(A) = {}  [{}]\n", a.lipschitz_a, flag(a.lipschitz_a_ok)));
            s.push_str(&format!("sampled Lip(C) = {}  [{}]\n", a.lipschitz_c, flag(a.lipschitz_c_ok)));
            s.push_str(&format!(
                "sampled rho = {:.6e}  [{}]\n",
                a.rho_sampled,
                flag(a.pointwise_ok)
            ));
            s.push_str(&format!(
                "grid F0 = {:.6e}, H0 = {:.6e}, P = {:.6e}\n",
                a.f0_grid, a.h0_grid, a.p_grid
            ));
            s.push_str(&format!(
                "min |f_i| = {:.6e}  [{}]\n",
                a.a_min_observed,
                flag(a.regularity_ok)
            ));
            s.push_str(&format!(
                "audited rho condition = {:.6e}, r0_min = {}  [{}]\n",
                a.audited_report.rho_condition_value,
                a.audited_report
                    .r0_min
                    .map_or_else(|| "undefined".to_string(), |m| format!("{m:.6e}")),
                flag(a.audited_report.overall_pass)
            ));
            for d in &a.discrepancies {
                s.push_str(&format!(
                    "note: {} claimed {:.6e}, computed {:.6e} ({})\n",
                    d.name, d.claimed, d.computed, d.note
                ));
            }
        }
        if let Some(r) = &self.solve {
            s.push_str("== solve ==\n");
            s.push_str(&format!(
                "N = {}, outer iterations = {}, inner iterations = {}\n",
                r.intervals, r.outer_iterations, r.inner_iterations
            ));
            s.push_str(&format!("residual = {}  [{}]\n", r.residual, flag(r.converged)));
            s.push_str(&format!(
                "max norm = {} <= {}  [{}]\n",
                r.max_norm,
                r.radius,
                flag(r.within_ball)
            ));
        }
        if let Some(e) = &self.error {
            s.push_str(&format!("error: {e}\n"));
        }
        if !self.failed_checks.is_empty() {
            s.push_str(&format!("failed checks: {}\n", self.failed_checks.join(", ")));
        }
        s.push_str(&format!(
            "status: {}\n",
            match self.status {
                Status::Pass => "pass",
                Status::Fail => "FAIL",
                Status::Error => "ERROR",
            }
        ));
        s
    }
}

fn flag(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

pub fn load_spec(config: &RunConfig) -> Result<ProblemSpec> {
    let spec = match &config.spec_path {
        None => example::builtin_spec(),
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| Error::InvalidConfig(format!("invalid spec {}: {e}", path.display())))?
        }
    };
    spec.validate()?;
    Ok(spec)
}

/// Solves the built-in system from the zero start.
pub fn solve(spec: &ProblemSpec, config: &RunConfig) -> Result<SolveReport> {
    let problem = example::example_problem(spec, config.intervals)?
        .with_inner_tol(config.inner_tol)
        .with_a_min(DEFAULT_A_MIN);
    let grid = Grid::new(spec.t_end, config.intervals)?;
    let start = PairFunction::zeros(grid);
    let sol = outer_solve(&problem, &start, &OrderedVector::splat(2, config.outer_tol), config.max_outer)?;
    let (x, y) = sol.point.clone().into_parts();
    Ok(SolveReport {
        intervals: config.intervals,
        converged: sol.converged,
        outer_iterations: sol.iterations,
        inner_iterations: sol.inner_iterations,
        residual: sol.residual().clone(),
        residual_history: sol.residuals.iter().map(OrderedVector::max).collect(),
        dampings: sol.dampings.clone(),
        within_ball: !sol.radius_exceeded,
        max_norm: sol.max_norm,
        radius: spec.r0,
        t: grid.nodes().collect(),
        x: x.into_samples(),
        y: y.into_samples(),
    })
}

fn run_checks(config: &RunConfig, report: &mut RunReport) -> Result<()> {
    config.validate()?;
    let spec = load_spec(config)?;
    report.spec = Some(spec.clone());

    let builtin = spec.model == Some(Model::BuiltinExample);
    let wants_solve = matches!(config.mode, Mode::Solve | Mode::All);
    let wants_audit = matches!(config.mode, Mode::Audit | Mode::All);
    if !builtin && matches!(config.mode, Mode::Solve | Mode::Audit) {
        return Err(Error::InvalidConfig(
            "solve and audit need a spec with \"model\": \"builtin_example\"".into(),
        ));
    }

    let theorem = full_report(&spec)?;
    report.failed_checks.extend(theorem.failed_checks.iter().cloned());
    let certified = theorem.overall_pass;
    report.theorem = Some(theorem);

    if builtin && wants_audit {
        let audit_config = AuditConfig {
            samples: config.samples,
            seed: config.seed,
            ..AuditConfig::default()
        };
        let audit = example::audit(&spec, config.intervals, audit_config)?;
        report
            .failed_checks
            .extend(audit.failed_checks.iter().map(|c| format!("audit.{c}")));
        report.audit = Some(audit);
    }

    if builtin && wants_solve && certified {
        match solve(&spec, config) {
            Ok(s) => {
                if !s.within_ball {
                    report.failed_checks.push("ball_invariance".into());
                }
                report.solve = Some(s);
            }
            Err(e @ (Error::NoConvergence { .. } | Error::RegularityViolation { .. })) => {
                report.failed_checks.push("solve".into());
                report.error = Some(e.to_string());
            }
            Err(e) => return Err(e),
        }
    }
    Ok(())
}

/// Runs the requested checks and returns the report; the exit code is in
/// `report.exit_code`.
pub fn execute(config: &RunConfig) -> RunReport {
    let mut report = RunReport::new(config);
    match run_checks(config, &mut report) {
        Ok(()) if report.failed_checks.is_empty() => {}
        Ok(()) => {
            report.status = Status::Fail;
            report.exit_code = EXIT_FAILED;
        }
        Err(e) => {
            report.status = Status::Error;
            report.exit_code = EXIT_CONFIG;
            report.error = Some(e.to_string());
        }
    }
    report
}

/// Runs, prints the summary and writes the JSON report. Returns the exit code.
pub fn run(config: &RunConfig) -> i32 {
    let report = execute(config);
    let json = report.to_json();
    let to_stdout = config.report_path.as_deref().is_some_and(|p| p.as_os_str() == "-");
    if to_stdout {
        eprint!("{}", report.summary());
        println!("{json}");
    } else {
        print!("{}", report.summary());
        if let Some(path) = &config.report_path {
            if let Err(e) = fs::File::create(path).and_then(|mut f| writeln!(f, "{json}")) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return EXIT_CONFIG;
            }
        }
    }
    report.exit_code
}
