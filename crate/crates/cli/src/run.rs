use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};

use hypgraph_core::barrier::{angle_bounds, barrier_audit, reciprocal_radii, sphere_radii, EquidistantSphere};
use hypgraph_core::radial::{solve_radial_with, RadialOptions};
use hypgraph_core::scalars;
use hypgraph_core::solver::{
    continue_in_eps_with, field_rows, ContinuationOptions, FieldDiagnostics, GridDomain, ScalarField,
};
use hypgraph_core::suite::run_property_suite;
use hypgraph_core::Error;

use crate::config::{Command, ConfigError, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("numerical failure: {0}")]
    Numerical(#[from] Error),
    #[error("cannot write artifacts: {0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides the configured output directory.
    pub out: Option<PathBuf>,
    /// Overrides the configured seed.
    pub seed: Option<u64>,
    pub config_path: Option<PathBuf>,
}

/// One pass/fail estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub bound: f64,
    /// How `value` is compared with `bound`.
    pub relation: &'static str,
    /// Whether the check counts toward the exit status.
    pub asserted: bool,
}

impl Check {
    fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), passed: value <= bound, value, bound, relation: "<=", asserted: true }
    }

    fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), passed: value >= bound, value, bound, relation: ">=", asserted: true }
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub passed: bool,
    pub out_dir: PathBuf,
    /// Human-readable summary lines.
    pub summary: Vec<String>,
    /// The report written to `report.json` (or the command's main JSON).
    pub report: Value,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }
}

pub fn run(config: &RunConfig, opts: &RunOptions) -> Result<Outcome, RunError> {
    let mut config = config.clone();
    if let Some(seed) = opts.seed {
        config.seed = seed;
    }
    config.validate()?;
    let out_dir = opts
        .out
        .clone()
        .or_else(|| config.out.clone())
        .unwrap_or_else(|| PathBuf::from("hypgraph-out").join(config.command.name()));
    fs::create_dir_all(&out_dir)?;

    let started = unix_seconds();
    let clock = Instant::now();
    let mut outcome = match config.command {
        Command::Solve => solve(&config, &out_dir)?,
        Command::Radial => radial(&config, &out_dir)?,
        Command::Verify => verify(&config, &out_dir)?,
        Command::Sigma0 => sigma0(&out_dir)?,
        Command::Barriers => barriers(&config, &out_dir)?,
    };
    outcome.out_dir = out_dir.clone();
    let metadata = json!({
        "command": config.command.name(),
        "version": env!("CARGO_PKG_VERSION"),
        "config_path": opts.config_path,
        "started_unix": started,
        "finished_unix": unix_seconds(),
        "elapsed_seconds": clock.elapsed().as_secs_f64(),
    });
    write_json(&out_dir.join("metadata.json"), &metadata)?;
    Ok(outcome)
}

fn unix_seconds() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

fn write_json(path: &Path, value: &impl Serialize) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
    text.push('\n');
    fs::write(path, text)
}

fn field_csv(dom: &GridDomain, field: &ScalarField) -> String {
    let mut s = String::from("x,y,u,w,kappa1,kappa2,nu3\n");
    for r in field_rows(dom, field) {
        let _ = writeln!(s, "{},{},{},{},{},{},{}", r.x, r.y, r.u, r.w, r.kappa1, r.kappa2, r.nu3);
    }
    s
}

/// Applies the config's `report_only` list and tells whether every
/// asserted check passed.
fn settle(config: &RunConfig, checks: &mut [Check]) -> bool {
    for c in checks.iter_mut() {
        c.asserted = !config.report_only.contains(&c.name);
    }
    checks.iter().all(|c| c.passed || !c.asserted)
}

fn summarize(checks: &[Check], prefix: &str, summary: &mut Vec<String>) {
    for c in checks {
        summary.push(format!(
            "{} {prefix}{}: {:.6e} {} {:.6e}",
            match (c.passed, c.asserted) {
                (true, _) => "PASS",
                (false, true) => "FAIL",
                (false, false) => "NOTE",
            },
            c.name,
            c.value,
            c.relation,
            c.bound
        ));
    }
}

/// Estimates asserted on a converged 2D field.
fn field_checks(config: &RunConfig, sigma: f64, eps: f64, d: &FieldDiagnostics, r1: f64, r2: f64) -> Vec<Check> {
    let tol = &config.tolerances;
    let (lo, hi) = angle_bounds(sigma, eps, r1, r2);
    let mut checks = vec![
        Check::at_most("gradient_bound", d.max_w, (1.0 + tol.gradient) / sigma),
        Check::at_least("height_floor", d.min_u, eps - tol.height),
        Check::at_least("boundary_angle_lower", d.boundary_nu_min - sigma, lo),
        Check::at_most("boundary_angle_upper", d.boundary_nu_max - sigma, hi),
    ];
    if d.max_gu <= 0.0 {
        checks.push(Check {
            name: "max_principle".into(),
            passed: d.max_w_near_boundary,
            value: if d.max_w_near_boundary { 1.0 } else { 0.0 },
            bound: 1.0,
            relation: "==",
            asserted: true,
        });
    }
    checks
}

fn solve(config: &RunConfig, out: &Path) -> Result<Outcome, RunError> {
    let sigma = config.need_sigma()?;
    let schedule = config.schedule()?;
    let fam = config.parsed_family(2)?;
    let shape = config.domain.shape();
    let r1 = shape.interior_radius() * (1.0 - config.tolerances.r1_relative);
    let r2 = shape.exterior_radius();
    let dom = GridDomain::new(shape, config.need_h()?)?;
    let mut opts = ContinuationOptions::default();
    opts.newton.tol = config.tolerances.newton;
    let run = continue_in_eps_with(&dom, &fam, sigma, &schedule, &opts)?;
    let sigma0 = scalars::sigma0()?;

    let mut passed = true;
    let mut summary = Vec::new();
    let mut stages = Vec::new();
    let mut m0_table = Vec::new();
    let mut prev_m0: Option<f64> = None;
    for (j, (field, report)) in run.stages.iter().enumerate() {
        let eps = field.eps;
        let name = format!("field_{j}.csv");
        fs::write(out.join(&name), field_csv(&dom, field))?;
        let d = &report.steps.last().expect("converged stage has a step").diagnostics;
        let audit = barrier_audit(field, &dom, sigma, eps)?;
        let mut checks = field_checks(config, sigma, eps, d, r1, r2);
        checks.push(Check::at_least("circumscribed_inclusion", audit.circumscribed, -config.tolerances.inclusion));
        let growth = match (prev_m0, d.m0) {
            (Some(p), Some(m)) => Some(m / p),
            _ => None,
        };
        if let (Some(limit), true) = (config.tolerances.m0_growth, j > 0 && sigma > sigma0) {
            checks.push(Check::at_most("m0_growth", growth.unwrap_or(f64::INFINITY), limit));
        }
        m0_table.push(json!({
            "eps": eps,
            "kappa_max": d.kappa_max,
            "m0": d.m0,
            "growth": growth,
        }));
        prev_m0 = d.m0;
        let stage_passed = settle(config, &mut checks);
        passed &= stage_passed;
        summarize(&checks, &format!("eps={eps} "), &mut summary);
        let (lo, hi) = angle_bounds(sigma, eps, r1, r2);
        stages.push(json!({
            "eps": eps,
            "field_csv": name,
            "estimates": {
                "passed": stage_passed,
                "checks": checks,
                "max_u_d2u": d.max_u_d2u,
                "max_u_d2u_times_eps2": d.max_u_d2u * eps * eps,
                "boundary_nu": [d.boundary_nu_min, d.boundary_nu_max],
                "angle_envelope": [sigma + lo, sigma + hi],
                "r1": r1,
                "r2": r2,
            },
            "audit": audit,
            "continuation": report,
        }));
    }
    let failure = run.error.as_ref().map(|e| {
        let partial = match e {
            Error::ContinuationStalled { report, .. } => serde_json::to_value(report).ok(),
            _ => None,
        };
        json!({ "error": e.to_string(), "partial_report": partial })
    });
    if let Some(e) = &run.error {
        passed = false;
        summary.push(format!("FAIL solver: {e}"));
    }
    let report = json!({
        "command": "solve",
        "config": config_echo(config),
        "sigma0": sigma0,
        "unknowns": dom.unknowns(),
        "warnings": run.warnings,
        "stages": stages,
        "m0_table": m0_table,
        "failure": failure,
        "passed": passed,
    });
    write_json(&out.join("report.json"), &report)?;
    Ok(Outcome { passed, out_dir: out.into(), summary, report })
}

fn radial(config: &RunConfig, out: &Path) -> Result<Outcome, RunError> {
    let sigma = config.need_sigma()?;
    let fam = config.parsed_family(config.dimension)?;
    let r_b = config.domain.shape().interior_radius();
    let tol = &config.tolerances;
    let opts = RadialOptions { mesh_size: config.mesh, ..RadialOptions::default() };
    let mut passed = true;
    let mut summary = Vec::new();
    let mut stages = Vec::new();
    let mut failure = None;
    for (j, eps) in config.schedule()?.into_iter().enumerate() {
        let prof = match solve_radial_with(&fam, sigma, eps, r_b, config.dimension, &opts) {
            Ok(p) => p,
            Err(e) => {
                summary.push(format!("FAIL eps={eps} radial solve: {e}"));
                failure = Some(json!({ "eps": eps, "error": e.to_string() }));
                passed = false;
                break;
            }
        };
        let name = format!("radial_{j}.csv");
        fs::write(out.join(&name), prof.to_csv())?;
        let r1 = r_b * (1.0 - tol.r1_relative);
        let (lo, hi) = angle_bounds(sigma, eps, r1, f64::INFINITY);
        let nu = prof.boundary_nu();
        let min_u = prof.u_values.iter().copied().fold(f64::INFINITY, f64::min);
        let mut checks = vec![
            Check::at_most("gradient_bound", prof.max_w(), (1.0 + tol.gradient) / sigma),
            Check::at_least("height_floor", min_u, eps - tol.height),
            Check::at_least("boundary_angle_lower", nu - sigma, lo),
            Check::at_most("boundary_angle_upper", nu - sigma, hi),
        ];
        let stage_passed = settle(config, &mut checks);
        passed &= stage_passed;
        summarize(&checks, &format!("eps={eps} "), &mut summary);
        stages.push(json!({
            "eps": eps,
            "profile_csv": name,
            "iterations": prof.iterations,
            "residual": prof.residual,
            "max_w": prof.max_w(),
            "boundary_nu": nu,
            "estimates": { "passed": stage_passed, "checks": checks },
        }));
    }
    let report = json!({
        "command": "radial",
        "config": config_echo(config),
        "stages": stages,
        "failure": failure,
        "passed": passed,
    });
    write_json(&out.join("report.json"), &report)?;
    Ok(Outcome { passed, out_dir: out.into(), summary, report })
}

fn verify(config: &RunConfig, out: &Path) -> Result<Outcome, RunError> {
    let report = run_property_suite(config.seed, config.samples)?;
    let summary = report
        .checks
        .iter()
        .map(|c| {
            format!(
                "{} {}: {} samples, max error {:.3e} (tolerance {:.1e}), {} failures",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.samples,
                c.max_error,
                c.tolerance,
                c.failures
            )
        })
        .collect();
    write_json(&out.join("report.json"), &report)?;
    let value = serde_json::to_value(&report).map_err(std::io::Error::other)?;
    Ok(Outcome { passed: report.passed, out_dir: out.into(), summary, report: value })
}

fn sigma0(out: &Path) -> Result<Outcome, RunError> {
    let table = scalars::verification_table()?;
    let summary = vec![format!("{:.12}", table.sigma0)];
    let value = json!({ "sigma0": format!("{:.12}", table.sigma0), "table": table });
    write_json(&out.join("sigma0.json"), &value)?;
    Ok(Outcome { passed: table.pass, out_dir: out.into(), summary, report: value })
}

fn barriers(config: &RunConfig, out: &Path) -> Result<Outcome, RunError> {
    let sigma = config.need_sigma()?;
    let shape = config.domain.shape();
    let r1 = shape.interior_radius() * (1.0 - config.tolerances.r1_relative);
    let r2 = shape.exterior_radius();
    let (center, radius) = shape.circumscribed();
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for eps in config.schedule()? {
        let (big1, big2) = sphere_radii(sigma, eps, r1, r2);
        let (inv1, inv2) = reciprocal_radii(sigma, eps, r1, r2);
        let (lo, hi) = angle_bounds(sigma, eps, r1, r2);
        let outer = EquidistantSphere::through_slice(center, radius, sigma, eps)?;
        summary.push(format!("eps={eps}: R1 = {big1:.12}, R2 = {big2}, nu - sigma in [{lo:.6e}, {hi:.6e}]"));
        rows.push(json!({
            "eps": eps,
            "R1": big1,
            "R2": if big2.is_finite() { json!(big2) } else { json!("inf") },
            "inv_R1": inv1,
            "inv_R2": inv2,
            "angle_bounds": [lo, hi],
            "circumscribed_sphere": {
                "center": center,
                "slice_radius": radius,
                "center_height": outer.center_height(),
                "footprint_radius": outer.footprint_radius(),
            },
        }));
    }
    let report = json!({
        "command": "barriers",
        "config": config_echo(config),
        "r1": r1,
        "r2": if r2.is_finite() { json!(r2) } else { json!("inf") },
        "rows": rows,
        "passed": true,
    });
    write_json(&out.join("barriers.json"), &report)?;
    Ok(Outcome { passed: true, out_dir: out.into(), summary, report })
}

/// The configuration as recorded in reports; the output path is left out so
/// that reports do not depend on where they were written.
fn config_echo(config: &RunConfig) -> Value {
    let mut v = serde_json::to_value(config).unwrap_or(Value::Null);
    if let Value::Object(m) = &mut v {
        m.remove("out");
    }
    v
}
