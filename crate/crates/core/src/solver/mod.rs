//! Finite-difference continuation solver for `f(κ[u]) = σ` in `Ω ⊂ ℝ²`,
//! `u = ε` on `∂Ω`.

pub mod banded;
pub mod diagnostics;
pub mod domain;
pub mod newton;
pub mod sparse;
pub mod stencil;

use serde::{Deserialize, Serialize};

use crate::curvfunc::CurvatureFamily;
use crate::error::{Error, Result};
use crate::scalars;

pub use diagnostics::{diagnose, field_rows, FieldDiagnostics, FieldRow};
pub use domain::{GridDomain, MeanConvexityReport, NodeClass, SampledSdf, Shape};
pub use newton::{newton_solve, newton_step, NewtonOptions, NewtonSummary, StepReport};
pub use stencil::{assemble_jacobian, assemble_residual};

/// Heights at the unknowns of a [`GridDomain`]; the Dirichlet value `eps`
/// is implied on `∂Ω`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarField {
    pub values: Vec<f64>,
    pub eps: f64,
    pub converged: bool,
}

impl ScalarField {
    pub fn constant(dom: &GridDomain, eps: f64) -> Self {
        Self { values: vec![eps; dom.unknowns()], eps, converged: false }
    }

    pub fn from_fn(dom: &GridDomain, eps: f64, f: impl Fn([f64; 2]) -> f64) -> Self {
        Self { values: (0..dom.unknowns()).map(|k| f(dom.point(k))).collect(), eps, converged: false }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Diagnostics recorded at one accepted continuation step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: f64,
    pub sigma_t: f64,
    pub eps: f64,
    pub newton_iterations: usize,
    pub residual: f64,
    pub diagnostics: FieldDiagnostics,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ContinuationReport {
    pub family: String,
    pub sigma: f64,
    pub eps: f64,
    pub h: f64,
    pub unknowns: usize,
    pub steps: Vec<StepRecord>,
    pub final_t: f64,
    pub success: bool,
    pub rejected_steps: usize,
    pub warnings: Vec<String>,
    pub mean_convexity: Option<MeanConvexityReport>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuationOptions {
    pub dt0: f64,
    pub dt_min: f64,
    /// Steps taking at most this many Newton iterations count as easy.
    pub easy_iterations: usize,
    pub newton: NewtonOptions,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        Self { dt0: 0.1, dt_min: 1e-4, easy_iterations: 4, newton: NewtonOptions::default() }
    }
}

fn check_params(sigma: f64, eps: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::PreconditionViolated(format!("σ must lie in (0,1), got {sigma}")));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::PreconditionViolated(format!("ε must be positive, got {eps}")));
    }
    Ok(())
}

fn new_report(dom: &GridDomain, fam: &CurvatureFamily, sigma: f64, eps: f64) -> ContinuationReport {
    let mut warnings = Vec::new();
    if !dom.mean_convexity.mean_convex {
        warnings.push(format!(
            "domain is not mean-convex: minimum boundary curvature {:.3e}",
            dom.mean_convexity.min_curvature
        ));
    }
    ContinuationReport {
        family: fam.to_string(),
        sigma,
        eps,
        h: dom.h,
        unknowns: dom.unknowns(),
        mean_convexity: Some(dom.mean_convexity),
        warnings,
        ..Default::default()
    }
}

/// Homotopy `G[uᵗ] = tσ + (1 - t)` from `u⁰ ≡ ε` to `t = 1`.
pub fn continue_in_t(dom: &GridDomain, fam: &CurvatureFamily, sigma: f64, eps: f64) -> Result<(ScalarField, ContinuationReport)> {
    continue_in_t_with(dom, fam, sigma, eps, &ContinuationOptions::default())
}

pub fn continue_in_t_with(
    dom: &GridDomain,
    fam: &CurvatureFamily,
    sigma: f64,
    eps: f64,
    opts: &ContinuationOptions,
) -> Result<(ScalarField, ContinuationReport)> {
    check_params(sigma, eps)?;
    if fam.n() != 2 {
        return Err(Error::PreconditionViolated("the grid solver works in dimension n = 2".into()));
    }
    let mut report = new_report(dom, fam, sigma, eps);
    let mut u = ScalarField::constant(dom, eps);
    let (mut t, mut dt, mut easy) = (0.0f64, opts.dt0, 0usize);

    while t < 1.0 {
        let t_new = (t + dt).min(1.0);
        let sigma_t = t_new * sigma + (1.0 - t_new);
        match newton_solve(dom, &u, fam, sigma_t, &opts.newton) {
            Ok((next, summary)) => {
                t = t_new;
                u = next;
                let diagnostics = diagnose(dom, &u, fam, sigma)?;
                report.steps.push(StepRecord {
                    t,
                    sigma_t,
                    eps,
                    newton_iterations: summary.iterations,
                    residual: summary.residual,
                    diagnostics,
                });
                if summary.iterations <= opts.easy_iterations {
                    easy += 1;
                    if easy >= 2 {
                        dt *= 2.0;
                        easy = 0;
                    }
                } else {
                    easy = 0;
                }
            }
            Err(_) => {
                report.rejected_steps += 1;
                dt *= 0.5;
                easy = 0;
                if dt < opts.dt_min {
                    report.final_t = t;
                    return Err(Error::ContinuationStalled { t, report: Box::new(report) });
                }
            }
        }
    }
    report.final_t = 1.0;
    report.success = true;
    u.converged = true;
    Ok((u, report))
}

/// Outcome of an ε-continuation: every stage that converged, and the error
/// that stopped the sequence early, if any.
#[derive(Debug)]
pub struct EpsContinuation {
    pub stages: Vec<(ScalarField, ContinuationReport)>,
    pub error: Option<Error>,
    pub warnings: Vec<String>,
}

/// `ε_j = 0.04 · 2^{-j}`, `j = 0..=4`.
pub fn default_eps_schedule() -> Vec<f64> {
    (0..5).map(|j| 0.04 * 0.5f64.powi(j)).collect()
}

/// Solves along a decreasing ε schedule, warm-starting each stage from the
/// previous field lowered by the change in ε.
pub fn continue_in_eps(dom: &GridDomain, fam: &CurvatureFamily, sigma: f64, schedule: &[f64]) -> Result<EpsContinuation> {
    continue_in_eps_with(dom, fam, sigma, schedule, &ContinuationOptions::default())
}

pub fn continue_in_eps_with(
    dom: &GridDomain,
    fam: &CurvatureFamily,
    sigma: f64,
    schedule: &[f64],
    opts: &ContinuationOptions,
) -> Result<EpsContinuation> {
    if schedule.is_empty() || schedule.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::PreconditionViolated("ε schedule must be nonempty and strictly decreasing".into()));
    }
    let mut warnings = Vec::new();
    let s0 = scalars::sigma0()?;
    if sigma <= s0 {
        warnings.push(format!(
            "σ = {sigma} is not above σ₀ ≈ {s0:.6}; uniform curvature bounds are not expected"
        ));
    }
    let mut out = EpsContinuation { stages: Vec::new(), error: None, warnings };
    for &eps in schedule {
        let stage = match out.stages.last() {
            None => continue_in_t_with(dom, fam, sigma, eps, opts),
            Some((prev, _)) => warm_start(dom, fam, sigma, eps, prev, opts),
        };
        match stage {
            Ok((field, mut report)) => {
                report.warnings.extend(out.warnings.iter().cloned());
                out.stages.push((field, report));
            }
            Err(e) => {
                out.error = Some(e);
                break;
            }
        }
    }
    Ok(out)
}

fn warm_start(
    dom: &GridDomain,
    fam: &CurvatureFamily,
    sigma: f64,
    eps: f64,
    prev: &ScalarField,
    opts: &ContinuationOptions,
) -> Result<(ScalarField, ContinuationReport)> {
    check_params(sigma, eps)?;
    let shift = prev.eps - eps;
    let start = ScalarField {
        values: prev.values.iter().map(|u| u - shift).collect(),
        eps,
        converged: false,
    };
    match newton_solve(dom, &start, fam, sigma, &opts.newton) {
        Ok((mut u, summary)) => {
            let mut report = new_report(dom, fam, sigma, eps);
            let diagnostics = diagnose(dom, &u, fam, sigma)?;
            report.steps.push(StepRecord {
                t: 1.0,
                sigma_t: sigma,
                eps,
                newton_iterations: summary.iterations,
                residual: summary.residual,
                diagnostics,
            });
            report.final_t = 1.0;
            report.success = true;
            u.converged = true;
            Ok((u, report))
        }
        Err(_) => {
            let (u, mut report) = continue_in_t_with(dom, fam, sigma, eps, opts)?;
            report.warnings.push("warm start failed; restarted the t-continuation".into());
            Ok((u, report))
        }
    }
}
