//! Damped Newton iteration with admissibility backtracking.

use serde::{Deserialize, Serialize};

use super::domain::GridDomain;
use super::sparse::Pattern;
use super::stencil::{assemble_jacobian, evaluate};
use super::ScalarField;
use crate::curvfunc::CurvatureFamily;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    /// Converged when `‖G[u] - σᵗ‖_∞` is at most this.
    pub tol: f64,
    pub max_iterations: usize,
    pub min_step: f64,
    /// Required cone margin at accepted iterates.
    pub cone_margin: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iterations: 12, min_step: 0.5f64.powi(20), cone_margin: 1e-8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub step_length: f64,
    pub backtracks: usize,
    /// `‖λδ‖_∞` of the accepted update.
    pub update_norm: f64,
    pub residual_before: f64,
    pub residual_after: f64,
    pub min_cone_margin: f64,
}

/// One damped Newton step toward `G[u] = σᵗ`.
pub fn newton_step(
    dom: &GridDomain,
    u: &ScalarField,
    fam: &CurvatureFamily,
    sigma_t: f64,
    opts: &NewtonOptions,
) -> Result<(ScalarField, StepReport)> {
    newton_step_with(dom, u, fam, sigma_t, opts, None)
}

fn newton_step_with(
    dom: &GridDomain,
    u: &ScalarField,
    fam: &CurvatureFamily,
    sigma_t: f64,
    opts: &NewtonOptions,
    pattern: Option<&Pattern>,
) -> Result<(ScalarField, StepReport)> {
    let ev = evaluate(dom, u, fam, sigma_t)?;
    let jac = assemble_jacobian(dom, u, fam)?;
    let lu = match pattern {
        Some(p) => jac.factor_with(p)?,
        None => jac.factor()?,
    };
    let neg: Vec<f64> = ev.residual.iter().map(|r| -r).collect();
    let delta = lu.solve(&neg);
    if delta.iter().any(|d| !d.is_finite()) {
        return Err(Error::SingularJacobian { column: 0 });
    }
    let (before2, before_inf) = (ev.norm2(), ev.norm_inf());

    let mut lambda = 1.0;
    let mut backtracks = 0;
    while lambda >= opts.min_step {
        let cand = ScalarField {
            values: u.values.iter().zip(&delta).map(|(x, d)| x + lambda * d).collect(),
            eps: u.eps,
            converged: false,
        };
        if cand.values.iter().all(|&x| x > 0.0) {
            if let Ok(e) = evaluate(dom, &cand, fam, sigma_t) {
                let decreased = e.norm2() < before2 || e.norm_inf() <= 1e-13;
                if e.min_cone_margin > opts.cone_margin && decreased {
                    let update_norm = lambda * delta.iter().fold(0.0f64, |m, d| m.max(d.abs()));
                    let rep = StepReport {
                        step_length: lambda,
                        backtracks,
                        update_norm,
                        residual_before: before_inf,
                        residual_after: e.norm_inf(),
                        min_cone_margin: e.min_cone_margin,
                    };
                    return Ok((cand, rep));
                }
            }
        }
        lambda *= 0.5;
        backtracks += 1;
    }
    Err(Error::LineSearchStalled)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewtonSummary {
    pub iterations: usize,
    pub residual: f64,
    /// `‖G[u] - σᵗ‖_∞` before each step and at the end.
    pub trace: Vec<f64>,
}

/// Iterates [`newton_step`] until the residual tolerance is met.
pub fn newton_solve(
    dom: &GridDomain,
    start: &ScalarField,
    fam: &CurvatureFamily,
    sigma_t: f64,
    opts: &NewtonOptions,
) -> Result<(ScalarField, NewtonSummary)> {
    let mut u = start.clone();
    let mut trace = Vec::new();
    let mut res = evaluate(dom, &u, fam, sigma_t)?.norm_inf();
    let mut pattern = None;
    for it in 0..=opts.max_iterations {
        trace.push(res);
        if res <= opts.tol {
            return Ok((u, NewtonSummary { iterations: it, residual: res, trace }));
        }
        if it == opts.max_iterations {
            break;
        }
        if pattern.is_none() {
            pattern = Some(assemble_jacobian(dom, &u, fam)?.pattern()?);
        }
        let (next, rep) = newton_step_with(dom, &u, fam, sigma_t, opts, pattern.as_ref())?;
        u = next;
        res = rep.residual_after;
        if !res.is_finite() {
            break;
        }
    }
    Err(Error::NewtonDiverged { trace })
}
