//! Estimate diagnostics on computed fields: gradient and curvature maxima,
//! boundary angle, and the curvature quotient `M₀`.

use serde::{Deserialize, Serialize};

use super::domain::{GridDomain, NodeClass, ARMS};
use super::stencil::{local_jet, node_states};
use super::ScalarField;
use crate::curvfunc::CurvatureFamily;
use crate::error::Result;
use crate::linop::linearize;
use crate::scalars;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldDiagnostics {
    pub min_u: f64,
    pub max_u: f64,
    pub max_w: f64,
    /// The node attaining `max w` lies on or next to the boundary ring.
    pub max_w_near_boundary: bool,
    /// `max G_u` over the nodes.
    pub max_gu: f64,
    pub max_u_d2u: f64,
    pub kappa_max: f64,
    pub kappa_min: f64,
    pub min_cone_margin: f64,
    /// Range of `ν^{n+1}` extrapolated to `∂Ω`.
    pub boundary_nu_min: f64,
    pub boundary_nu_max: f64,
    /// The parameter `a` used for `M₀`.
    pub a: f64,
    /// `max κ_max / (ν^{n+1} - a)`; `None` when `ν^{n+1} ≤ a` somewhere.
    pub m0: Option<f64>,
}

/// One row of the field CSV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldRow {
    pub x: f64,
    pub y: f64,
    pub u: f64,
    pub w: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub nu3: f64,
}

pub fn field_rows(dom: &GridDomain, field: &ScalarField) -> Vec<FieldRow> {
    (0..dom.unknowns())
        .map(|k| {
            let p = dom.point(k);
            let jet = local_jet(dom, field, k);
            let (w, k1, k2) = match jet.state() {
                Ok(s) => (s.w, s.kappa[0], s.kappa[1]),
                Err(_) => (f64::NAN, f64::NAN, f64::NAN),
            };
            FieldRow { x: p[0], y: p[1], u: jet.u, w, kappa1: k1, kappa2: k2, nu3: 1.0 / w }
        })
        .collect()
}

/// Weights of `p'(0)` for the polynomial interpolating at nodes `s`.
fn derivative_weights_at_zero(s: &[f64]) -> Vec<f64> {
    let m = s.len();
    (0..m)
        .map(|i| {
            // L_i'(0) = Σ_{j≠i} [Π_{k≠i,j} (0 - s_k)] / Π_{k≠i} (s_i - s_k)
            let denom: f64 = (0..m).filter(|&k| k != i).map(|k| s[i] - s[k]).product();
            let num: f64 = (0..m)
                .filter(|&j| j != i)
                .map(|j| (0..m).filter(|&k| k != i && k != j).map(|k| -s[k]).product::<f64>())
                .sum();
            num / denom
        })
        .collect()
}

/// `|Du|` at boundary intersections of axis arms, from the polynomial
/// through the boundary value and up to five nodes behind it.
pub fn boundary_gradients(dom: &GridDomain, field: &ScalarField) -> Vec<([f64; 2], f64)> {
    let mut out = Vec::new();
    for k in 0..dom.unknowns() {
        if dom.node_class(k) != NodeClass::BoundaryAdjacent {
            continue;
        }
        for a in 0..4 {
            if dom.neighbour(k, a).is_some() {
                continue;
            }
            let d = [ARMS[a].0 as f64, ARMS[a].1 as f64];
            let th = dom.theta[k][a];
            let x = dom.point(k);
            let p = [x[0] + th * dom.h * d[0], x[1] + th * dom.h * d[1]];
            let n = dom.shape.normal(p);
            let nd = n[0] * d[0] + n[1] * d[1];
            if nd < 0.5 {
                continue;
            }
            // Walk inward along the opposite arm.
            let back = a ^ 1;
            let mut s = vec![0.0, th * dom.h];
            let mut v = vec![field.eps, field.values[k]];
            let mut cur = k;
            while s.len() < 6 {
                match dom.neighbour(cur, back) {
                    Some(m) => {
                        cur = m;
                        s.push(s[s.len() - 1] + dom.h);
                        v.push(field.values[m]);
                    }
                    None => break,
                }
            }
            if s.len() < 3 {
                continue;
            }
            let wts = derivative_weights_at_zero(&s);
            let ds: f64 = wts.iter().zip(&v).map(|(w, v)| w * v).sum();
            out.push((p, ds / nd));
        }
    }
    out
}

/// `a = σ₀ + (σ - σ₀)/2`.
pub fn m0_parameter(sigma: f64) -> Result<f64> {
    let s0 = scalars::sigma0()?;
    Ok(s0 + 0.5 * (sigma - s0))
}

pub fn diagnose(dom: &GridDomain, field: &ScalarField, fam: &CurvatureFamily, sigma: f64) -> Result<FieldDiagnostics> {
    let states = node_states(dom, field, fam)?;
    let a = m0_parameter(sigma)?;
    let mut d = FieldDiagnostics {
        min_u: f64::INFINITY,
        max_u: f64::NEG_INFINITY,
        max_w: 0.0,
        max_w_near_boundary: false,
        max_gu: f64::NEG_INFINITY,
        max_u_d2u: 0.0,
        kappa_max: f64::NEG_INFINITY,
        kappa_min: f64::INFINITY,
        min_cone_margin: f64::INFINITY,
        boundary_nu_min: f64::NAN,
        boundary_nu_max: f64::NAN,
        a,
        m0: None,
    };
    let mut argmax_w = 0;
    let mut m0 = 0.0f64;
    let mut m0_defined = true;
    for (k, s) in states.iter().enumerate() {
        d.min_u = d.min_u.min(s.u);
        d.max_u = d.max_u.max(s.u);
        if s.w > d.max_w {
            d.max_w = s.w;
            argmax_w = k;
        }
        let op_norm = crate::eigen::eigenvalues(&s.d2u).iter().fold(0.0f64, |m, l| m.max(l.abs()));
        d.max_u_d2u = d.max_u_d2u.max(s.u * op_norm);
        let kmax = s.kappa[s.kappa.len() - 1];
        d.kappa_max = d.kappa_max.max(kmax);
        d.kappa_min = d.kappa_min.min(s.kappa[0]);
        d.min_cone_margin = d.min_cone_margin.min(fam.cone_margin(&s.kappa));
        d.max_gu = d.max_gu.max(linearize(fam, s)?.gu);
        let eta = 1.0 / s.w;
        if eta - a <= 0.0 {
            m0_defined = false;
        } else {
            m0 = m0.max(kmax / (eta - a));
        }
    }
    let near = |k: usize| dom.node_class(k) == NodeClass::BoundaryAdjacent;
    d.max_w_near_boundary = near(argmax_w) || (0..8).any(|a| dom.neighbour(argmax_w, a).is_some_and(near));

    let grads = boundary_gradients(dom, field);
    if !grads.is_empty() {
        let nus: Vec<f64> = grads.iter().map(|(_, g)| 1.0 / (1.0 + g * g).sqrt()).collect();
        d.boundary_nu_min = nus.iter().copied().fold(f64::INFINITY, f64::min);
        d.boundary_nu_max = nus.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for nu in nus {
            if nu - a <= 0.0 {
                m0_defined = false;
            }
        }
    }
    d.m0 = m0_defined.then_some(m0);
    Ok(d)
}
