//! Finite-difference stencils, residual and Jacobian assembly.
//!
//! Each unknown sees four lines through it: the two axes and the two
//! diagonals. Along each line a three-point formula on possibly unequal arms
//! (Shortley–Weller) gives first and second derivatives; arms cut by `∂Ω`
//! end at the intersection point, where the value is `ε`. On uncut stencils
//! this reduces to the standard central differences and 4-corner cross term.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::sparse::SparseJacobian;
use super::domain::GridDomain;
use super::ScalarField;
use crate::curvfunc::CurvatureFamily;
use crate::error::{Error, Result};
use crate::linop::{linearize, LinearizationAtPoint};
use crate::shape::{hyperbolic_shape, GraphPointState};

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Three-point weights `(plus, minus, center)` for one line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineWeights {
    pub first: [f64; 3],
    pub second: [f64; 3],
}

/// Weights for arms of length `hp` (forward) and `hm` (backward).
pub fn line_weights(hp: f64, hm: f64) -> LineWeights {
    let s = hp + hm;
    LineWeights {
        first: [hm / (hp * s), -hp / (hm * s), (hp - hm) / (hp * hm)],
        second: [2.0 / (hp * s), 2.0 / (hm * s), -2.0 / (hp * hm)],
    }
}

/// Per-unknown stencil: weights for the x, y, diagonal (1,1) and
/// anti-diagonal (1,-1) lines.
#[derive(Debug, Clone, Copy)]
pub struct NodeStencil {
    pub lines: [LineWeights; 4],
}

impl NodeStencil {
    pub fn new(dom: &GridDomain, k: usize) -> Self {
        let th = &dom.theta[k];
        let mut lines = [line_weights(1.0, 1.0); 4];
        for (l, line) in lines.iter_mut().enumerate() {
            let len = if l < 2 { dom.h } else { SQRT2 * dom.h };
            *line = line_weights(th[2 * l] * len, th[2 * l + 1] * len);
        }
        Self { lines }
    }
}

/// `(u, Du, D²u)` at one unknown.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalJet {
    pub u: f64,
    pub du: [f64; 2],
    pub d2u: [[f64; 2]; 2],
}

impl LocalJet {
    pub fn du_vec(&self) -> DVector<f64> {
        DVector::from_vec(self.du.to_vec())
    }

    pub fn d2u_mat(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[self.d2u[0][0], self.d2u[0][1], self.d2u[1][0], self.d2u[1][1]])
    }

    pub fn state(&self) -> Result<GraphPointState> {
        hyperbolic_shape(self.u, &self.du_vec(), &self.d2u_mat())
    }
}

fn arm_values(dom: &GridDomain, values: &[f64], eps: f64, k: usize) -> [f64; 8] {
    let mut v = [eps; 8];
    for (a, slot) in v.iter_mut().enumerate() {
        if let Some(m) = dom.neighbour(k, a) {
            *slot = values[m];
        }
    }
    v
}

pub fn local_jet(dom: &GridDomain, field: &ScalarField, k: usize) -> LocalJet {
    let st = NodeStencil::new(dom, k);
    let v = arm_values(dom, &field.values, field.eps, k);
    let u = field.values[k];
    let apply = |w: &[f64; 3], l: usize| w[0] * v[2 * l] + w[1] * v[2 * l + 1] + w[2] * u;
    let ux = apply(&st.lines[0].first, 0);
    let uy = apply(&st.lines[1].first, 1);
    let uxx = apply(&st.lines[0].second, 0);
    let uyy = apply(&st.lines[1].second, 1);
    let uxy = 0.5 * (apply(&st.lines[2].second, 2) - apply(&st.lines[3].second, 3));
    LocalJet { u, du: [ux, uy], d2u: [[uxx, uxy], [uxy, uyy]] }
}

/// Graph states at every unknown; `Err` lists the nodes where the geometry
/// is undefined or the curvatures leave the admissible cone.
pub fn node_states(dom: &GridDomain, field: &ScalarField, fam: &CurvatureFamily) -> Result<Vec<GraphPointState>> {
    let out: Vec<Option<GraphPointState>> = (0..dom.unknowns())
        .into_par_iter()
        .map(|k| {
            local_jet(dom, field, k)
                .state()
                .ok()
                .filter(|s| fam.in_cone(&s.kappa))
        })
        .collect();
    let bad: Vec<usize> = out.iter().enumerate().filter(|(_, s)| s.is_none()).map(|(k, _)| k).collect();
    if !bad.is_empty() {
        return Err(Error::ConeViolation { nodes: bad });
    }
    Ok(out.into_iter().map(Option::unwrap).collect())
}

/// Residual `G[u] - σᵗ` and the smallest cone margin over the unknowns.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub residual: Vec<f64>,
    pub min_cone_margin: f64,
}

impl Evaluation {
    pub fn norm_inf(&self) -> f64 {
        self.residual.iter().fold(0.0, |m, r| m.max(r.abs()))
    }

    pub fn norm2(&self) -> f64 {
        self.residual.iter().map(|r| r * r).sum::<f64>().sqrt()
    }
}

pub fn evaluate(dom: &GridDomain, field: &ScalarField, fam: &CurvatureFamily, sigma_t: f64) -> Result<Evaluation> {
    if field.values.iter().any(|&u| !(u > 0.0)) {
        let nodes = field.values.iter().enumerate().filter(|(_, u)| !(**u > 0.0)).map(|(k, _)| k).collect();
        return Err(Error::ConeViolation { nodes });
    }
    let states = node_states(dom, field, fam)?;
    let residual: Vec<f64> = states.par_iter().map(|s| fam.eval(&s.kappa).map(|g| g - sigma_t)).collect::<Result<_>>()?;
    let min_cone_margin = states.iter().map(|s| fam.cone_margin(&s.kappa)).fold(f64::INFINITY, f64::min);
    Ok(Evaluation { residual, min_cone_margin })
}

/// `G[u] - σᵗ` at every unknown.
pub fn assemble_residual(dom: &GridDomain, field: &ScalarField, fam: &CurvatureFamily, sigma_t: f64) -> Result<Vec<f64>> {
    evaluate(dom, field, fam, sigma_t).map(|e| e.residual)
}

/// Coefficients of one Jacobian row: the centre and the eight arms.
fn row_coefficients(st: &NodeStencil, lin: &LinearizationAtPoint) -> ([f64; 8], f64) {
    let gs = [lin.gs[0], lin.gs[1]];
    let gxx = lin.gst[(0, 0)];
    let gyy = lin.gst[(1, 1)];
    let gxy = 0.5 * (lin.gst[(0, 1)] + lin.gst[(1, 0)]);
    let mut arms = [0.0; 8];
    let mut centre = lin.gu;
    for pos in 0..3 {
        let c = gs[0] * st.lines[0].first[pos]
            + gxx * st.lines[0].second[pos];
        let d = gs[1] * st.lines[1].first[pos] + gyy * st.lines[1].second[pos];
        let e = gxy * st.lines[2].second[pos];
        let f = -gxy * st.lines[3].second[pos];
        if pos < 2 {
            arms[pos] = c;
            arms[2 + pos] = d;
            arms[4 + pos] = e;
            arms[6 + pos] = f;
        } else {
            centre += c + d + e + f;
        }
    }
    (arms, centre)
}

/// Discretization of `ℒ = Gˢᵗ∂_s∂_t + Gˢ∂_s + G_u` at `u` over the unknowns.
/// The sparsity pattern depends only on the domain.
pub fn assemble_jacobian(dom: &GridDomain, field: &ScalarField, fam: &CurvatureFamily) -> Result<SparseJacobian> {
    let states = node_states(dom, field, fam)?;
    let rows: Vec<([f64; 8], f64)> = states
        .par_iter()
        .enumerate()
        .map(|(k, s)| linearize(fam, s).map(|lin| row_coefficients(&NodeStencil::new(dom, k), &lin)))
        .collect::<Result<_>>()?;
    let mut entries = Vec::with_capacity(9 * rows.len());
    for (k, (arms, centre)) in rows.iter().enumerate() {
        entries.push((k, k, *centre));
        for (a, c) in arms.iter().enumerate() {
            if let Some(j) = dom.neighbour(k, a) {
                entries.push((k, j, *c));
            }
        }
    }
    SparseJacobian::from_entries(dom.unknowns(), &entries)
}
