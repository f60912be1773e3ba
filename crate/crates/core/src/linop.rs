//! The operator `G(D²u, Du, u) = F(A[u])` and its linearization
//! `ℒ = G^{st} ∂_s∂_t + G^s ∂_s + G_u`.
//!
//! `F^{ij} = ∂F/∂a_ij` is assembled from Newton transformation tensors
//! `T_0 = I`, `T_m = σ_m(A) I - A T_{m-1}`, which satisfy
//! `∂σ_k(λ(A))/∂A = T_{k-1}(A)` and are polynomial in `A`, so the derivative
//! stays smooth through repeated eigenvalues.

use nalgebra::{DMatrix, DVector};

use crate::curvfunc::{binomial, CurvatureFamily, FamilyKind, Member};
use crate::eigen::{self, symmetrize};
use crate::error::{Error, Result};
use crate::shape::GraphPointState;

/// `F(A) = f(λ(A))`.
pub fn eval_f_matrix(fam: &CurvatureFamily, a: &DMatrix<f64>) -> Result<f64> {
    fam.eval(&eigen::eigenvalues(a))
}

/// Returns `σ_1..σ_k` of `A` together with `T_0..T_{k-1}`.
fn newton_tensors(a: &DMatrix<f64>, k: usize) -> (Vec<f64>, Vec<DMatrix<f64>>) {
    let n = a.nrows();
    let mut sig = vec![1.0];
    let mut tensors = vec![DMatrix::identity(n, n)];
    for m in 1..=k {
        let at = a * &tensors[m - 1];
        let s = at.trace() / m as f64;
        sig.push(s);
        if m < k {
            tensors.push(symmetrize(&(DMatrix::identity(n, n) * s - at)));
        }
    }
    (sig, tensors)
}

fn member_df(m: Member, a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    match m {
        Member::HkRoot(k) => {
            let (sig, t) = newton_tensors(a, k);
            let ck = binomial(n, k);
            let hk = sig[k] / ck;
            let scale = if k == 1 {
                1.0
            } else {
                hk.powf(1.0 / k as f64 - 1.0) / k as f64
            };
            &t[k - 1] * (scale / ck)
        }
        Member::Quotient(k, l) => {
            let (sig, t) = newton_tensors(a, k);
            let q = (sig[k] / binomial(n, k)) / (sig[l] / binomial(n, l));
            let f = q.powf(1.0 / (k - l) as f64);
            (&t[k - 1] / sig[k] - &t[l - 1] / sig[l]) * (f / (k - l) as f64)
        }
    }
}

/// `{F^{ij}(A)}`; positive definite on the admissible cone.
pub fn d_f(fam: &CurvatureFamily, a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let lam = eigen::eigenvalues(a);
    if !fam.in_cone(&lam) {
        return Err(Error::NotInCone);
    }
    let n = a.nrows();
    let members: Vec<(f64, Member)> = match fam.kind() {
        FamilyKind::HkRoot(k) => vec![(1.0, Member::HkRoot(*k))],
        FamilyKind::Quotient(k, l) => vec![(1.0, Member::Quotient(*k, *l))],
        FamilyKind::Composite(m) => m.clone(),
    };
    let mut out = DMatrix::zeros(n, n);
    for (w, m) in members {
        out += member_df(m, a) * w;
    }
    Ok(symmetrize(&out))
}

/// `G = f(κ[u])`.
pub fn eval_g(fam: &CurvatureFamily, state: &GraphPointState) -> Result<f64> {
    fam.eval(&state.kappa)
}

/// Coefficients of the linearized operator at one point.
#[derive(Debug, Clone)]
pub struct LinearizationAtPoint {
    /// `G^{st} = ∂G/∂u_st`, symmetric.
    pub gst: DMatrix<f64>,
    /// `G^s = ∂G/∂u_s`.
    pub gs: DVector<f64>,
    /// `G_u = ∂G/∂u`.
    pub gu: f64,
    /// `F^{ij}` at `A[u]`.
    pub fij: DMatrix<f64>,
}

pub fn linearize(fam: &CurvatureFamily, state: &GraphPointState) -> Result<LinearizationAtPoint> {
    let n = state.n();
    let fij = d_f(fam, &state.a)?;
    let (u, w) = (state.u, state.w);
    let g = &state.gamma_upper;
    let a = &state.a;
    let du = &state.du;

    let gst = symmetrize(&(g * &fij * g * (u / w)));
    let fa_trace = fij.component_mul(a).sum();
    let f_trace = fij.trace();
    let gu = (fa_trace - f_trace / w) / u;

    // Three-term first-derivative coefficient, written out index by index.
    let mut gs = DVector::zeros(n);
    for s in 0..n {
        let first = -du[s] / (w * w) * fa_trace;
        let mut second = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    second += fij[(i, j)]
                        * a[(i, k)]
                        * (w * du[k] * g[(s, j)] + du[j] * g[(k, s)])
                        / (1.0 + w);
                }
            }
        }
        let mut third = 0.0;
        for i in 0..n {
            for j in 0..n {
                third += fij[(i, j)] * du[i] * g[(s, j)];
            }
        }
        gs[s] = first - 2.0 / w * second + 2.0 / (w * w) * third;
    }

    Ok(LinearizationAtPoint { gst, gs, gu, fij })
}

impl LinearizationAtPoint {
    /// `⟨G^{st}, δD²u⟩ + ⟨G^s, δDu⟩ + G_u δu`.
    pub fn apply(&self, d_u: f64, d_du: &DVector<f64>, d_d2u: &DMatrix<f64>) -> f64 {
        self.gst.component_mul(d_d2u).sum() + self.gs.dot(d_du) + self.gu * d_u
    }
}

/// Slack in the first-derivative bound
/// `|G^s| ≤ G/w + (2/w) Σ F^{ii} + 2 Σ f_i |κ_i|` (Euclidean norm on the left).
pub fn gs_bound_slack(fam: &CurvatureFamily, state: &GraphPointState, lin: &LinearizationAtPoint) -> Result<f64> {
    let value = eval_g(fam, state)?;
    let f = fam.grad(&state.kappa)?;
    let weighted: f64 = f.iter().zip(&state.kappa).map(|(fi, k)| fi * k.abs()).sum();
    let bound = value / state.w + 2.0 / state.w * lin.fij.trace() + 2.0 * weighted;
    Ok(bound - lin.gs.norm())
}

/// Worst slacks in `w μ_k ≤ u f_k ≤ w³ μ_k` between the sorted eigenvalues of
/// `G^{st}` and of `F^{ij}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichSlack {
    pub lower: f64,
    pub upper: f64,
}

pub fn eigen_sandwich_check(fam: &CurvatureFamily, state: &GraphPointState) -> Result<SandwichSlack> {
    let lin = linearize(fam, state)?;
    let mu = eigen::eigenvalues(&lin.gst);
    let f = eigen::eigenvalues(&lin.fij);
    let (u, w) = (state.u, state.w);
    let mut lower = f64::INFINITY;
    let mut upper = f64::INFINITY;
    for (m, fk) in mu.iter().zip(&f) {
        lower = lower.min(u * fk - w * m);
        upper = upper.min(w * w * w * m - u * fk);
    }
    Ok(SandwichSlack { lower, upper })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;
    use crate::shape::hyperbolic_shape;

    fn fam(s: &str, n: usize) -> CurvatureFamily {
        CurvatureFamily::parse(s, n).unwrap()
    }

    fn random_admissible(rng: &mut SplitMix64, f: &CurvatureFamily) -> GraphPointState {
        let n = f.n();
        loop {
            let u = rng.uniform(0.05, 2.0);
            let du = DVector::from_fn(n, |_, _| rng.uniform(-1.5, 1.5));
            let d2 = symmetrize(&DMatrix::from_fn(n, n, |_, _| rng.uniform(-1.5, 1.5)));
            let st = hyperbolic_shape(u, &du, &d2).unwrap();
            if f.cone_margin(&st.kappa) >= 1e-3 {
                return st;
            }
        }
    }

    #[test]
    fn df_examples() {
        let mut rng = SplitMix64::new(1);
        let a = symmetrize(&DMatrix::from_fn(3, 3, |_, _| rng.uniform(-2.0, 2.0)));
        let mean = d_f(&fam("mean", 3), &(a + DMatrix::identity(3, 3) * 5.0)).unwrap();
        assert!((mean - DMatrix::identity(3, 3) / 3.0).amax() < 1e-15);
        for (s, n) in [("H2", 3), ("H3", 3), ("H2/H1", 4), ("avg(H1,H3/H2)", 3)] {
            let d = d_f(&fam(s, n), &DMatrix::identity(n, n)).unwrap();
            assert!((d - DMatrix::identity(n, n) / n as f64).amax() < 1e-14, "{s}");
        }
    }

    #[test]
    fn df_contractions_and_finite_differences() {
        let mut rng = SplitMix64::new(2);
        for s in ["H2", "H3", "H3/H1", "H3/H2", "avg(H1,H2/H1)"] {
            let f = fam(s, 3);
            for _ in 0..100 {
                let st = random_admissible(&mut rng, &f);
                let a = &st.a;
                let d = d_f(&f, a).unwrap();
                let g = f.grad(&st.kappa).unwrap();
                let s1: f64 = g.iter().zip(&st.kappa).map(|(x, k)| x * k).sum();
                let s2: f64 = g.iter().zip(&st.kappa).map(|(x, k)| x * k * k).sum();
                assert!((d.component_mul(a).sum() - s1).abs() < 1e-10);
                assert!((d.component_mul(&(a * a)).sum() - s2).abs() < 1e-10);
                assert!(eigen::eigenvalues(&d)[0] > 0.0);
                let e = symmetrize(&DMatrix::from_fn(3, 3, |_, _| rng.uniform(-1.0, 1.0)));
                let h = 1e-6;
                let fd = (eval_f_matrix(&f, &(a + &e * h)).unwrap()
                    - eval_f_matrix(&f, &(a - &e * h)).unwrap())
                    / (2.0 * h);
                let an = d.component_mul(&e).sum();
                assert!((fd - an).abs() <= 1e-6 * an.abs().max(1e-2), "{s}: {fd} vs {an}");
            }
        }
    }

    #[test]
    fn horosphere_linearization() {
        let c = 0.3;
        let st = hyperbolic_shape(c, &DVector::zeros(2), &DMatrix::zeros(2, 2)).unwrap();
        let f = fam("mean", 2);
        assert_eq!(eval_g(&f, &st).unwrap(), 1.0);
        let lin = linearize(&f, &st).unwrap();
        assert!((&lin.gst - DMatrix::identity(2, 2) * (c / 2.0)).amax() < 1e-15);
        assert!(lin.gu.abs() < 1e-15);
        assert!(lin.gs.amax() < 1e-15);
        let sl = eigen_sandwich_check(&f, &st).unwrap();
        assert!(sl.lower.abs() < 1e-15 && sl.upper.abs() < 1e-15);
    }

    #[test]
    fn cap_value() {
        let (sigma, r): (f64, f64) = (0.5, 1.0);
        let (x, y) = (0.2, 0.1);
        let s = (r * r - x * x - y * y).sqrt();
        let du = DVector::from_vec(vec![-x / s, -y / s]);
        let s3 = s * s * s;
        let d2 = DMatrix::from_row_slice(2, 2, &[-(r * r - y * y) / s3, -x * y / s3, -x * y / s3, -(r * r - x * x) / s3]);
        let st = hyperbolic_shape(s - sigma * r, &du, &d2).unwrap();
        for f in ["mean", "H2", "H2/H1", "avg(H1,H2)"] {
            assert!((eval_g(&fam(f, 2), &st).unwrap() - 0.5).abs() < 1e-10);
        }
    }

    #[test]
    fn scaling_curvatures_scales_value() {
        let f = fam("H2", 3);
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 0.2, 0.0, 0.2, 2.0, 0.1, 0.0, 0.1, 0.5]);
        let v = eval_f_matrix(&f, &a).unwrap();
        assert!((eval_f_matrix(&f, &(&a * 3.0)).unwrap() - 3.0 * v).abs() < 1e-13);
    }

    #[test]
    fn linearization_matches_directional_differences() {
        let mut rng = SplitMix64::new(9);
        for s in ["mean", "H2", "H2/H1", "avg(H1,H2)"] {
            for n in [2, 3] {
                let f = fam(s, n);
                for _ in 0..100 {
                    let st = random_admissible(&mut rng, &f);
                    let lin = linearize(&f, &st).unwrap();
                    let dd2 = symmetrize(&DMatrix::from_fn(n, n, |_, _| rng.uniform(-1.0, 1.0)));
                    let ddu = DVector::from_fn(n, |_, _| rng.uniform(-1.0, 1.0));
                    let du0 = rng.uniform(-1.0, 1.0) * st.u * 0.5;
                    let h = 1e-6;
                    let at = |t: f64| {
                        let p = hyperbolic_shape(st.u + t * du0, &(&st.du + &ddu * t), &(&st.d2u + &dd2 * t)).unwrap();
                        eval_g(&f, &p).unwrap()
                    };
                    let fd = (at(h) - at(-h)) / (2.0 * h);
                    let an = lin.apply(du0, &ddu, &dd2);
                    let scale = an.abs().max(1e-3 * (lin.gst.amax() + lin.gs.amax() + lin.gu.abs()));
                    assert!((fd - an).abs() <= 1e-6 * scale, "{s} n={n}: {fd} vs {an}");

                    // G^{st} u_st = u G_u.
                    let lhs = lin.gst.component_mul(&st.d2u).sum();
                    assert!((lhs - st.u * lin.gu).abs() < 1e-10 * (1.0 + lhs.abs()));
                    assert!(eigen::eigenvalues(&lin.gst)[0] > 0.0);
                    assert!(gs_bound_slack(&f, &st, &lin).unwrap() >= -1e-12);
                }
            }
        }
    }

    #[test]
    fn sandwich_random_and_stress() {
        let mut rng = SplitMix64::new(4);
        let f = fam("H2/H1", 2);
        for _ in 0..500 {
            let st = random_admissible(&mut rng, &f);
            let sl = eigen_sandwich_check(&f, &st).unwrap();
            assert!(sl.lower >= -1e-10 && sl.upper >= -1e-10, "{sl:?}");
        }
        // |Du| = 1.9 against the gradient bound 1/σ with σ = 0.5.
        let du = DVector::from_vec(vec![1.9 * 0.6, 1.9 * 0.8]);
        let d2 = DMatrix::from_row_slice(2, 2, &[-2.0, 0.3, 0.3, -1.0]);
        let st = hyperbolic_shape(0.1, &du, &d2).unwrap();
        for s in ["mean", "H2", "H2/H1"] {
            let sl = eigen_sandwich_check(&fam(s, 2), &st).unwrap();
            assert!(sl.lower >= -1e-10 && sl.upper >= -1e-10);
        }
    }

    #[test]
    fn concave_in_hessian() {
        let mut rng = SplitMix64::new(8);
        let f = fam("H2", 3);
        let mut checked = 0;
        while checked < 200 {
            let st = random_admissible(&mut rng, &f);
            let p = symmetrize(&DMatrix::from_fn(3, 3, |_, _| rng.uniform(-1.0, 1.0)));
            let h = 1e-3;
            let g = |t: f64| {
                hyperbolic_shape(st.u, &st.du, &(&st.d2u + &p * t))
                    .ok()
                    .and_then(|s| eval_g(&f, &s).ok())
            };
            if let (Some(a), Some(b), Some(c)) = (g(-h), g(0.0), g(h)) {
                let pn = p.norm_squared();
                assert!(a - 2.0 * b + c <= 1e-6 * pn * h * h);
                checked += 1;
            }
        }
    }
}
