//! Rotationally symmetric solutions on a disk, as a two-point boundary
//! value problem in `r`.
//!
//! For `u = u(|x|)` the principal curvatures are `κ₁ = u u″/w³ + 1/w` and
//! `κ_t = u u′/(r w) + 1/w` with multiplicity `n - 1`, `w = √(1 + u′²)`.

use serde::{Deserialize, Serialize};

use crate::barrier::sphere_radii;
use crate::curvfunc::CurvatureFamily;
use crate::error::{Error, Result};
use crate::solver::banded::BandMatrix;

/// Curvature vector `(κ₁, κ_t, ..., κ_t)` at radius `r`; at `r = 0` the
/// quotient `u′/r` is replaced by its limit `u″`.
fn radial_kappa(u: f64, up: f64, upp: f64, r: f64, n: usize) -> Vec<f64> {
    let w = (1.0 + up * up).sqrt();
    let k1 = u * upp / (w * w * w) + 1.0 / w;
    let kt = if r == 0.0 { k1 } else { u * up / (r * w) + 1.0 / w };
    let mut k = vec![kt; n];
    k[0] = k1;
    k
}

/// `f(κ₁, κ_t, ..., κ_t) - σ`.
pub fn radial_residual(u: f64, up: f64, upp: f64, r: f64, family: &CurvatureFamily, sigma: f64, n: usize) -> Result<f64> {
    if !(u > 0.0) {
        return Err(Error::NonpositiveHeight(u));
    }
    if r < 0.0 {
        return Err(Error::PreconditionViolated(format!("radius must be nonnegative, got {r}")));
    }
    let fam = family.with_dimension(n)?;
    Ok(fam.eval(&radial_kappa(u, up, upp, r, n))? - sigma)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialOptions {
    pub mesh_size: usize,
    /// Residual tolerance; raised to the round-off level of fine meshes.
    pub tol: f64,
    pub max_iterations: usize,
    /// Experimental forcing `σ(r) = σ + ramp·(1 - (r/r_b)²)`; zero for the
    /// constant-curvature problem.
    pub sigma_ramp: f64,
}

impl Default for RadialOptions {
    fn default() -> Self {
        Self { mesh_size: 256, tol: 1e-10, max_iterations: 50, sigma_ramp: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub r_nodes: Vec<f64>,
    pub u_values: Vec<f64>,
    pub sigma: f64,
    pub eps: f64,
    pub family: String,
    pub n: usize,
    pub sigma_ramp: f64,
    pub iterations: usize,
    pub residual: f64,
    pub trace: Vec<f64>,
}

/// Radius of the cap through `(r_b, eps)`, or why there is none.
fn cap_radius(sigma: f64, eps: f64, r_b: f64) -> Result<f64> {
    if !(eps > 0.0) || !(r_b > 0.0) {
        return Err(Error::NoCapInitializer(format!("need ε > 0 and r_b > 0, got ε = {eps}, r_b = {r_b}")));
    }
    let (big_r, _) = sphere_radii(sigma, eps, r_b, f64::INFINITY);
    if !(big_r.is_finite() && big_r > r_b && (big_r * big_r - r_b * r_b).sqrt() - sigma * big_r > 0.0) {
        return Err(Error::NoCapInitializer(format!("no cap through (r_b, ε) = ({r_b}, {eps})")));
    }
    Ok(big_r)
}

/// The equidistant cap through `(r_b, eps)` sampled at `r`.
pub fn cap_profile(sigma: f64, eps: f64, r_b: f64, r: f64) -> Result<f64> {
    let big_r = cap_radius(sigma, eps, r_b)?;
    Ok((big_r * big_r - r * r).sqrt() - sigma * big_r)
}

pub fn solve_radial(family: &CurvatureFamily, sigma: f64, eps: f64, r_b: f64, n: usize, mesh_size: usize) -> Result<RadialProfile> {
    solve_radial_with(family, sigma, eps, r_b, n, &RadialOptions { mesh_size, ..Default::default() })
}

struct Problem<'a> {
    fam: &'a CurvatureFamily,
    n: usize,
    h: f64,
    m: usize,
    eps: f64,
    sigma: f64,
    ramp: f64,
    r_b: f64,
}

impl Problem<'_> {
    fn sigma_at(&self, r: f64) -> f64 {
        self.sigma + self.ramp * (1.0 - (r / self.r_b).powi(2))
    }

    fn at(&self, u: &[f64], i: isize) -> f64 {
        if i < 0 {
            u[(-i) as usize]
        } else if i as usize >= self.m {
            self.eps
        } else {
            u[i as usize]
        }
    }

    /// `(u, u′, u″)` at node `i`, with the ghost value `u_{-1} = u_1`.
    fn jet(&self, u: &[f64], i: usize) -> (f64, f64, f64) {
        let ii = i as isize;
        let (um, u0, up) = (self.at(u, ii - 1), u[i], self.at(u, ii + 1));
        ((u0), (up - um) / (2.0 * self.h), (up - 2.0 * u0 + um) / (self.h * self.h))
    }

    /// Residuals and the smallest cone margin.
    fn residual(&self, u: &[f64]) -> Result<(Vec<f64>, f64)> {
        let mut res = Vec::with_capacity(self.m);
        let mut margin = f64::INFINITY;
        for i in 0..self.m {
            let (v, p1, p2) = self.jet(u, i);
            if !(v > 0.0) {
                return Err(Error::NonpositiveHeight(v));
            }
            let r = i as f64 * self.h;
            let k = radial_kappa(v, p1, p2, r, self.n);
            margin = margin.min(self.fam.cone_margin(&k));
            res.push(self.fam.eval(&k)? - self.sigma_at(r));
        }
        Ok((res, margin))
    }

    fn jacobian(&self, u: &[f64]) -> Result<BandMatrix> {
        let (m, h) = (self.m, self.h);
        let mut jac = BandMatrix::zeros(m, 1, 1);
        for i in 0..m {
            let (v, p1, p2) = self.jet(u, i);
            let r = i as f64 * h;
            let g = self.fam.grad(&radial_kappa(v, p1, p2, r, self.n))?;
            if i == 0 {
                // All curvatures equal u u″ + 1 with u″ = 2(u_1 - u_0)/h².
                let gsum: f64 = g.iter().sum();
                jac.add(0, 0, gsum * (p2 - 2.0 * v / (h * h)));
                if m > 1 {
                    jac.add(0, 1, gsum * 2.0 * v / (h * h));
                }
                continue;
            }
            let g1 = g[0];
            let gt: f64 = g[1..].iter().sum();
            let w = (1.0 + p1 * p1).sqrt();
            let (w3, w5) = (w.powi(3), w.powi(5));
            let dk1_du = p2 / w3;
            let dk1_dp1 = -3.0 * v * p2 * p1 / w5 - p1 / w3;
            let dk1_dp2 = v / w3;
            let dkt_du = p1 / (r * w);
            let dkt_dp1 = v / (r * w3) - p1 / w3;
            let d_du = g1 * dk1_du + gt * dkt_du;
            let d_dp1 = g1 * dk1_dp1 + gt * dkt_dp1;
            let d_dp2 = g1 * dk1_dp2;
            jac.add(i, i, d_du - 2.0 * d_dp2 / (h * h));
            jac.add(i, i - 1, -d_dp1 / (2.0 * h) + d_dp2 / (h * h));
            if i + 1 < m {
                jac.add(i, i + 1, d_dp1 / (2.0 * h) + d_dp2 / (h * h));
            }
        }
        Ok(jac)
    }
}

pub fn solve_radial_with(
    family: &CurvatureFamily,
    sigma: f64,
    eps: f64,
    r_b: f64,
    n: usize,
    opts: &RadialOptions,
) -> Result<RadialProfile> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::PreconditionViolated(format!("σ must lie in (0,1), got {sigma}")));
    }
    if opts.mesh_size < 4 {
        return Err(Error::PreconditionViolated("radial mesh needs at least 4 intervals".into()));
    }
    let fam = family.with_dimension(n)?;
    let big_r = cap_radius(sigma, eps, r_b)?;
    let m = opts.mesh_size;
    let h = r_b / m as f64;
    let prob = Problem { fam: &fam, n, h, m, eps, sigma, ramp: opts.sigma_ramp, r_b };
    let mut u: Vec<f64> = (0..m).map(|i| (big_r * big_r - (i as f64 * h).powi(2)).sqrt() - sigma * big_r).collect();

    let (mut res, _) = prob.residual(&u)?;
    let norm = |r: &[f64]| r.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let norm2 = |r: &[f64]| r.iter().map(|x| x * x).sum::<f64>();
    let mut trace = vec![norm(&res)];
    let mut iterations = 0;
    // Second differences of O(u) values carry O(ε_mach·u/h²) round-off.
    let u_scale = u.iter().fold(eps, |a, x| a.max(x.abs()));
    let tol = opts.tol.max(16.0 * f64::EPSILON * u_scale / (h * h));
    while norm(&res) > tol {
        if iterations == opts.max_iterations {
            return Err(Error::NewtonDiverged { trace });
        }
        let lu = prob.jacobian(&u)?.factor()?;
        let neg: Vec<f64> = res.iter().map(|x| -x).collect();
        let delta = lu.solve(&neg);
        let mut lambda = 1.0;
        let before = norm2(&res);
        loop {
            if lambda < 0.5f64.powi(20) {
                return Err(Error::NewtonDiverged { trace });
            }
            let cand: Vec<f64> = u.iter().zip(&delta).map(|(a, d)| a + lambda * d).collect();
            if let Ok((r, margin)) = prob.residual(&cand) {
                if margin > 1e-8 && (norm2(&r) < before || norm(&r) <= 1e-14) {
                    u = cand;
                    res = r;
                    break;
                }
            }
            lambda *= 0.5;
        }
        iterations += 1;
        trace.push(norm(&res));
    }

    let mut r_nodes: Vec<f64> = (0..=m).map(|i| i as f64 * h).collect();
    r_nodes[m] = r_b;
    u.push(eps);
    Ok(RadialProfile {
        r_nodes,
        u_values: u,
        sigma,
        eps,
        family: fam.to_string(),
        n,
        sigma_ramp: opts.sigma_ramp,
        iterations,
        residual: norm(&res),
        trace,
    })
}

impl RadialProfile {
    pub fn mesh_size(&self) -> usize {
        self.r_nodes.len() - 1
    }

    fn h(&self) -> f64 {
        self.r_nodes[1] - self.r_nodes[0]
    }

    /// `u′` at node `i`: central inside, zero at the axis, third-order
    /// one-sided at the boundary.
    pub fn slope(&self, i: usize) -> f64 {
        let u = &self.u_values;
        let m = self.mesh_size();
        let h = self.h();
        if i == 0 {
            0.0
        } else if i < m {
            (u[i + 1] - u[i - 1]) / (2.0 * h)
        } else {
            (11.0 * u[m] - 18.0 * u[m - 1] + 9.0 * u[m - 2] - 2.0 * u[m - 3]) / (6.0 * h)
        }
    }

    pub fn w_values(&self) -> Vec<f64> {
        (0..=self.mesh_size()).map(|i| (1.0 + self.slope(i).powi(2)).sqrt()).collect()
    }

    pub fn max_w(&self) -> f64 {
        self.w_values().into_iter().fold(0.0, f64::max)
    }

    /// `ν^{n+1} = 1/w` at `r_b`.
    pub fn boundary_nu(&self) -> f64 {
        1.0 / (1.0 + self.slope(self.mesh_size()).powi(2)).sqrt()
    }

    /// Curvature vectors at the interior nodes.
    pub fn kappa(&self) -> Vec<Vec<f64>> {
        let h = self.h();
        let u = &self.u_values;
        (0..self.mesh_size())
            .map(|i| {
                let (p1, p2) = if i == 0 {
                    (0.0, 2.0 * (u[1] - u[0]) / (h * h))
                } else {
                    ((u[i + 1] - u[i - 1]) / (2.0 * h), (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (h * h))
                };
                radial_kappa(u[i], p1, p2, self.r_nodes[i], self.n)
            })
            .collect()
    }

    /// Piecewise-linear interpolation in `r ∈ [0, r_b]`.
    pub fn interpolate(&self, r: f64) -> f64 {
        let m = self.mesh_size();
        let t = (r.abs() / self.h()).clamp(0.0, m as f64);
        let i = (t.floor() as usize).min(m - 1);
        let s = t - i as f64;
        (1.0 - s) * self.u_values[i] + s * self.u_values[i + 1]
    }

    /// CSV with a `# {json}` parameter line and columns `r,u`.
    pub fn to_csv(&self) -> String {
        let header = serde_json::json!({
            "family": self.family,
            "n": self.n,
            "sigma": self.sigma,
            "eps": self.eps,
            "r_b": self.r_nodes[self.mesh_size()],
            "mesh_size": self.mesh_size(),
            "sigma_ramp": self.sigma_ramp,
            "iterations": self.iterations,
            "residual": self.residual,
        });
        let mut s = format!("# {header}\nr,u\n");
        for (r, u) in self.r_nodes.iter().zip(&self.u_values) {
            s.push_str(&format!("{r:.17e},{u:.17e}\n"));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::barrier::angle_bounds;

    fn fam(s: &str, n: usize) -> CurvatureFamily {
        CurvatureFamily::parse(s, n).unwrap()
    }

    #[test]
    fn cap_has_zero_residual() {
        let (sigma, big_r) = (0.5f64, 1.0f64);
        for r in [0.0, 0.1, 0.4, 0.8] {
            let q = (big_r * big_r - r * r).sqrt();
            let u = q - sigma * big_r;
            let up = -r / q;
            let upp = -big_r * big_r / q.powi(3);
            for (f, n) in [("mean", 2), ("H2", 3), ("H3/H1", 4)] {
                assert!(radial_residual(u, up, upp, r, &fam(f, n), sigma, n).unwrap().abs() < 1e-11);
            }
        }
    }

    #[test]
    fn horosphere_and_axis_limit() {
        let f = fam("H2", 3);
        assert!((radial_residual(0.3, 0.0, 0.0, 0.5, &f, 0.4, 3).unwrap() - 0.6).abs() < 1e-15);
        // Smooth profile u = 1 - r²/4: u′ = -r/2, u″ = -1/2.
        let r = 1e-8;
        let a = radial_residual(1.0 - r * r / 4.0, -r / 2.0, -0.5, r, &f, 0.5, 3).unwrap();
        let b = radial_residual(1.0, 0.0, -0.5, 0.0, &f, 0.5, 3).unwrap();
        assert!((a - b).abs() <= 1e-6);
    }

    #[test]
    fn mean_n2_reproduces_cap() {
        let (sigma, eps) = (0.5, 0.01);
        let mut errs = Vec::new();
        for m in [64, 128, 256] {
            let p = solve_radial(&fam("mean", 2), sigma, eps, 1.0, 2, m).unwrap();
            assert!(p.residual <= 1e-10);
            let err = p
                .r_nodes
                .iter()
                .zip(&p.u_values)
                .map(|(r, u)| (u - cap_profile(sigma, eps, 1.0, *r).unwrap()).abs())
                .fold(0.0, f64::max);
            let h = 1.0 / m as f64;
            assert!(err <= 5.0 * h * h, "m={m}: {err}");
            errs.push(err);
        }
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!((3.0..=5.0).contains(&ratio), "{errs:?}");
        }
    }

    #[test]
    fn h2_in_dimension_three() {
        let sigma = 0.5;
        let p = solve_radial(&fam("H2", 3), sigma, 0.01, 1.0, 3, 256).unwrap();
        assert!(p.max_w() <= 1.0 / sigma + 1e-8);
        assert!(p.u_values.iter().all(|&u| u >= 0.01 - 1e-12));
        for k in p.kappa() {
            assert!(fam("H2", 3).in_cone(&k));
        }
    }

    #[test]
    fn boundary_angle_within_envelope() {
        let sigma = 0.5;
        let mut prev = f64::INFINITY;
        for eps in [0.01, 0.005, 0.0025] {
            let p = solve_radial(&fam("mean", 2), sigma, eps, 1.0, 2, 1024).unwrap();
            let (lo, hi) = angle_bounds(sigma, eps, 1.0, f64::INFINITY);
            let dev = p.boundary_nu() - sigma;
            assert!(dev >= lo && dev <= hi, "eps={eps}: {dev} not in [{lo}, {hi}]");
            assert!(dev < prev);
            prev = dev;
        }
    }

    #[test]
    fn ramp_breaks_the_cap() {
        let opts = RadialOptions { mesh_size: 256, sigma_ramp: 0.05, ..Default::default() };
        let a = solve_radial_with(&fam("mean", 2), 0.5, 0.02, 1.0, 2, &opts).unwrap();
        let b = solve_radial_with(&fam("H2", 2), 0.5, 0.02, 1.0, 2, &opts).unwrap();
        let diff = a.u_values.iter().zip(&b.u_values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(diff > 1e-6);
    }

    #[test]
    fn csv_has_header() {
        let p = solve_radial(&fam("mean", 2), 0.6, 0.02, 1.0, 2, 32).unwrap();
        let csv = p.to_csv();
        let mut lines = csv.lines();
        let head = lines.next().unwrap();
        assert!(head.starts_with("# {"));
        let v: serde_json::Value = serde_json::from_str(&head[2..]).unwrap();
        assert_eq!(v["mesh_size"], 32);
        assert_eq!(lines.next().unwrap(), "r,u");
        assert_eq!(lines.count(), 33);
    }

    #[test]
    fn invalid_inputs() {
        assert!(matches!(solve_radial(&fam("mean", 2), 0.5, 0.0, 1.0, 2, 32), Err(Error::NoCapInitializer(_))));
        assert!(solve_radial(&fam("mean", 2), 1.5, 0.01, 1.0, 2, 32).is_err());
    }
}
