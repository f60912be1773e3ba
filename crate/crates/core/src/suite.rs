//! Seeded property suite over the curvature functions, pointwise graph
//! geometry and linearization. Every check draws its own sample stream from
//! the seed, so reports are reproducible byte for byte.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::curvfunc::CurvatureFamily;
use crate::eigen::{self, symmetrize};
use crate::error::Result;
use crate::linop::{eigen_sandwich_check, eval_g, linearize};
use crate::rng::SplitMix64;
use crate::shape::{gamma_lower, gamma_upper, hyperbolic_shape, split_pm, GraphPointState};

/// Family descriptors exercised by the suite.
pub const SHIPPED_FAMILIES: [&str; 7] = ["mean", "H2", "H3", "H2/H1", "H3/H1", "H3/H2", "avg(H1,H2/H1)"];

/// Margin from `∂Γ_k` required of sampled points.
const CONE_MARGIN: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub samples: usize,
    /// Largest error measure seen; the check passes when it is at most
    /// `tolerance` (strictly below it for strict checks). Slack-type checks
    /// record the negated slack, so negative values mean room to spare.
    pub max_error: f64,
    pub tolerance: f64,
    pub failures: usize,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub samples_per_check: usize,
    pub families: Vec<String>,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

struct Tally {
    name: &'static str,
    tolerance: f64,
    strict: bool,
    samples: usize,
    max_error: f64,
    failures: usize,
}

impl Tally {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self { name, tolerance, strict: false, samples: 0, max_error: f64::NEG_INFINITY, failures: 0 }
    }

    fn strict(name: &'static str, tolerance: f64) -> Self {
        Self { strict: true, ..Self::new(name, tolerance) }
    }

    fn record(&mut self, error: f64) {
        self.samples += 1;
        // NaN counts as a failure.
        let ok = if self.strict { error < self.tolerance } else { error <= self.tolerance };
        if !ok {
            self.failures += 1;
        }
        if error.is_nan() || error > self.max_error {
            self.max_error = error;
        }
    }

    fn finish(self) -> CheckResult {
        CheckResult {
            name: self.name.to_string(),
            samples: self.samples,
            max_error: if self.samples == 0 { 0.0 } else { self.max_error },
            tolerance: self.tolerance,
            failures: self.failures,
            passed: self.failures == 0,
        }
    }
}

fn families(n: usize) -> Vec<CurvatureFamily> {
    SHIPPED_FAMILIES
        .iter()
        .filter_map(|s| CurvatureFamily::parse(s, n).ok())
        .collect()
}

fn cone_point(rng: &mut SplitMix64, f: &CurvatureFamily) -> Vec<f64> {
    loop {
        let lam: Vec<f64> = (0..f.n()).map(|_| rng.uniform(-1.0, 3.0)).collect();
        if f.cone_margin(&lam) >= CONE_MARGIN {
            return lam;
        }
    }
}

/// Admissible point with entry `r` negative, or `None` when `Γ_k` has no
/// such points (`k = n`).
fn negative_entry_point(rng: &mut SplitMix64, f: &CurvatureFamily) -> Option<(Vec<f64>, usize)> {
    if f.cone_order() >= f.n() {
        return None;
    }
    loop {
        let r = rng.below(f.n());
        let mut lam: Vec<f64> = (0..f.n()).map(|_| rng.uniform(0.05, 3.0)).collect();
        lam[r] = -rng.uniform(1e-6, 1.5);
        if f.cone_margin(&lam) >= CONE_MARGIN {
            return Some((lam, r));
        }
    }
}

fn random_jet(rng: &mut SplitMix64, n: usize, slope: f64) -> (f64, DVector<f64>, DMatrix<f64>) {
    let u = rng.uniform(0.05, 2.0);
    let du = DVector::from_fn(n, |_, _| rng.uniform(-slope, slope));
    let d2 = symmetrize(&DMatrix::from_fn(n, n, |_, _| rng.uniform(-1.5, 1.5)));
    (u, du, d2)
}

fn admissible_state(rng: &mut SplitMix64, f: &CurvatureFamily) -> GraphPointState {
    loop {
        let (u, du, d2) = random_jet(rng, f.n(), 1.5);
        let st = hyperbolic_shape(u, &du, &d2).expect("u > 0 by construction");
        if f.cone_margin(&st.kappa) >= CONE_MARGIN {
            return st;
        }
    }
}

/// Runs every check with `samples` draws each.
pub fn run_property_suite(seed: u64, samples: usize) -> Result<SuiteReport> {
    // Curvature-function checks cycle over the families in n = 3; geometry
    // and linearization checks alternate n = 2 and n = 3.
    let fams3 = families(3);
    let fams2 = families(2);
    let pick = |i: usize| -> &CurvatureFamily {
        if i % 2 == 0 {
            &fams2[(i / 2) % fams2.len()]
        } else {
            &fams3[(i / 2) % fams3.len()]
        }
    };
    let stream = |k: u64| SplitMix64::new(seed.wrapping_add(k.wrapping_mul(0x9E37_79B9_7F4A_7C15)));
    let mut checks = Vec::new();

    // Negative-entry inequality, strong and weak forms.
    {
        let mut rng = stream(1);
        let mut t = Tally::new("negative_entry_gap", 1e-12);
        let eligible: Vec<&CurvatureFamily> = fams3.iter().filter(|f| f.cone_order() < f.n()).collect();
        for i in 0..samples {
            let f = eligible[i % eligible.len()];
            let (lam, r) = negative_entry_point(&mut rng, f).expect("eligible family");
            let gap = f.lemma110_gap(&lam, r)?;
            t.record(-gap.strong.min(gap.weak));
        }
        checks.push(t.finish());
    }

    // Eigenvalue sandwich between G^{st} and F^{ij}.
    {
        let mut rng = stream(2);
        let mut t = Tally::new("eigen_sandwich", 1e-10);
        for i in 0..samples {
            let f = pick(i);
            let st = admissible_state(&mut rng, f);
            let sl = eigen_sandwich_check(f, &st)?;
            t.record(-sl.lower.min(sl.upper));
        }
        checks.push(t.finish());
    }

    // Structure conditions of f.
    {
        let mut rng = stream(3);
        let mut homog = Tally::new("homogeneity", 1e-12);
        let mut norm = Tally::new("normalization", 1e-14);
        let mut mono = Tally::strict("monotonicity", 0.0);
        let mut conc = Tally::new("midpoint_concavity", 1e-12);
        let mut below_mean = Tally::new("bounded_by_mean", 1e-12);
        let mut grad_sum = Tally::new("gradient_sum_at_least_one", 1e-12);
        let mut grad_fd = Tally::new("gradient_vs_central_difference", 1e-7);
        for i in 0..samples {
            let f = &fams3[i % fams3.len()];
            let n = f.n() as f64;
            let lam = cone_point(&mut rng, f);
            let mu = cone_point(&mut rng, f);
            let v = f.eval(&lam)?;

            let mut e: f64 = 0.0;
            for c in [0.5, 2.0, 10.0] {
                let scaled: Vec<f64> = lam.iter().map(|x| c * x).collect();
                e = e.max((f.eval(&scaled)? - c * v).abs() / (c * v.abs().max(1.0)));
            }
            homog.record(e);

            let c = rng.uniform(0.1, 10.0);
            norm.record((f.eval(&vec![c; f.n()])? / c - 1.0).abs());

            let g = f.grad(&lam)?;
            mono.record(-g.iter().copied().fold(f64::INFINITY, f64::min));

            let mid: Vec<f64> = lam.iter().zip(&mu).map(|(a, b)| 0.5 * (a + b)).collect();
            conc.record(0.5 * (v + f.eval(&mu)?) - f.eval(&mid)?);

            below_mean.record(v - lam.iter().sum::<f64>() / n);
            grad_sum.record(1.0 - g.iter().sum::<f64>());

            let mut worst: f64 = 0.0;
            for j in 0..f.n() {
                let h = 1e-6 * lam[j].abs().max(1.0);
                let (mut p, mut m) = (lam.clone(), lam.clone());
                p[j] += h;
                m[j] -= h;
                let fd = match (f.eval(&p), f.eval(&m)) {
                    (Ok(a), Ok(b)) => (a - b) / (2.0 * h),
                    _ => f64::NAN,
                };
                worst = worst.max((fd - g[j]).abs() / g[j].abs().max(1e-3));
            }
            grad_fd.record(worst);
        }
        checks.extend([homog, norm, mono, conc, below_mean, grad_sum, grad_fd].map(Tally::finish));
    }

    // γ^{ik} γ_{kj} = δ_ij for |Du| ≤ 10.
    {
        let mut rng = stream(4);
        let mut t = Tally::new("gamma_inverse", 1e-12);
        for i in 0..samples {
            let n = 2 + i % 2;
            let dir = DVector::from_fn(n, |_, _| rng.uniform(-1.0, 1.0));
            let du = if dir.norm() > 0.0 { &dir / dir.norm() * rng.uniform(0.0, 10.0) } else { dir };
            let prod = gamma_upper(&du) * gamma_lower(&du);
            t.record((prod - DMatrix::identity(n, n)).amax());
        }
        checks.push(t.finish());
    }

    // κ_i = u κ^e_i + 1/w.
    {
        let mut rng = stream(5);
        let mut t = Tally::new("hyperbolic_euclidean_curvatures", 1e-11);
        for i in 0..samples {
            let (u, du, d2) = random_jet(&mut rng, 2 + i % 2, 3.0);
            let st = hyperbolic_shape(u, &du, &d2)?;
            let ke = st.kappa_e();
            let e = st
                .kappa
                .iter()
                .zip(&ke)
                .map(|(k, e)| (k - (u * e + 1.0 / st.w)).abs())
                .fold(0.0, f64::max);
            t.record(e);
        }
        checks.push(t.finish());
    }

    // A = A⁺ - A⁻ with A⁺A⁻ = 0, both positive semidefinite.
    {
        let mut rng = stream(6);
        let mut t = Tally::new("plus_minus_split", 1e-12);
        for i in 0..samples {
            let n = 2 + i % 2;
            let a = symmetrize(&DMatrix::from_fn(n, n, |_, _| rng.uniform(-2.0, 2.0)));
            let s = split_pm(&a);
            let recon = (&a - &s.plus + &s.minus).amax();
            let orth = (&s.plus * &s.minus).amax();
            let psd = -eigen::eigenvalues(&s.plus)[0].min(eigen::eigenvalues(&s.minus)[0]);
            t.record(recon.max(orth).max(psd));
        }
        checks.push(t.finish());
    }

    // Trace identity and linearization against finite differences.
    {
        let mut rng = stream(7);
        let mut trace = Tally::new("trace_identity", 1e-10);
        let mut fd_check = Tally::new("linearization_vs_finite_difference", 1e-5);
        for i in 0..samples {
            let f = pick(i);
            let n = f.n();
            let st = admissible_state(&mut rng, f);
            let lin = linearize(f, &st)?;
            let lhs = lin.gst.component_mul(&st.d2u).sum();
            trace.record((lhs - st.u * lin.gu).abs() / (1.0 + lhs.abs()));

            let dd2 = symmetrize(&DMatrix::from_fn(n, n, |_, _| rng.uniform(-1.0, 1.0)));
            let ddu = DVector::from_fn(n, |_, _| rng.uniform(-1.0, 1.0));
            let d0 = rng.uniform(-0.5, 0.5) * st.u;
            let h = 1e-6;
            let at = |s: f64| -> Option<f64> {
                let p = hyperbolic_shape(st.u + s * d0, &(&st.du + &ddu * s), &(&st.d2u + &dd2 * s)).ok()?;
                eval_g(f, &p).ok()
            };
            let err = match (at(h), at(-h)) {
                (Some(a), Some(b)) => {
                    let fd = (a - b) / (2.0 * h);
                    let an = lin.apply(d0, &ddu, &dd2);
                    let scale = an.abs().max(1e-3 * (lin.gst.amax() + lin.gs.amax() + lin.gu.abs()));
                    (fd - an).abs() / scale
                }
                _ => f64::NAN,
            };
            fd_check.record(err);
        }
        checks.push(trace.finish());
        checks.push(fd_check.finish());
    }

    let passed = checks.iter().all(|c| c.passed);
    Ok(SuiteReport {
        seed,
        samples_per_check: samples,
        families: SHIPPED_FAMILIES.iter().map(|s| s.to_string()).collect(),
        checks,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_run_passes_and_is_reproducible() {
        let a = run_property_suite(42, 300).unwrap();
        let b = run_property_suite(42, 300).unwrap();
        assert!(a.passed, "{:#?}", a.checks.iter().filter(|c| !c.passed).collect::<Vec<_>>());
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert!(a.checks.iter().all(|c| c.samples == 300));
        let c = run_property_suite(43, 300).unwrap();
        assert_ne!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&c).unwrap());
    }

    #[test]
    fn tally_flags_nan_and_excess() {
        let mut t = Tally::new("x", 1e-3);
        t.record(-1.0);
        t.record(f64::NAN);
        t.record(2e-3);
        let r = t.finish();
        assert_eq!(r.failures, 2);
        assert!(!r.passed && r.max_error.is_nan());
        let mut t = Tally::strict("y", 0.0);
        t.record(-1.0);
        t.record(0.0);
        let r = t.finish();
        assert_eq!((r.failures, r.max_error), (1, 0.0));
    }
}
