//! Scalar functions behind the curvature threshold `σ₀`, with root finding
//! and grid verification of their inequalities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `φ(a) = (8/3)a + (22/27)a³ - (5/27)(a² + 3)^{3/2}`.
pub fn phi(a: f64) -> f64 {
    8.0 / 3.0 * a + 22.0 / 27.0 * a.powi(3) - 5.0 / 27.0 * (a * a + 3.0).powf(1.5)
}

pub fn phi_prime(a: f64) -> f64 {
    8.0 / 3.0 + 22.0 / 9.0 * a * a - 5.0 / 9.0 * a * (a * a + 3.0).sqrt()
}

/// The unique zero of `φ` in `(0, 1)`, by bisection to `1e-14`.
pub fn sigma0() -> Result<f64> {
    bisect(phi, 0.0, 1.0, 1e-14)
}

/// Bisection for a sign change of `f` on `[lo, hi]`.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let (f_lo, f_hi) = (f(lo), f(hi));
    if !(f_lo < 0.0 && f_hi > 0.0 || f_lo > 0.0 && f_hi < 0.0) {
        return Err(Error::BracketFailure { lo, hi, f_lo, f_hi });
    }
    let rising = f_lo < 0.0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if (f(mid) < 0.0) == rising {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn check_a(a: f64) -> Result<()> {
    if a > 0.0 && a < 1.0 {
        Ok(())
    } else {
        Err(Error::DomainError(format!("a must lie in (0,1), got {a}")))
    }
}

/// `γ(y) = a - 2(1 - y²)(y - a)` for `y ∈ [a, 1]`.
pub fn gamma_y(y: f64, a: f64) -> Result<f64> {
    check_a(a)?;
    if !(y >= a && y <= 1.0) {
        return Err(Error::DomainError(format!("y must lie in [a, 1] = [{a}, 1], got {y}")));
    }
    Ok(a - 2.0 * (1.0 - y * y) * (y - a))
}

/// `φ_θ(y) = γ(y) - (a - γ(y))/(4(1 - θ)) + a³`.
pub fn phi_theta(y: f64, a: f64, theta: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&theta) {
        return Err(Error::DomainError(format!("θ must lie in [0,1), got {theta}")));
    }
    let g = gamma_y(y, a)?;
    Ok(g - (a - g) / (4.0 * (1.0 - theta)) + a.powi(3))
}

/// `(7/3)a - (4/27)a³ - (4/27)(a² + 3)^{3/2}`, the minimum of `γ` over `y`.
pub fn gamma_lower_bound(a: f64) -> f64 {
    7.0 / 3.0 * a - 4.0 / 27.0 * a.powi(3) - 4.0 / 27.0 * (a * a + 3.0).powf(1.5)
}

/// Minimizer `y* = (a + √(a² + 3))/3` of `γ` on `[a, 1]`.
pub fn gamma_argmin(a: f64) -> f64 {
    (a + (a * a + 3.0).sqrt()) / 3.0
}

/// Points `a < y_1 < ... < y_m ≤ 1` on a uniform grid.
fn y_grid(a: f64, m: usize) -> impl Iterator<Item = f64> {
    (1..=m).map(move |i| a + (1.0 - a) * i as f64 / m as f64)
}

/// `min_y φ_θ(y)` over a grid, together with the value at `y*`.
pub fn min_phi_theta(a: f64, theta: f64, m: usize) -> Result<f64> {
    let mut best = phi_theta(gamma_argmin(a).min(1.0), a, theta)?;
    for y in y_grid(a, m) {
        best = best.min(phi_theta(y, a, theta)?);
    }
    Ok(best)
}

/// Largest `θ ∈ [0, 1)` with `min_y φ_θ > 0`, by bisection; `None` when
/// already `θ = 0` fails.
pub fn largest_theta(a: f64, m: usize) -> Result<Option<f64>> {
    if min_phi_theta(a, 0.0, m)? <= 0.0 {
        return Ok(None);
    }
    let (mut lo, mut hi) = (0.0, 1.0 - 1e-12);
    if min_phi_theta(a, hi, m)? > 0.0 {
        return Ok(Some(hi));
    }
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if min_phi_theta(a, mid, m)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(lo))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCheck {
    pub points: usize,
    pub min_slack: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaRow {
    pub a: f64,
    pub theta_max: Option<f64>,
    /// `min_y φ_θ` at half of `theta_max`.
    pub min_phi_theta_at_half: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarReport {
    pub sigma0: f64,
    pub sigma0_in_bracket: bool,
    pub phi_at_0: f64,
    pub phi_at_1: f64,
    pub phi_prime_min: f64,
    /// `γ(y) ≥ bound` on a grid with `a² > 1/8`, and `bound > 0` there.
    pub gamma_bound: GridCheck,
    /// `φ₀(y) ≥ φ(a)` for `a ∈ {0.4, 0.6, 0.8}`.
    pub phi_chain: GridCheck,
    /// `φ_θ` nonincreasing in `θ`.
    pub theta_monotone: GridCheck,
    pub theta: Vec<ThetaRow>,
    pub pass: bool,
}

/// Slack tolerance for bounds attained with equality at `y*`.
pub const ATTAINED_TOL: f64 = 1e-12;

pub fn verification_table() -> Result<ScalarReport> {
    let s0 = sigma0()?;
    let phi_prime_min = (1..1000).map(|i| phi_prime(i as f64 / 1000.0)).fold(f64::INFINITY, f64::min);

    let a_lo = (0.125f64 + 1e-6).sqrt();
    let mut gb = GridCheck { points: 0, min_slack: f64::INFINITY, pass: true };
    for i in 0..100 {
        let a = a_lo + (0.999 - a_lo) * i as f64 / 99.0;
        let bound = gamma_lower_bound(a);
        for y in y_grid(a, 100) {
            let slack = gamma_y(y, a)? - bound;
            gb.points += 1;
            gb.min_slack = gb.min_slack.min(slack);
            if slack < -ATTAINED_TOL || bound <= 0.0 {
                gb.pass = false;
            }
        }
    }

    let mut chain = GridCheck { points: 0, min_slack: f64::INFINITY, pass: true };
    for a in [0.4, 0.6, 0.8] {
        for y in y_grid(a, 1000) {
            let slack = phi_theta(y, a, 0.0)? - phi(a);
            chain.points += 1;
            chain.min_slack = chain.min_slack.min(slack);
            if slack < -ATTAINED_TOL {
                chain.pass = false;
            }
        }
    }

    let mut mono = GridCheck { points: 0, min_slack: f64::INFINITY, pass: true };
    for a in [0.4, 0.6, 0.8] {
        for y in y_grid(a, 50) {
            for i in 0..50 {
                let (t0, t1) = (i as f64 / 50.0, (i + 1) as f64 / 50.0 * 0.999);
                let slack = phi_theta(y, a, t0)? - phi_theta(y, a, t1)?;
                mono.points += 1;
                mono.min_slack = mono.min_slack.min(slack);
                if slack < -ATTAINED_TOL {
                    mono.pass = false;
                }
            }
        }
    }

    let mut theta = Vec::new();
    for a in [s0 + 0.05, 0.6, 0.8] {
        let theta_max = largest_theta(a, 2000)?;
        let min_phi_theta_at_half = match theta_max {
            Some(t) => Some(min_phi_theta(a, 0.5 * t, 2000)?),
            None => None,
        };
        theta.push(ThetaRow { a, theta_max, min_phi_theta_at_half });
    }

    let sigma0_in_bracket = s0 > 0.3703 && s0 < 0.3704;
    let theta_ok = theta.iter().all(|r| r.theta_max.is_some_and(|t| t > 0.0) && r.min_phi_theta_at_half.is_some_and(|v| v > 0.0));
    let pass = sigma0_in_bracket && phi_prime_min > 0.0 && gb.pass && chain.pass && mono.pass && theta_ok;
    Ok(ScalarReport {
        sigma0: s0,
        sigma0_in_bracket,
        phi_at_0: phi(0.0),
        phi_at_1: phi(1.0),
        phi_prime_min,
        gamma_bound: gb,
        phi_chain: chain,
        theta_monotone: mono,
        theta,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_values() {
        assert!((phi(0.0) + 5.0 / 27.0 * 27f64.sqrt()).abs() < 1e-15);
        assert!((phi(0.0) + 0.9623).abs() < 1e-4);
        assert!((phi(1.0) - 2.0).abs() < 1e-14);
        assert!(phi(0.37035).abs() < 1e-4);
    }

    #[test]
    fn sigma0_bracket() {
        let s = sigma0().unwrap();
        assert!(s > 0.3703 && s < 0.3704);
        assert!((s - 0.370_349_897_219_310_7).abs() < 1e-13);
        assert!(phi(s - 1e-6) < 0.0 && phi(s + 1e-6) > 0.0);
        for i in 1..1000 {
            assert!(phi_prime(i as f64 / 1000.0) > 0.0);
        }
    }

    #[test]
    fn phi_prime_matches_difference() {
        for a in [0.1, 0.5, 0.9] {
            let h = 1e-6;
            let fd = (phi(a + h) - phi(a - h)) / (2.0 * h);
            assert!((fd - phi_prime(a)).abs() < 1e-8);
        }
    }

    #[test]
    fn bracket_failure_reported() {
        assert!(matches!(bisect(|x| x + 1.0, 0.0, 1.0, 1e-10), Err(Error::BracketFailure { .. })));
    }

    #[test]
    fn gamma_examples_and_domain() {
        for a in [0.1, 0.5, 0.9] {
            assert_eq!(gamma_y(1.0, a).unwrap(), a);
        }
        assert!(gamma_y(0.2, 0.5).is_err());
        assert!(gamma_y(0.7, 1.5).is_err());
        assert!(phi_theta(0.7, 0.5, 1.0).is_err());
    }

    #[test]
    fn bound_is_attained_minimum() {
        for a in [0.36, 0.5, 0.8] {
            let y = gamma_argmin(a);
            assert!((gamma_y(y, a).unwrap() - gamma_lower_bound(a)).abs() < 1e-14);
            assert!(gamma_lower_bound(a) > 0.0);
        }
        // The bound vanishes exactly at a² = 1/8.
        assert!(gamma_lower_bound(0.125f64.sqrt()).abs() < 1e-14);
        // φ₀ at its minimizer is φ(a).
        for a in [0.4, 0.6, 0.8] {
            assert!((phi_theta(gamma_argmin(a), a, 0.0).unwrap() - phi(a)).abs() < 1e-14);
        }
    }

    #[test]
    fn theta_closed_form_agrees() {
        for a in [0.42, 0.6, 0.8] {
            let g = gamma_lower_bound(a);
            let closed = 1.0 - (a - g) / (4.0 * (g + a.powi(3)));
            let t = largest_theta(a, 2000).unwrap().unwrap();
            assert!((t - closed.clamp(0.0, 1.0)).abs() < 1e-9, "{a}: {t} vs {closed}");
        }
        assert_eq!(largest_theta(0.3, 500).unwrap(), None);
    }

    #[test]
    fn table_passes() {
        let t = verification_table().unwrap();
        assert!(t.pass, "{t:?}");
        assert_eq!(t.gamma_bound.points, 10_000);
    }
}
