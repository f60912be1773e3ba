//! Equidistant spheres and horospheres as barriers: closed forms, radii,
//! boundary angle bounds, and post-hoc audits of computed graphs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::domain::{GridDomain, Point};
use crate::solver::ScalarField;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    /// Center at height `-σR`; curvatures w.r.t. the outward normal.
    Lower,
    /// Center at height `+σR`; curvatures w.r.t. the inward normal.
    Upper,
}

/// A Euclidean sphere meeting the ideal boundary at a constant angle; all
/// its hyperbolic principal curvatures equal `sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquidistantSphere {
    pub center_horizontal: Point,
    pub radius: f64,
    pub sigma: f64,
    pub orientation: Orientation,
}

impl EquidistantSphere {
    pub fn new(center_horizontal: Point, radius: f64, sigma: f64, orientation: Orientation) -> Result<Self> {
        if !(radius > 0.0) || !(sigma > 0.0 && sigma < 1.0) {
            return Err(Error::PreconditionViolated(format!(
                "equidistant sphere needs R > 0 and σ ∈ (0,1), got R = {radius}, σ = {sigma}"
            )));
        }
        Ok(Self { center_horizontal, radius, sigma, orientation })
    }

    /// Lower sphere whose slice at height `eps` is the disk of radius `r`
    /// about `center`.
    pub fn through_slice(center: Point, r: f64, sigma: f64, eps: f64) -> Result<Self> {
        let (r1, _) = sphere_radii(sigma, eps, r, f64::INFINITY);
        Self::new(center, r1, sigma, Orientation::Lower)
    }

    /// Signed vertical offset of the center.
    pub fn center_height(&self) -> f64 {
        match self.orientation {
            Orientation::Lower => -self.sigma * self.radius,
            Orientation::Upper => self.sigma * self.radius,
        }
    }

    /// Radius of the footprint `{x_{n+1} > 0}` of the sphere on the boundary plane.
    pub fn footprint_radius(&self) -> f64 {
        self.radius * (1.0 - self.sigma * self.sigma).sqrt()
    }

    /// Radius of the slice at height `eps`, when it exists.
    pub fn slice_radius(&self, eps: f64) -> Option<f64> {
        let dz = eps - self.center_height();
        let s = self.radius * self.radius - dz * dz;
        (s >= 0.0).then(|| s.sqrt())
    }

    /// `|X - c| - R` for a point `X = (x, z)` of the upper half-space.
    pub fn signed_distance(&self, x: Point, z: f64) -> f64 {
        let dx = x[0] - self.center_horizontal[0];
        let dy = x[1] - self.center_horizontal[1];
        let dz = z - self.center_height();
        (dx * dx + dy * dy + dz * dz).sqrt() - self.radius
    }
}

/// Height of the lower half of the sphere over `x`. For `Lower` this is the
/// cap `√(R² - |x - a′|²) - σR` over the footprint disk; for `Upper` it is
/// `σR - √(R² - |x - b′|²)` over the annulus between footprint and equator.
pub fn cap_height(s: &EquidistantSphere, x: Point) -> Result<f64> {
    let d = (x[0] - s.center_horizontal[0]).hypot(x[1] - s.center_horizontal[1]);
    let foot = s.footprint_radius();
    match s.orientation {
        Orientation::Lower if d < foot => Ok((s.radius * s.radius - d * d).sqrt() - s.sigma * s.radius),
        Orientation::Upper if d > foot && d <= s.radius => Ok(s.sigma * s.radius - (s.radius * s.radius - d * d).sqrt()),
        _ => Err(Error::OutsideFootprint { distance: d, footprint: foot }),
    }
}

/// Radii of the equidistant spheres whose slices at height `eps` have radii
/// `r1` (lower sphere) and `r2` (upper sphere):
/// `R₁² = r₁² + (R₁σ + ε)²` and `R₂² = r₂² + (R₂σ - ε)²`.
/// `r2 = ∞` gives `R₂ = ∞`.
pub fn sphere_radii(sigma: f64, eps: f64, r1: f64, r2: f64) -> (f64, f64) {
    let c = 1.0 - sigma * sigma;
    let s1 = (c * r1 * r1 + eps * eps).sqrt();
    let big1 = (eps * sigma + s1) / c;
    let big2 = if r2.is_infinite() {
        f64::INFINITY
    } else {
        let s2 = (c * r2 * r2 + eps * eps).sqrt();
        (r2 * r2 + eps * eps) / (s2 + eps * sigma)
    };
    (big1, big2)
}

/// `(1/R₁, 1/R₂)` in the rationalized form, finite also for `r2 = ∞`.
pub fn reciprocal_radii(sigma: f64, eps: f64, r1: f64, r2: f64) -> (f64, f64) {
    let c = 1.0 - sigma * sigma;
    let inv1 = ((c * r1 * r1 + eps * eps).sqrt() - eps * sigma) / (r1 * r1 + eps * eps);
    let inv2 = if r2.is_infinite() {
        0.0
    } else {
        ((c * r2 * r2 + eps * eps).sqrt() + eps * sigma) / (r2 * r2 + eps * eps)
    };
    (inv1, inv2)
}

/// Bounds on `ν^{n+1} - σ` along `∂Σ` from interior and exterior spheres
/// of radii `r1` and `r2`.
pub fn angle_bounds(sigma: f64, eps: f64, r1: f64, r2: f64) -> (f64, f64) {
    let c = (1.0 - sigma * sigma).sqrt();
    let lower = if r2.is_infinite() {
        0.0
    } else {
        -eps * c / r2 - eps * eps * (1.0 + sigma) / (r2 * r2)
    };
    let upper = eps * c / r1 + eps * eps * (1.0 - sigma) / (r1 * r1);
    (lower, upper)
}

/// Worst slack of each barrier check; negative means violated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    /// `min u - ε`.
    pub height_floor: f64,
    /// Graph inside the circumscribed lower sphere: `min (R - |X - a|)`.
    pub circumscribed: f64,
    /// Graph outside inscribed lower spheres tangent at boundary samples.
    pub inscribed: f64,
    /// Graph outside exterior upper spheres tangent at boundary samples.
    pub exterior: f64,
    pub passes_height_floor: bool,
    pub passes_circumscribed: bool,
}

pub const HEIGHT_TOL: f64 = 1e-10;
pub const INCLUSION_TOL: f64 = 1e-9;

/// Samples the graph at grid nodes and measures it against the barriers.
/// Checks (i) and (ii) are pass/fail; the tangent-sphere checks are only
/// reported, since discretization error moves the discrete graph across
/// spheres that touch the exact one.
pub fn barrier_audit(solution: &ScalarField, dom: &GridDomain, sigma: f64, eps: f64) -> Result<AuditReport> {
    if !solution.converged {
        return Err(Error::NotConverged);
    }
    let pts: Vec<(Point, f64)> = (0..dom.unknowns()).map(|k| (dom.point(k), solution.values[k])).collect();
    let height_floor = pts.iter().map(|(_, u)| u - eps).fold(f64::INFINITY, f64::min);

    let (c, r) = dom.shape.circumscribed();
    let outer = EquidistantSphere::through_slice(c, r, sigma, eps)?;
    let circumscribed = pts.iter().map(|(x, u)| -outer.signed_distance(*x, *u)).fold(f64::INFINITY, f64::min);

    // Exterior balls of convex domains are unbounded; use one domain diameter.
    let r1 = dom.shape.interior_radius();
    let r2 = dom.shape.exterior_radius().min(2.0 * r);
    let (_, big2) = sphere_radii(sigma, eps, r1, r2);
    let mut inscribed = f64::INFINITY;
    let mut exterior = f64::INFINITY;
    for (p, n) in dom.shape.boundary_samples(64) {
        let inner = EquidistantSphere::through_slice([p[0] - r1 * n[0], p[1] - r1 * n[1]], r1, sigma, eps)?;
        let ext = EquidistantSphere::new([p[0] + r2 * n[0], p[1] + r2 * n[1]], big2, sigma, Orientation::Upper)?;
        for (x, u) in &pts {
            inscribed = inscribed.min(inner.signed_distance(*x, *u));
            exterior = exterior.min(ext.signed_distance(*x, *u));
        }
    }
    Ok(AuditReport {
        height_floor,
        circumscribed,
        inscribed,
        exterior,
        passes_height_floor: height_floor >= -HEIGHT_TOL,
        passes_circumscribed: circumscribed >= -INCLUSION_TOL,
    })
}
