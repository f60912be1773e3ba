//! Planar domains, their signed distance functions, and the Cartesian grid
//! laid over them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Signed distance sampled on a regular grid, bilinearly interpolated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledSdf {
    pub origin: Point,
    pub spacing: f64,
    pub nx: usize,
    pub ny: usize,
    /// Row-major, `values[j * nx + i]` at `origin + spacing * (i, j)`.
    pub values: Vec<f64>,
}

impl SampledSdf {
    pub fn new(origin: Point, spacing: f64, nx: usize, ny: usize, values: Vec<f64>) -> Result<Self> {
        if nx < 2 || ny < 2 || values.len() != nx * ny || spacing <= 0.0 {
            return Err(Error::InvalidInput("sampled sdf has inconsistent dimensions".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("sampled sdf contains non-finite values".into()));
        }
        Ok(Self { origin, spacing, nx, ny, values })
    }

    /// Samples any function on the given grid.
    pub fn from_fn(origin: Point, spacing: f64, nx: usize, ny: usize, f: impl Fn(Point) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                values.push(f([origin[0] + spacing * i as f64, origin[1] + spacing * j as f64]));
            }
        }
        Self::new(origin, spacing, nx, ny, values)
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    pub fn eval(&self, p: Point) -> f64 {
        let fx = (p[0] - self.origin[0]) / self.spacing;
        let fy = (p[1] - self.origin[1]) / self.spacing;
        let i = (fx.floor().max(0.0) as usize).min(self.nx - 2);
        let j = (fy.floor().max(0.0) as usize).min(self.ny - 2);
        let (tx, ty) = (fx - i as f64, fy - j as f64);
        let v = (1.0 - tx) * (1.0 - ty) * self.at(i, j)
            + tx * (1.0 - ty) * self.at(i + 1, j)
            + (1.0 - tx) * ty * self.at(i, j + 1)
            + tx * ty * self.at(i + 1, j + 1);
        // Outside the sampled window, extend by Euclidean distance to it.
        let cx = p[0].clamp(self.origin[0], self.origin[0] + self.spacing * (self.nx - 1) as f64);
        let cy = p[1].clamp(self.origin[1], self.origin[1] + self.spacing * (self.ny - 1) as f64);
        v + (p[0] - cx).hypot(p[1] - cy)
    }

    /// Linear zero crossings along the sample-grid edges.
    fn zero_crossings(&self) -> Vec<Point> {
        let mut out = Vec::new();
        let pt = |i: usize, j: usize| [self.origin[0] + self.spacing * i as f64, self.origin[1] + self.spacing * j as f64];
        for j in 0..self.ny {
            for i in 0..self.nx {
                let a = self.at(i, j);
                for (di, dj) in [(1, 0), (0, 1)] {
                    let (ii, jj) = (i + di, j + dj);
                    if ii >= self.nx || jj >= self.ny {
                        continue;
                    }
                    let b = self.at(ii, jj);
                    if (a < 0.0) != (b < 0.0) {
                        let t = a / (a - b);
                        let (p, q) = (pt(i, j), pt(ii, jj));
                        out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
                    }
                }
            }
        }
        out
    }
}

/// Built-in and sampled domain shapes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Shape {
    Disk { center: Point, radius: f64 },
    /// Axis-aligned ellipse with semi-axes `a` (x) and `b` (y).
    Ellipse { center: Point, a: f64, b: f64 },
    /// Points within `radius` of the segment from `center - (half_length, 0)`
    /// to `center + (half_length, 0)`.
    Stadium { center: Point, half_length: f64, radius: f64 },
    Sampled(SampledSdf),
}

impl Shape {
    pub fn disk(radius: f64) -> Self {
        Shape::Disk { center: [0.0, 0.0], radius }
    }

    pub fn ellipse(a: f64, b: f64) -> Self {
        Shape::Ellipse { center: [0.0, 0.0], a, b }
    }

    pub fn stadium(half_length: f64, radius: f64) -> Self {
        Shape::Stadium { center: [0.0, 0.0], half_length, radius }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            Shape::Disk { radius, .. } => *radius > 0.0,
            Shape::Ellipse { a, b, .. } => *a > 0.0 && *b > 0.0,
            Shape::Stadium { half_length, radius, .. } => *half_length >= 0.0 && *radius > 0.0,
            Shape::Sampled(s) => s.values.iter().any(|v| *v < 0.0),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("degenerate domain shape {self:?}")))
        }
    }

    /// Signed distance, negative inside.
    pub fn sdf(&self, p: Point) -> f64 {
        match self {
            Shape::Disk { center, radius } => (p[0] - center[0]).hypot(p[1] - center[1]) - radius,
            Shape::Ellipse { center, a, b } => {
                let (x, y) = (p[0] - center[0], p[1] - center[1]);
                let d = ellipse_distance(*a, *b, x, y);
                if (x / a).powi(2) + (y / b).powi(2) < 1.0 {
                    -d
                } else {
                    d
                }
            }
            Shape::Stadium { center, half_length, radius } => {
                let x = (p[0] - center[0]).abs();
                let y = p[1] - center[1];
                let dx = (x - half_length).max(0.0);
                dx.hypot(y) - radius
            }
            Shape::Sampled(s) => s.eval(p),
        }
    }

    /// Unit outward normal `∇φ/|∇φ|` by central differences.
    pub fn normal(&self, p: Point) -> Point {
        let d = 1e-6 * self.length_scale();
        let gx = self.sdf([p[0] + d, p[1]]) - self.sdf([p[0] - d, p[1]]);
        let gy = self.sdf([p[0], p[1] + d]) - self.sdf([p[0], p[1] - d]);
        let g = gx.hypot(gy);
        if g == 0.0 {
            [1.0, 0.0]
        } else {
            [gx / g, gy / g]
        }
    }

    /// Curvature of the level set through `p`, positive for convex boundaries.
    pub fn level_set_curvature(&self, p: Point) -> f64 {
        let d = match self {
            // Bilinear interpolation is flat inside a cell, so difference across cells.
            Shape::Sampled(s) => 2.0 * s.spacing,
            _ => 1e-4 * self.length_scale(),
        };
        let f = |dx: f64, dy: f64| self.sdf([p[0] + dx, p[1] + dy]);
        let f0 = f(0.0, 0.0);
        let fx = (f(d, 0.0) - f(-d, 0.0)) / (2.0 * d);
        let fy = (f(0.0, d) - f(0.0, -d)) / (2.0 * d);
        let fxx = (f(d, 0.0) - 2.0 * f0 + f(-d, 0.0)) / (d * d);
        let fyy = (f(0.0, d) - 2.0 * f0 + f(0.0, -d)) / (d * d);
        let fxy = (f(d, d) - f(d, -d) - f(-d, d) + f(-d, -d)) / (4.0 * d * d);
        let g2 = fx * fx + fy * fy;
        (fxx * fy * fy - 2.0 * fx * fy * fxy + fyy * fx * fx) / g2.powf(1.5)
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bbox(&self) -> (Point, Point) {
        match self {
            Shape::Disk { center, radius } => (
                [center[0] - radius, center[1] - radius],
                [center[0] + radius, center[1] + radius],
            ),
            Shape::Ellipse { center, a, b } => ([center[0] - a, center[1] - b], [center[0] + a, center[1] + b]),
            Shape::Stadium { center, half_length, radius } => (
                [center[0] - half_length - radius, center[1] - radius],
                [center[0] + half_length + radius, center[1] + radius],
            ),
            Shape::Sampled(s) => {
                let pts = s.zero_crossings();
                let mut lo = [f64::INFINITY; 2];
                let mut hi = [f64::NEG_INFINITY; 2];
                for p in pts {
                    for k in 0..2 {
                        lo[k] = lo[k].min(p[k]);
                        hi[k] = hi[k].max(p[k]);
                    }
                }
                (lo, hi)
            }
        }
    }

    fn length_scale(&self) -> f64 {
        let (lo, hi) = self.bbox();
        (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-12)
    }

    /// A ball containing the domain: `(center, radius)`.
    pub fn circumscribed(&self) -> (Point, f64) {
        match self {
            Shape::Disk { center, radius } => (*center, *radius),
            Shape::Ellipse { center, a, b } => (*center, a.max(*b)),
            Shape::Stadium { center, half_length, radius } => (*center, half_length + radius),
            Shape::Sampled(s) => {
                let pts = s.zero_crossings();
                let m = pts.len().max(1) as f64;
                let c = [
                    pts.iter().map(|p| p[0]).sum::<f64>() / m,
                    pts.iter().map(|p| p[1]).sum::<f64>() / m,
                ];
                let r = pts.iter().map(|p| (p[0] - c[0]).hypot(p[1] - c[1])).fold(0.0, f64::max);
                (c, r)
            }
        }
    }

    /// Largest radius `r₁` of balls inside the domain touching every boundary point.
    pub fn interior_radius(&self) -> f64 {
        match self {
            Shape::Disk { radius, .. } => *radius,
            Shape::Ellipse { a, b, .. } => {
                let (big, small) = (a.max(*b), a.min(*b));
                small * small / big
            }
            Shape::Stadium { radius, .. } => *radius,
            Shape::Sampled(_) => {
                let kmax = self
                    .boundary_samples(512)
                    .iter()
                    .map(|(p, _)| self.level_set_curvature(*p))
                    .fold(0.0, f64::max);
                let (_, r) = self.circumscribed();
                if kmax > 0.0 {
                    (1.0 / kmax).min(r)
                } else {
                    r
                }
            }
        }
    }

    /// Largest radius `r₂` of exterior balls touching every boundary point;
    /// infinite for convex domains.
    pub fn exterior_radius(&self) -> f64 {
        match self {
            Shape::Sampled(_) => {
                let kmin = self
                    .boundary_samples(512)
                    .iter()
                    .map(|(p, _)| self.level_set_curvature(*p))
                    .fold(0.0, f64::min);
                if kmin < 0.0 {
                    1.0 / -kmin
                } else {
                    f64::INFINITY
                }
            }
            _ => f64::INFINITY,
        }
    }

    /// Points on `∂Ω` with outward unit normals.
    pub fn boundary_samples(&self, count: usize) -> Vec<(Point, Point)> {
        let count = count.max(4);
        let angle = |k: usize| std::f64::consts::TAU * k as f64 / count as f64;
        match self {
            Shape::Disk { center, radius } => (0..count)
                .map(|k| {
                    let (s, c) = angle(k).sin_cos();
                    ([center[0] + radius * c, center[1] + radius * s], [c, s])
                })
                .collect(),
            Shape::Ellipse { center, a, b } => (0..count)
                .map(|k| {
                    let (s, c) = angle(k).sin_cos();
                    let (nx, ny) = (c / a, s / b);
                    let l = nx.hypot(ny);
                    ([center[0] + a * c, center[1] + b * s], [nx / l, ny / l])
                })
                .collect(),
            Shape::Stadium { center, half_length, radius } => {
                let perimeter = 4.0 * half_length + std::f64::consts::TAU * radius;
                (0..count)
                    .map(|k| {
                        let mut s = perimeter * k as f64 / count as f64;
                        let flat = 2.0 * half_length;
                        let arc = std::f64::consts::PI * radius;
                        let (p, n) = if s < flat {
                            ([half_length - s, *radius], [0.0, 1.0])
                        } else if {
                            s -= flat;
                            s < arc
                        } {
                            let t = std::f64::consts::FRAC_PI_2 + s / radius;
                            let (sn, cs) = t.sin_cos();
                            ([-half_length + radius * cs, radius * sn], [cs, sn])
                        } else if {
                            s -= arc;
                            s < flat
                        } {
                            ([-half_length + s, -radius], [0.0, -1.0])
                        } else {
                            s -= flat;
                            let t = -std::f64::consts::FRAC_PI_2 + s / radius;
                            let (sn, cs) = t.sin_cos();
                            ([half_length + radius * cs, radius * sn], [cs, sn])
                        };
                        ([center[0] + p[0], center[1] + p[1]], n)
                    })
                    .collect()
            }
            Shape::Sampled(s) => {
                let pts = s.zero_crossings();
                let stride = (pts.len() / count).max(1);
                pts.into_iter().step_by(stride).map(|p| (p, self.normal(p))).collect()
            }
        }
    }
}

/// Distance from `(x, y)` to the ellipse `(x/a)² + (y/b)² = 1`, by bisection
/// on the Lagrange multiplier of the closest point.
pub fn ellipse_distance(a: f64, b: f64, x: f64, y: f64) -> f64 {
    let (e0, e1, y0, y1) = if a >= b {
        (a, b, x.abs(), y.abs())
    } else {
        (b, a, y.abs(), x.abs())
    };
    if y1 > 0.0 {
        if y0 > 0.0 {
            let z0 = y0 / e0;
            let z1 = y1 / e1;
            let g = z0 * z0 + z1 * z1 - 1.0;
            if g == 0.0 {
                return 0.0;
            }
            let r0 = (e0 / e1).powi(2);
            let n0 = r0 * z0;
            let mut s0 = z1 - 1.0;
            let mut s1 = if g < 0.0 { 0.0 } else { n0.hypot(z1) - 1.0 };
            let mut s = 0.0;
            for _ in 0..256 {
                s = 0.5 * (s0 + s1);
                if s == s0 || s == s1 {
                    break;
                }
                let g = (n0 / (s + r0)).powi(2) + (z1 / (s + 1.0)).powi(2) - 1.0;
                if g > 0.0 {
                    s0 = s;
                } else if g < 0.0 {
                    s1 = s;
                } else {
                    break;
                }
            }
            let x0 = r0 * y0 / (s + r0);
            let x1 = y1 / (s + 1.0);
            (x0 - y0).hypot(x1 - y1)
        } else {
            (y1 - e1).abs()
        }
    } else {
        let numer = e0 * y0;
        let denom = e0 * e0 - e1 * e1;
        if numer < denom {
            let xde0 = numer / denom;
            let x0 = e0 * xde0;
            let x1 = e1 * (1.0 - xde0 * xde0).max(0.0).sqrt();
            (x0 - y0).hypot(x1)
        } else {
            (y0 - e0).abs()
        }
    }
}

/// Grid offsets of the eight stencil arms, grouped in opposite pairs along
/// the x-axis, y-axis, and the two diagonals.
pub const ARMS: [(i64, i64); 8] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1), (1, -1), (-1, 1)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeClass {
    Interior,
    BoundaryAdjacent,
    Exterior,
}

/// Minimum boundary curvature over sampled boundary points; negative values
/// mean the domain is not mean-convex there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanConvexityReport {
    pub min_curvature: f64,
    pub tolerance: f64,
    pub mean_convex: bool,
}

#[derive(Debug, Clone)]
pub struct GridDomain {
    pub shape: Shape,
    pub h: f64,
    pub origin: Point,
    pub nx: usize,
    pub ny: usize,
    /// Per grid node.
    pub class: Vec<NodeClass>,
    /// Grid node to unknown index.
    pub index: Vec<Option<usize>>,
    /// Unknown index to grid node.
    pub nodes: Vec<usize>,
    /// Per unknown and arm, the fraction `θ ∈ (0, 1]` of the arm inside `Ω`.
    /// An arm whose far end is not an unknown ends on `∂Ω` with value `ε`.
    pub theta: Vec<[f64; 8]>,
    pub mean_convexity: MeanConvexityReport,
}

/// Nodes closer than this fraction of `h` to `∂Ω` are treated as boundary points.
const SNAP: f64 = 1e-6;

impl GridDomain {
    pub fn new(shape: Shape, h: f64) -> Result<Self> {
        shape.validate()?;
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidInput(format!("grid spacing must be positive, got {h}")));
        }
        let (lo, hi) = shape.bbox();
        let i0 = (lo[0] / h).floor() as i64 - 2;
        let j0 = (lo[1] / h).floor() as i64 - 2;
        let i1 = (hi[0] / h).ceil() as i64 + 2;
        let j1 = (hi[1] / h).ceil() as i64 + 2;
        let nx = (i1 - i0 + 1) as usize;
        let ny = (j1 - j0 + 1) as usize;
        let origin = [i0 as f64 * h, j0 as f64 * h];
        let total = nx * ny;
        if total > 4_000_000 {
            return Err(Error::InvalidInput(format!("grid of {total} nodes is too large")));
        }

        let coord = |g: usize| [origin[0] + h * (g % nx) as f64, origin[1] + h * (g / nx) as f64];
        let phi: Vec<f64> = (0..total).map(|g| shape.sdf(coord(g))).collect();
        let mut index = vec![None; total];
        let mut nodes = Vec::new();
        for g in 0..total {
            if phi[g] < -SNAP * h {
                index[g] = Some(nodes.len());
                nodes.push(g);
            }
        }
        if nodes.is_empty() {
            return Err(Error::InvalidInput("grid has no interior nodes".into()));
        }

        let mut class = vec![NodeClass::Exterior; total];
        let mut theta = Vec::with_capacity(nodes.len());
        for &g in &nodes {
            let (i, j) = ((g % nx) as i64, (g / nx) as i64);
            let mut th = [1.0; 8];
            let mut cut = false;
            for (a, (di, dj)) in ARMS.iter().enumerate() {
                let (ii, jj) = (i + di, j + dj);
                let inside = ii >= 0 && jj >= 0 && (ii as usize) < nx && (jj as usize) < ny && {
                    let gg = jj as usize * nx + ii as usize;
                    index[gg].is_some()
                };
                if inside {
                    continue;
                }
                cut = true;
                let p = coord(g);
                let q = [p[0] + h * *di as f64, p[1] + h * *dj as f64];
                th[a] = arm_fraction(&shape, p, q);
            }
            class[g] = if cut { NodeClass::BoundaryAdjacent } else { NodeClass::Interior };
            theta.push(th);
        }

        let tol = 1e-6;
        let min_curvature = shape
            .boundary_samples(720)
            .iter()
            .map(|(p, _)| shape.level_set_curvature(*p))
            .fold(f64::INFINITY, f64::min);
        let mean_convexity = MeanConvexityReport { min_curvature, tolerance: tol, mean_convex: min_curvature >= -tol };

        Ok(Self { shape, h, origin, nx, ny, class, index, nodes, theta, mean_convexity })
    }

    pub fn unknowns(&self) -> usize {
        self.nodes.len()
    }

    /// Coordinates of grid node `g`.
    pub fn grid_point(&self, g: usize) -> Point {
        [self.origin[0] + self.h * (g % self.nx) as f64, self.origin[1] + self.h * (g / self.nx) as f64]
    }

    /// Coordinates of unknown `k`.
    pub fn point(&self, k: usize) -> Point {
        self.grid_point(self.nodes[k])
    }

    /// Unknown index of the neighbour of unknown `k` along arm `a`, if that
    /// neighbour is itself an unknown.
    pub fn neighbour(&self, k: usize, a: usize) -> Option<usize> {
        let g = self.nodes[k];
        let (i, j) = ((g % self.nx) as i64 + ARMS[a].0, (g / self.nx) as i64 + ARMS[a].1);
        if i < 0 || j < 0 || i as usize >= self.nx || j as usize >= self.ny {
            return None;
        }
        self.index[j as usize * self.nx + i as usize]
    }

    pub fn node_class(&self, k: usize) -> NodeClass {
        self.class[self.nodes[k]]
    }

    /// Half-bandwidth of the unknown numbering.
    pub fn bandwidth(&self) -> usize {
        let mut bw = 0;
        for k in 0..self.unknowns() {
            for a in 0..8 {
                if let Some(m) = self.neighbour(k, a) {
                    bw = bw.max(k.abs_diff(m));
                }
            }
        }
        bw
    }

    /// Unknown indices lying on the horizontal grid line through the domain
    /// center closest to `y`, ordered by `x`.
    pub fn row_through(&self, y: f64) -> Vec<usize> {
        let j = ((y - self.origin[1]) / self.h).round();
        if j < 0.0 || j as usize >= self.ny {
            return Vec::new();
        }
        let j = j as usize;
        (0..self.nx).filter_map(|i| self.index[j * self.nx + i]).collect()
    }
}

/// Fraction along the segment `p → q` (with `p` inside) where the sdf
/// changes sign; 1 when it does not.
fn arm_fraction(shape: &Shape, p: Point, q: Point) -> f64 {
    let at = |t: f64| shape.sdf([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
    if at(1.0) < 0.0 {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if at(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.5 * (lo + hi)).max(f64::MIN_POSITIVE)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ellipse_distance_matches_brute_force() {
        let (a, b) = (1.3, 0.8);
        let shape = Shape::ellipse(a, b);
        for &(x, y) in &[(0.0, 0.0), (0.3, 0.2), (1.5, 0.9), (-0.7, 0.5), (0.0, 1.2), (2.0, 0.0), (1.0, -0.1)] {
            let brute = (0..200_000)
                .map(|k| {
                    let t = std::f64::consts::TAU * k as f64 / 200_000.0;
                    (a * t.cos() - x).hypot(b * t.sin() - y)
                })
                .fold(f64::INFINITY, f64::min);
            assert!((shape.sdf([x, y]).abs() - brute).abs() < 1e-8, "({x},{y})");
        }
        assert!(shape.sdf([0.0, 0.0]) < 0.0 && shape.sdf([2.0, 0.0]) > 0.0);
    }

    #[test]
    fn stadium_and_disk_sdf() {
        let s = Shape::stadium(0.5, 0.4);
        assert!((s.sdf([0.0, 0.0]) + 0.4).abs() < 1e-15);
        assert!((s.sdf([1.0, 0.0]) - 0.1).abs() < 1e-15);
        let d = Shape::disk(1.0);
        assert!((d.sdf([0.6, 0.8])).abs() < 1e-15);
    }

    #[test]
    fn curvature_and_radii() {
        let d = Shape::disk(2.0);
        assert!((d.level_set_curvature([2.0, 0.0]) - 0.5).abs() < 1e-5);
        let e = Shape::ellipse(1.3, 0.8);
        assert!((e.interior_radius() - 0.8 * 0.8 / 1.3).abs() < 1e-15);
        // Curvature at the end of the major axis is a/b².
        assert!((e.level_set_curvature([1.3, 0.0]) - 1.3 / 0.64).abs() < 1e-3);
        assert_eq!(e.exterior_radius(), f64::INFINITY);
    }

    #[test]
    fn sampled_disk_behaves_like_disk() {
        let s = SampledSdf::from_fn([-1.5, -1.5], 0.01, 301, 301, |p| p[0].hypot(p[1]) - 1.0).unwrap();
        let shape = Shape::Sampled(s);
        assert!((shape.sdf([0.3, 0.4]) + 0.5).abs() < 1e-4);
        let (c, r) = shape.circumscribed();
        assert!(c[0].abs() < 1e-3 && c[1].abs() < 1e-3 && (r - 1.0).abs() < 1e-3);
        assert!((shape.interior_radius() - 1.0).abs() < 0.05);
        assert_eq!(shape.exterior_radius(), f64::INFINITY);
    }

    #[test]
    fn grid_classification() {
        let dom = GridDomain::new(Shape::disk(1.0), 1.0 / 16.0).unwrap();
        for k in 0..dom.unknowns() {
            let p = dom.point(k);
            assert!(p[0].hypot(p[1]) < 1.0);
            let cut = (0..8).any(|a| dom.neighbour(k, a).is_none());
            assert_eq!(cut, dom.node_class(k) == NodeClass::BoundaryAdjacent);
            for a in 0..8 {
                let t = dom.theta[k][a];
                assert!(t > 0.0 && t <= 1.0);
                if dom.neighbour(k, a).is_none() {
                    let len = if a < 4 { 1.0 } else { std::f64::consts::SQRT_2 };
                    let (di, dj) = ARMS[a];
                    let q = [p[0] + t * dom.h * di as f64, p[1] + t * dom.h * dj as f64];
                    assert!(q[0].hypot(q[1]) - 1.0 < 1e-12 * len);
                    assert!((q[0].hypot(q[1]) - 1.0).abs() < 1e-12);
                }
            }
        }
        assert!(dom.mean_convexity.mean_convex);
        // The full disk has about π/h² nodes.
        let expected = std::f64::consts::PI * 256.0;
        assert!((dom.unknowns() as f64 - expected).abs() < 0.05 * expected);
    }

    #[test]
    fn non_convex_sampled_domain_reports_negative_curvature() {
        // Two overlapping disks form a peanut with concave waist.
        let f = |p: Point| {
            let a = (p[0] - 0.6).hypot(p[1]) - 0.8;
            let b = (p[0] + 0.6).hypot(p[1]) - 0.8;
            a.min(b)
        };
        let s = SampledSdf::from_fn([-2.0, -1.5], 0.01, 401, 301, f).unwrap();
        let dom = GridDomain::new(Shape::Sampled(s), 0.05).unwrap();
        assert!(!dom.mean_convexity.mean_convex);
    }
}
