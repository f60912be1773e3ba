//! Pointwise geometry of a graph `x_{n+1} = u(x)` in the half-space model.
//!
//! With `w = sqrt(1 + |Du|²)` and the square root `γ` of the Euclidean metric
//! `δ_ij + u_i u_j`, the Euclidean shape matrix is `A^e = γ^{-1} D²u γ^{-1} / w`
//! and the hyperbolic one is `A = (I + u A^e w) / w`, so the hyperbolic
//! principal curvatures are `κ_i = u κ^e_i + 1/w`.

use nalgebra::{DMatrix, DVector};

use crate::eigen::{self, symmetrize};
use crate::error::{Error, Result};

/// `γ^{ij} = δ_ij - u_i u_j / (w (1 + w))`.
pub fn gamma_upper(du: &DVector<f64>) -> DMatrix<f64> {
    let n = du.len();
    let w = (1.0 + du.norm_squared()).sqrt();
    DMatrix::identity(n, n) - du * du.transpose() / (w * (1.0 + w))
}

/// `γ_ij = δ_ij + u_i u_j / (1 + w)`, the inverse of [`gamma_upper`] and the
/// square root of the Euclidean metric.
pub fn gamma_lower(du: &DVector<f64>) -> DMatrix<f64> {
    let n = du.len();
    let w = (1.0 + du.norm_squared()).sqrt();
    DMatrix::identity(n, n) + du * du.transpose() / (1.0 + w)
}

/// Euclidean shape matrix `a^e_ij = γ^{ik} u_kl γ^{lj} / w` (upward normal).
pub fn euclidean_shape(du: &DVector<f64>, d2u: &DMatrix<f64>) -> DMatrix<f64> {
    let w = (1.0 + du.norm_squared()).sqrt();
    let g = gamma_upper(du);
    symmetrize(&(&g * d2u * &g / w))
}

/// Sorted eigenvalues of a symmetric matrix.
pub fn principal_curvatures(a: &DMatrix<f64>) -> Vec<f64> {
    eigen::eigenvalues(a)
}

/// Everything known about the graph at one point.
#[derive(Debug, Clone)]
pub struct GraphPointState {
    pub u: f64,
    pub du: DVector<f64>,
    pub d2u: DMatrix<f64>,
    pub w: f64,
    pub gamma_upper: DMatrix<f64>,
    pub a_e: DMatrix<f64>,
    pub a: DMatrix<f64>,
    /// Hyperbolic principal curvatures, ascending.
    pub kappa: Vec<f64>,
}

pub fn hyperbolic_shape(u: f64, du: &DVector<f64>, d2u: &DMatrix<f64>) -> Result<GraphPointState> {
    if !(u > 0.0) {
        return Err(Error::NonpositiveHeight(u));
    }
    let n = du.len();
    if d2u.nrows() != n || d2u.ncols() != n {
        return Err(Error::InvalidInput(format!(
            "Hessian is {}x{}, gradient has length {n}",
            d2u.nrows(),
            d2u.ncols()
        )));
    }
    let d2u = symmetrize(d2u);
    let w = (1.0 + du.norm_squared()).sqrt();
    let g = gamma_upper(du);
    let inner = symmetrize(&(&g * &d2u * &g));
    let a_e = &inner / w;
    let a = symmetrize(&((DMatrix::identity(n, n) + &inner * u) / w));
    let kappa = principal_curvatures(&a);
    Ok(GraphPointState {
        u,
        du: du.clone(),
        d2u,
        w,
        gamma_upper: g,
        a_e,
        a,
        kappa,
    })
}

impl GraphPointState {
    pub fn n(&self) -> usize {
        self.du.len()
    }

    /// Euclidean principal curvatures (eigenvalues of `A^e`), ascending.
    pub fn kappa_e(&self) -> Vec<f64> {
        principal_curvatures(&self.a_e)
    }

    /// Vertical component `ν^{n+1} = 1/w` of the upward unit normal.
    pub fn nu_vertical(&self) -> f64 {
        1.0 / self.w
    }

    /// Hyperbolic metric `g_ij = (δ_ij + u_i u_j)/u²`.
    pub fn first_fundamental_form(&self) -> DMatrix<f64> {
        let n = self.n();
        (DMatrix::identity(n, n) + &self.du * self.du.transpose()) / (self.u * self.u)
    }

    /// Hyperbolic second fundamental form `h_ij = (δ_ij + u_i u_j + u u_ij)/(u² w)`.
    pub fn second_fundamental_form(&self) -> DMatrix<f64> {
        let n = self.n();
        (DMatrix::identity(n, n) + &self.du * self.du.transpose() + &self.d2u * self.u)
            / (self.u * self.u * self.w)
    }
}

/// `|A|`, `A⁺ = (|A| + A)/2` and `A⁻ = (|A| - A)/2`.
#[derive(Debug, Clone)]
pub struct PlusMinusSplit {
    pub abs: DMatrix<f64>,
    pub plus: DMatrix<f64>,
    pub minus: DMatrix<f64>,
}

pub fn split_pm(a: &DMatrix<f64>) -> PlusMinusSplit {
    let eig = eigen::jacobi(a);
    PlusMinusSplit {
        abs: eig.map(f64::abs),
        plus: eig.map(|x| x.max(0.0)),
        minus: eig.map(|x| (-x).max(0.0)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    fn random_sym(rng: &mut SplitMix64, n: usize, s: f64) -> DMatrix<f64> {
        symmetrize(&DMatrix::from_fn(n, n, |_, _| rng.uniform(-s, s)))
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma_upper(&v(&[0.0, 0.0])), DMatrix::identity(2, 2));
        assert_eq!(gamma_lower(&v(&[0.0, 0.0])), DMatrix::identity(2, 2));
        let g = gamma_upper(&v(&[1.0, 0.0]));
        let s2 = 2f64.sqrt();
        assert!((g[(0, 0)] - (1.0 - 1.0 / (s2 * (1.0 + s2)))).abs() < 1e-15);
        assert!((g[(0, 0)] - 0.70711).abs() < 1e-5);
        assert_eq!(g[(0, 1)], 0.0);
        assert_eq!(g[(1, 1)], 1.0);

        let du = v(&[3.0, 4.0]);
        let gl = gamma_lower(&du);
        let metric = DMatrix::identity(2, 2) + &du * du.transpose();
        assert!((&gl * &gl - metric).amax() < 1e-12);
        assert!((gl.determinant() - 26f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn gamma_inverse_and_determinant_random() {
        let mut rng = SplitMix64::new(11);
        for _ in 0..500 {
            let n = 2 + rng.below(4);
            let mut du = DVector::from_fn(n, |_, _| rng.uniform(-1.0, 1.0));
            let scale = rng.uniform(0.0, 10.0) / du.norm();
            du *= scale;
            let w = (1.0 + du.norm_squared()).sqrt();
            let prod = gamma_upper(&du) * gamma_lower(&du);
            assert!((prod - DMatrix::identity(n, n)).amax() < 1e-12);
            assert!((gamma_lower(&du).determinant() - w).abs() < 1e-12 * w);
        }
    }

    #[test]
    fn euclidean_shape_examples() {
        let du = v(&[0.0, 0.0]);
        let d2 = DMatrix::from_row_slice(2, 2, &[1.5, -0.3, -0.3, 0.2]);
        assert_eq!(euclidean_shape(&du, &DMatrix::zeros(2, 2)), DMatrix::zeros(2, 2));
        assert!((euclidean_shape(&du, &d2) - &d2).amax() < 1e-15);

        // Upper hemisphere of radius 1 at x = (0.3, 0).
        let (x, y) = (0.3, 0.0);
        let s = (1.0f64 - x * x - y * y).sqrt();
        let du = v(&[-x / s, -y / s]);
        let s3 = s * s * s;
        let d2 = DMatrix::from_row_slice(
            2,
            2,
            &[-(1.0 - y * y) / s3, -x * y / s3, -x * y / s3, -(1.0 - x * x) / s3],
        );
        for k in principal_curvatures(&euclidean_shape(&du, &d2)) {
            assert!((k + 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn horosphere_and_cap() {
        let st = hyperbolic_shape(0.7, &v(&[0.0, 0.0]), &DMatrix::zeros(2, 2)).unwrap();
        assert!((st.a.clone() - DMatrix::identity(2, 2)).amax() < 1e-15);
        assert_eq!(st.kappa, vec![1.0, 1.0]);
        assert!(matches!(
            hyperbolic_shape(0.0, &v(&[0.0, 0.0]), &DMatrix::zeros(2, 2)),
            Err(Error::NonpositiveHeight(_))
        ));

        // Equidistant cap sqrt(R² - |x|²) - σR, σ = 0.5, R = 1, at (0.2, 0.1).
        let (sigma, r): (f64, f64) = (0.5, 1.0);
        let (x, y) = (0.2, 0.1);
        let s = (r * r - x * x - y * y).sqrt();
        let u = s - sigma * r;
        let du = v(&[-x / s, -y / s]);
        let s3 = s * s * s;
        let d2 = DMatrix::from_row_slice(
            2,
            2,
            &[-(r * r - y * y) / s3, -x * y / s3, -x * y / s3, -(r * r - x * x) / s3],
        );
        let st = hyperbolic_shape(u, &du, &d2).unwrap();
        for k in &st.kappa {
            assert!((k - 0.5).abs() < 1e-10);
        }
    }

    #[test]
    fn random_state_identities() {
        let mut rng = SplitMix64::new(3);
        for _ in 0..500 {
            let n = 2 + rng.below(3);
            let u = rng.uniform(0.05, 3.0);
            let du = DVector::from_fn(n, |_, _| rng.uniform(-2.0, 2.0));
            let d2 = random_sym(&mut rng, n, 2.0);
            let st = hyperbolic_shape(u, &du, &d2).unwrap();
            assert!((&st.a - st.a.transpose()).amax() < 1e-14);
            let expect = DMatrix::identity(n, n) / st.w + &st.a_e * u;
            assert!((&st.a - expect).amax() < 1e-12);
            for (k, ke) in st.kappa.iter().zip(st.kappa_e()) {
                assert!((k - (u * ke + 1.0 / st.w)).abs() < 1e-11);
            }
            assert!((&st.a * &st.a_e - &st.a_e * &st.a).amax() < 1e-12);

            let g = st.first_fundamental_form();
            let h = st.second_fundamental_form();
            let metric = DMatrix::identity(n, n) + &du * du.transpose();
            assert!((&g - &metric / (u * u)).amax() < 1e-12 * g.amax());
            let expect_h = (metric + &st.d2u * u) / (u * u * st.w);
            assert!((&h - expect_h).amax() < 1e-12 * h.amax().max(1.0));
            // Curvatures are the roots of det(h - κ g).
            for k in &st.kappa {
                let det = (&h - &g * *k).determinant();
                assert!(det.abs() < 1e-8 * g.amax().powi(n as i32) * (1.0 + k.abs()).powi(n as i32));
            }
        }
    }

    #[test]
    fn split_examples() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let s = split_pm(&a);
        assert!((&s.plus - &a).amax() < 1e-14);
        assert!(s.minus.amax() < 1e-14);

        let d = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, -3.0]);
        let s = split_pm(&d);
        assert!((s.abs - DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 3.0])).amax() < 1e-15);
        assert!((s.plus - DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.0])).amax() < 1e-15);
        assert!((s.minus - DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 3.0])).amax() < 1e-15);
    }

    #[test]
    fn split_random() {
        let mut rng = SplitMix64::new(5);
        for _ in 0..300 {
            let n = 2 + rng.below(5);
            let a = random_sym(&mut rng, n, 3.0);
            let s = split_pm(&a);
            assert!((&s.plus * &s.minus).amax() < 1e-12);
            assert!((&a - &s.plus + &s.minus).amax() < 1e-12);
            assert!(eigen::eigenvalues(&s.plus)[0] > -1e-12);
            assert!(eigen::eigenvalues(&s.minus)[0] > -1e-12);
            assert!((&s.abs * &s.abs - &a * &a).amax() < 1e-11);
        }
    }
}
