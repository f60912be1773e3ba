//! Normalized curvature functions `f(λ)` and their admissible cones.
//!
//! Every supported family is symmetric, concave, homogeneous of degree one
//! and normalized so that `f(1, ..., 1) = 1`:
//!
//! * `HkRoot(k)`: `H_k^{1/k}` where `H_k = σ_k / C(n, k)` is the normalized
//!   elementary symmetric polynomial; `k = 1` is the mean curvature.
//! * `Quotient(k, l)`: `(H_k / H_l)^{1/(k-l)}` for `k > l ≥ 1`.
//! * `Composite`: a weighted arithmetic mean of the two kinds above.
//!
//! The cone for all of them is the Gårding cone
//! `Γ_k = {λ : σ_j(λ) > 0, 1 ≤ j ≤ k}`.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Member {
    HkRoot(usize),
    Quotient(usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub enum FamilyKind {
    HkRoot(usize),
    Quotient(usize, usize),
    /// Weighted arithmetic mean; weights are normalized to sum to one.
    Composite(Vec<(f64, Member)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureFamily {
    kind: FamilyKind,
    n: usize,
}

/// Binomial coefficient as a float (exact for the small arguments used here).
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Elementary symmetric polynomials `σ_0, ..., σ_k` of `lam`, built up one
/// variable at a time.
pub fn elementary_symmetric(lam: &[f64], k: usize) -> Vec<f64> {
    let mut e = vec![0.0; k + 1];
    e[0] = 1.0;
    for &x in lam {
        for j in (1..=k).rev() {
            e[j] += x * e[j - 1];
        }
    }
    e
}

/// `σ_m(λ | i)`: elementary symmetric polynomial of `lam` with entry `i` removed.
fn elementary_without(lam: &[f64], skip: usize, m: usize) -> f64 {
    let mut e = vec![0.0; m + 1];
    e[0] = 1.0;
    for (idx, &x) in lam.iter().enumerate() {
        if idx == skip {
            continue;
        }
        for j in (1..=m).rev() {
            e[j] += x * e[j - 1];
        }
    }
    e[m]
}

impl Member {
    fn order(self) -> usize {
        match self {
            Member::HkRoot(k) | Member::Quotient(k, _) => k,
        }
    }

    fn validate(self, n: usize) -> Result<()> {
        match self {
            Member::HkRoot(k) if k >= 1 && k <= n => Ok(()),
            Member::Quotient(k, l) if l >= 1 && l < k && k <= n => Ok(()),
            other => Err(Error::InvalidInput(format!(
                "{other:?} is not defined in dimension {n}"
            ))),
        }
    }

    fn eval(self, lam: &[f64]) -> f64 {
        let n = lam.len();
        match self {
            Member::HkRoot(k) => {
                let hk = elementary_symmetric(lam, k)[k] / binomial(n, k);
                if k == 1 {
                    hk
                } else {
                    hk.powf(1.0 / k as f64)
                }
            }
            Member::Quotient(k, l) => {
                let e = elementary_symmetric(lam, k);
                let q = (e[k] / binomial(n, k)) / (e[l] / binomial(n, l));
                if k - l == 1 {
                    q
                } else {
                    q.powf(1.0 / (k - l) as f64)
                }
            }
        }
    }

    fn grad(self, lam: &[f64]) -> Vec<f64> {
        let n = lam.len();
        match self {
            Member::HkRoot(k) => {
                let ck = binomial(n, k);
                let hk = elementary_symmetric(lam, k)[k] / ck;
                let scale = if k == 1 {
                    1.0
                } else {
                    hk.powf(1.0 / k as f64 - 1.0) / k as f64
                };
                (0..n)
                    .map(|i| scale * elementary_without(lam, i, k - 1) / ck)
                    .collect()
            }
            Member::Quotient(k, l) => {
                let e = elementary_symmetric(lam, k);
                let f = self.eval(lam);
                let p = (k - l) as f64;
                (0..n)
                    .map(|i| {
                        let dk = elementary_without(lam, i, k - 1) / e[k];
                        let dl = elementary_without(lam, i, l - 1) / e[l];
                        f / p * (dk - dl)
                    })
                    .collect()
            }
        }
    }
}

impl fmt::Display for Member {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Member::HkRoot(k) => write!(f, "H{k}"),
            Member::Quotient(k, l) => write!(f, "H{k}/H{l}"),
        }
    }
}

impl CurvatureFamily {
    pub fn new(kind: FamilyKind, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput(format!("dimension must be at least 2, got {n}")));
        }
        let kind = match kind {
            FamilyKind::HkRoot(k) => {
                Member::HkRoot(k).validate(n)?;
                FamilyKind::HkRoot(k)
            }
            FamilyKind::Quotient(k, l) => {
                Member::Quotient(k, l).validate(n)?;
                FamilyKind::Quotient(k, l)
            }
            FamilyKind::Composite(members) => {
                if members.is_empty() {
                    return Err(Error::InvalidInput("composite family has no members".into()));
                }
                let total: f64 = members.iter().map(|(w, _)| *w).sum();
                if members.iter().any(|(w, _)| !(*w > 0.0) || !w.is_finite()) {
                    return Err(Error::InvalidInput("composite weights must be positive".into()));
                }
                for (_, m) in &members {
                    m.validate(n)?;
                }
                FamilyKind::Composite(members.into_iter().map(|(w, m)| (w / total, m)).collect())
            }
        };
        Ok(Self { kind, n })
    }

    pub fn mean(n: usize) -> Result<Self> {
        Self::new(FamilyKind::HkRoot(1), n)
    }

    pub fn hk_root(k: usize, n: usize) -> Result<Self> {
        Self::new(FamilyKind::HkRoot(k), n)
    }

    pub fn quotient(k: usize, l: usize, n: usize) -> Result<Self> {
        Self::new(FamilyKind::Quotient(k, l), n)
    }

    /// Parses the compact descriptor grammar: `mean`, `H2`, `H3/H1`,
    /// `avg(H1,H2/H1)` and weighted `avg(0.25*H1,0.75*H2)`.
    pub fn parse(input: &str, n: usize) -> Result<Self> {
        let s: String = input.chars().filter(|c| !c.is_whitespace()).collect();
        let fail = |reason: &str| Error::FamilyParse {
            input: input.to_string(),
            reason: reason.to_string(),
        };
        let kind = if let Some(body) = s.strip_prefix("avg(").and_then(|b| b.strip_suffix(')')) {
            let mut members = Vec::new();
            for part in body.split(',') {
                let (weight, term) = match part.split_once('*') {
                    Some((w, t)) => (w.parse::<f64>().map_err(|_| fail("bad weight"))?, t),
                    None => (1.0, part),
                };
                members.push((weight, parse_member(term).ok_or_else(|| fail("bad member"))?));
            }
            FamilyKind::Composite(members)
        } else {
            match parse_member(&s).ok_or_else(|| fail("unknown family"))? {
                Member::HkRoot(k) => FamilyKind::HkRoot(k),
                Member::Quotient(k, l) => FamilyKind::Quotient(k, l),
            }
        };
        Self::new(kind, n)
    }

    pub fn kind(&self) -> &FamilyKind {
        &self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The same family in another dimension.
    pub fn with_dimension(&self, n: usize) -> Result<Self> {
        Self::new(self.kind.clone(), n)
    }

    /// `k` such that the admissible cone is `Γ_k`.
    pub fn cone_order(&self) -> usize {
        match &self.kind {
            FamilyKind::HkRoot(k) | FamilyKind::Quotient(k, _) => *k,
            FamilyKind::Composite(m) => m.iter().map(|(_, m)| m.order()).max().unwrap_or(1),
        }
    }

    fn members(&self) -> Vec<(f64, Member)> {
        match &self.kind {
            FamilyKind::HkRoot(k) => vec![(1.0, Member::HkRoot(*k))],
            FamilyKind::Quotient(k, l) => vec![(1.0, Member::Quotient(*k, *l))],
            FamilyKind::Composite(m) => m.clone(),
        }
    }

    fn check_dim(&self, lam: &[f64]) -> Result<()> {
        if lam.len() != self.n {
            return Err(Error::InvalidInput(format!(
                "expected {} curvatures, got {}",
                self.n,
                lam.len()
            )));
        }
        Ok(())
    }

    /// Strict membership in `Γ_k`; boundary points are rejected.
    pub fn in_cone(&self, lam: &[f64]) -> bool {
        if lam.len() != self.n || lam.iter().any(|x| !x.is_finite()) {
            return false;
        }
        let k = self.cone_order();
        elementary_symmetric(lam, k)[1..].iter().all(|&s| s > 0.0)
    }

    /// Scale-aware distance from `∂Γ_k`: `min_j σ_j(λ) / (1 + |λ|^j)`.
    /// Positive exactly on the open cone.
    pub fn cone_margin(&self, lam: &[f64]) -> f64 {
        let k = self.cone_order();
        let norm = lam.iter().map(|x| x * x).sum::<f64>().sqrt();
        elementary_symmetric(lam, k)[1..]
            .iter()
            .enumerate()
            .map(|(j, s)| s / (1.0 + norm.powi(j as i32 + 1)))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn eval(&self, lam: &[f64]) -> Result<f64> {
        self.check_dim(lam)?;
        if !self.in_cone(lam) {
            return Err(Error::NotInCone);
        }
        Ok(self.members().iter().map(|(w, m)| w * m.eval(lam)).sum())
    }

    /// Analytic gradient `(f_1, ..., f_n)`.
    pub fn grad(&self, lam: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(lam)?;
        if !self.in_cone(lam) {
            return Err(Error::NotInCone);
        }
        let mut g = vec![0.0; self.n];
        for (w, m) in self.members() {
            for (gi, mi) in g.iter_mut().zip(m.grad(lam)) {
                *gi += w * mi;
            }
        }
        Ok(g)
    }

    /// Slack in the negative-entry inequality for concave normalized `f`:
    /// `Σ_{i≠r} f_i λ_i² ≥ (2f|λ_r| + f_r λ_r²)/(n-1)` whenever `λ_r < 0`.
    pub fn lemma110_gap(&self, lam: &[f64], r: usize) -> Result<NegativeEntryGap> {
        self.check_dim(lam)?;
        if r >= self.n {
            return Err(Error::PreconditionViolated(format!("index {r} out of range")));
        }
        if lam[r] >= 0.0 {
            return Err(Error::PreconditionViolated(format!(
                "entry {r} must be negative, got {}",
                lam[r]
            )));
        }
        let f = self.eval(lam)?;
        let g = self.grad(lam)?;
        let n = self.n as f64;
        let off: f64 = (0..self.n).filter(|&i| i != r).map(|i| g[i] * lam[i] * lam[i]).sum();
        let total = off + g[r] * lam[r] * lam[r];
        Ok(NegativeEntryGap {
            strong: off - (2.0 * f * lam[r].abs() + g[r] * lam[r] * lam[r]) / (n - 1.0),
            weak: off - total / n,
        })
    }

    /// `min f(λ_1, ..., λ_{n-1}, λ_n + R)` over the center of `B_δ(1)` and the
    /// `2n` axis points `1 ± δ e_i`.
    pub fn limit_condition(&self, delta: f64, big_r: f64) -> f64 {
        let n = self.n;
        let mut points = vec![vec![1.0; n]];
        for i in 0..n {
            for s in [-1.0, 1.0] {
                let mut p = vec![1.0; n];
                p[i] += s * delta;
                points.push(p);
            }
        }
        points
            .into_iter()
            .map(|mut p| {
                p[n - 1] += big_r;
                self.eval(&p).expect("shifted samples of B_δ(1) lie in the positive cone")
            })
            .fold(f64::INFINITY, f64::min)
    }
}

impl fmt::Display for CurvatureFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            FamilyKind::HkRoot(1) => write!(f, "mean"),
            FamilyKind::HkRoot(k) => write!(f, "H{k}"),
            FamilyKind::Quotient(k, l) => write!(f, "H{k}/H{l}"),
            FamilyKind::Composite(m) => {
                let parts: Vec<String> = m.iter().map(|(w, m)| format!("{w}*{m}")).collect();
                write!(f, "avg({})", parts.join(","))
            }
        }
    }
}

fn parse_member(s: &str) -> Option<Member> {
    let hk = |t: &str| -> Option<usize> {
        match t {
            "mean" => Some(1),
            _ => t.strip_prefix('H')?.parse().ok(),
        }
    };
    match s.split_once('/') {
        Some((a, b)) => Some(Member::Quotient(hk(a)?, hk(b)?)),
        None => Some(Member::HkRoot(hk(s)?)),
    }
}

/// Both forms of the negative-entry inequality; each must be nonnegative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NegativeEntryGap {
    pub strong: f64,
    pub weak: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fam(s: &str, n: usize) -> CurvatureFamily {
        CurvatureFamily::parse(s, n).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn evaluation_examples() {
        assert!(close(fam("H2", 3).eval(&[1.0, 1.0, 1.0]).unwrap(), 1.0, 1e-15));
        assert!(close(fam("mean", 3).eval(&[2.0, 0.0, 1.0]).unwrap(), 1.0, 1e-15));
        assert!(close(fam("H2", 3).eval(&[2.0, 2.0, 0.0]).unwrap(), (4.0f64 / 3.0).sqrt(), 1e-15));
        assert!(close(fam("H2/H1", 3).eval(&[1.0, 1.0, 1.0]).unwrap(), 1.0, 1e-15));
    }

    #[test]
    fn gradient_examples() {
        let g = fam("mean", 3).grad(&[5.0, -1.0, 0.3]).unwrap();
        assert!(g.iter().all(|&x| close(x, 1.0 / 3.0, 1e-15)));
        for (s, n) in [("H2", 3), ("H3", 4), ("H3/H1", 4), ("avg(H1,H2/H1)", 3)] {
            let g = fam(s, n).grad(&vec![1.0; n]).unwrap();
            assert!(g.iter().all(|&x| close(x, 1.0 / n as f64, 1e-14)), "{s}: {g:?}");
        }
        // f = sqrt(4/3), ∂H2 = (2/3, 2/3, 4/3), f_i = ∂H2_i / (2f).
        let lam = [2.0, 2.0, 0.0];
        let g = fam("H2", 3).grad(&lam).unwrap();
        let f = (4.0f64 / 3.0).sqrt();
        let expect = [2.0 / 3.0 / (2.0 * f), 2.0 / 3.0 / (2.0 * f), 4.0 / 3.0 / (2.0 * f)];
        for i in 0..3 {
            assert!(close(g[i], expect[i], 1e-14));
            let mut p = lam;
            let mut m = lam;
            p[i] += 1e-6;
            m[i] -= 1e-6;
            let fd = (fam("H2", 3).eval(&p).unwrap() - fam("H2", 3).eval(&m).unwrap()) / 2e-6;
            assert!(close(fd, g[i], 1e-8));
        }
        assert!(close(expect[0], 0.28868, 1e-5) && close(expect[2], 0.57735, 1e-5));
    }

    #[test]
    fn cone_examples() {
        for s in ["mean", "H2", "H3", "H3/H2", "avg(H1,H2/H1)"] {
            assert!(fam(s, 3).in_cone(&[1.0, 1.0, 1.0]));
            assert!(!fam(s, 3).in_cone(&[-1.0, -1.0, -1.0]));
        }
        // σ1 = 3, σ2 = 0: boundary point, rejected.
        assert!(!fam("H2", 3).in_cone(&[2.0, 2.0, -1.0]));
        assert!(fam("mean", 3).in_cone(&[2.0, 2.0, -1.0]));
        assert!(matches!(fam("H2", 3).eval(&[2.0, 2.0, -1.0]), Err(Error::NotInCone)));
    }

    #[test]
    fn negative_entry_gap_example() {
        let gap = fam("mean", 3).lemma110_gap(&[3.0, 1.0, -0.5], 2).unwrap();
        // LHS 10/3, RHS (2·7/6·0.5 + 0.25/3)/2 = 0.625.
        assert!(close(gap.strong, 10.0 / 3.0 - 0.625, 1e-14));
        assert!(gap.weak >= 0.0);
        assert!(matches!(
            fam("mean", 3).lemma110_gap(&[3.0, 1.0, 0.5], 2),
            Err(Error::PreconditionViolated(_))
        ));
        let gap = fam("H2", 3).lemma110_gap(&[3.0, 1.0, -1e-9], 2).unwrap();
        let g = fam("H2", 3).grad(&[3.0, 1.0, -1e-9]).unwrap();
        assert!(close(gap.strong, g[0] * 9.0 + g[1], 1e-8));
    }

    #[test]
    fn limit_condition_examples() {
        let v = fam("H2", 3).limit_condition(0.0, 100.0);
        assert!(close(v, (203.0f64 / 3.0).sqrt(), 1e-12));
        assert!(close(v, 8.226, 1e-3));
        assert!(close(fam("H2/H1", 2).limit_condition(0.0, 1e6), 2.0, 1e-3));
        for s in ["mean", "H2", "H3/H1", "avg(H1,H3/H2)"] {
            assert!(close(fam(s, 3).limit_condition(0.0, 0.0), 1.0, 1e-14));
        }
        // Quotients saturate at (k/l)^{1/(k-l)}; roots diverge.
        assert!(close(fam("H3/H1", 3).limit_condition(0.0, 1e8), 3f64.sqrt(), 1e-3));
        assert!(fam("H2", 3).limit_condition(0.2, 1e4) > 50.0);
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(fam("mean", 2).kind(), &FamilyKind::HkRoot(1));
        assert_eq!(fam("H1", 2).kind(), &FamilyKind::HkRoot(1));
        assert_eq!(fam(" H3 / H1 ", 3).kind(), &FamilyKind::Quotient(3, 1));
        assert_eq!(fam("H2/H1", 3).to_string(), "H2/H1");
        let c = fam("avg(1*H1, 3*H2)", 3);
        assert_eq!(
            c.kind(),
            &FamilyKind::Composite(vec![(0.25, Member::HkRoot(1)), (0.75, Member::HkRoot(2))])
        );
        assert!(CurvatureFamily::parse("H4", 3).is_err());
        assert!(CurvatureFamily::parse("H1/H2", 3).is_err());
        assert!(CurvatureFamily::parse("K2", 3).is_err());
        assert!(CurvatureFamily::parse("avg()", 3).is_err());
    }

    fn cone_point(family: &CurvatureFamily) -> impl Strategy<Value = Vec<f64>> {
        let f = family.clone();
        proptest::collection::vec(-1.0f64..3.0, family.n())
            .prop_filter("admissible with margin", move |v| f.cone_margin(v) >= 1e-3)
    }

    proptest! {
        #[test]
        fn homogeneous_concave_monotone(
            (lam, mu) in (cone_point(&fam("H2", 3)), cone_point(&fam("H2", 3))),
            idx in 0usize..4,
        ) {
            let f = [fam("H2", 3), fam("H2/H1", 3), fam("avg(H1,H2)", 3), fam("mean", 3)][idx].clone();
            let v = f.eval(&lam).unwrap();
            for c in [0.5, 2.0, 10.0] {
                let scaled: Vec<f64> = lam.iter().map(|x| c * x).collect();
                prop_assert!((f.eval(&scaled).unwrap() - c * v).abs() <= 1e-12 * c * v.abs().max(1.0));
            }
            let mid: Vec<f64> = lam.iter().zip(&mu).map(|(a, b)| 0.5 * (a + b)).collect();
            prop_assert!(f.eval(&mid).unwrap() >= 0.5 * (v + f.eval(&mu).unwrap()) - 1e-12);
            let g = f.grad(&lam).unwrap();
            prop_assert!(g.iter().all(|&x| x > 0.0));
            prop_assert!(g.iter().sum::<f64>() >= 1.0 - 1e-12);
            prop_assert!(v <= lam.iter().sum::<f64>() / 3.0 + 1e-12);
        }

        #[test]
        fn gradient_matches_central_differences(lam in cone_point(&fam("H3", 3))) {
            for f in [fam("H3", 3), fam("H3/H1", 3), fam("H3/H2", 3)] {
                let g = f.grad(&lam).unwrap();
                for i in 0..3 {
                    let h = 1e-6 * lam[i].abs().max(1.0);
                    let mut p = lam.clone();
                    let mut m = lam.clone();
                    p[i] += h;
                    m[i] -= h;
                    let fd = (f.eval(&p).unwrap() - f.eval(&m).unwrap()) / (2.0 * h);
                    prop_assert!((fd - g[i]).abs() <= 1e-7 * g[i].abs().max(1e-3), "{f}: {fd} vs {}", g[i]);
                }
            }
        }
    }
}
