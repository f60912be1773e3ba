//! Banded LU factorization with partial pivoting (LAPACK `gbtrf` layout),
//! used for the radial two-point problem.

use crate::error::{Error, Result};

/// Square band matrix with `kl` sub- and `ku` super-diagonals, stored column
/// major with `kl` extra rows of room for pivoting fill.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    ab: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let ldab = 2 * kl + ku + 1;
        Self { n, kl, ku, ldab, ab: vec![0.0; ldab * n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn pos(&self, i: usize, j: usize) -> usize {
        self.kl + self.ku + i - j + j * self.ldab
    }

    fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && i + self.ku >= j && j + self.kl >= i
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.ab[self.pos(i, j)]
        } else {
            0.0
        }
    }

    /// Adds `v` to entry `(i, j)`; panics outside the band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "entry ({i}, {j}) outside band");
        let p = self.pos(i, j);
        self.ab[p] += v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for j in 0..self.n {
            let lo = j.saturating_sub(self.ku);
            let hi = (j + self.kl).min(self.n - 1);
            for i in lo..=hi {
                y[i] += self.ab[self.pos(i, j)] * x[j];
            }
        }
        y
    }

    /// Factorizes in place.
    pub fn factor(mut self) -> Result<BandLu> {
        let (n, kl, ku, ldab) = (self.n, self.kl, self.ku, self.ldab);
        let kv = kl + ku;
        let mut piv = vec![0usize; n];
        let mut ju = 0usize;
        let scale = self.ab.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let ab = &mut self.ab;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let col = j * ldab;
            let mut jp = 0;
            let mut best = ab[col + kv].abs();
            for r in 1..=km {
                let v = ab[col + kv + r].abs();
                if v > best {
                    best = v;
                    jp = r;
                }
            }
            piv[j] = j + jp;
            if best == 0.0 || best <= f64::EPSILON * 1e-6 * scale {
                return Err(Error::SingularJacobian { column: j });
            }
            ju = ju.max((j + ku + jp).min(n - 1));
            if jp != 0 {
                for c in j..=ju {
                    let base = c * (ldab - 1) + kv;
                    ab.swap(base + j + jp, base + j);
                }
            }
            let inv = 1.0 / ab[col + kv];
            for r in 1..=km {
                ab[col + kv + r] *= inv;
            }
            for c in (j + 1)..=ju {
                let base = c * (ldab - 1) + kv;
                let f = ab[base + j];
                if f != 0.0 {
                    for r in 1..=km {
                        ab[base + j + r] -= f * ab[col + kv + r];
                    }
                }
            }
        }
        Ok(BandLu { m: self, piv })
    }
}

#[derive(Debug, Clone)]
pub struct BandLu {
    m: BandMatrix,
    piv: Vec<usize>,
}

impl BandLu {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let BandMatrix { n, kl, ku, ldab, ref ab } = self.m;
        let kv = kl + ku;
        let mut x = b.to_vec();
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let p = self.piv[j];
            if p != j {
                x.swap(p, j);
            }
            let xj = x[j];
            let col = j * ldab + kv;
            for r in 1..=km {
                x[j + r] -= ab[col + r] * xj;
            }
        }
        for j in (0..n).rev() {
            let col = j * ldab + kv;
            x[j] /= ab[col];
            let xj = x[j];
            let lo = j.saturating_sub(kv);
            for i in lo..j {
                x[i] -= ab[col - (j - i)] * xj;
            }
        }
        x
    }
}
