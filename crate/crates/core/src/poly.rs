//! Bivariate polynomials with complex coefficients.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

type C64 = Complex64;

/// `sum_{i,j} coeffs[i][j] z1^i z2^j`. Rows index the degree in `z1`,
/// columns the degree in `z2`. Rows may have different lengths.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BiPoly {
    coeffs: Vec<Vec<C64>>,
}

impl BiPoly {
    pub fn new(coeffs: Vec<Vec<C64>>) -> Self {
        let mut p = Self { coeffs };
        p.trim();
        p
    }

    pub fn from_real(coeffs: &[&[f64]]) -> Self {
        Self::new(
            coeffs
                .iter()
                .map(|row| row.iter().map(|&c| C64::new(c, 0.0)).collect())
                .collect(),
        )
    }

    pub fn constant(c: C64) -> Self {
        Self::new(vec![vec![c]])
    }

    /// The monomial `c z1^i z2^j`.
    pub fn monomial(c: C64, i: usize, j: usize) -> Self {
        let mut coeffs = vec![Vec::new(); i + 1];
        coeffs[i] = vec![C64::new(0.0, 0.0); j + 1];
        coeffs[i][j] = c;
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[Vec<C64>] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize, j: usize) -> C64 {
        self.coeffs
            .get(i)
            .and_then(|row| row.get(j))
            .copied()
            .unwrap_or_default()
    }

    pub fn degrees(&self) -> (usize, usize) {
        let d1 = self.coeffs.len().saturating_sub(1);
        let d2 = self
            .coeffs
            .iter()
            .map(|r| r.len().saturating_sub(1))
            .max()
            .unwrap_or(0);
        (d1, d2)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().flatten().all(|c| *c == C64::new(0.0, 0.0))
    }

    /// Sum of coefficient moduli.
    pub fn l1_norm(&self) -> f64 {
        self.coeffs.iter().flatten().map(|c| c.norm()).sum()
    }

    fn trim(&mut self) {
        for row in &mut self.coeffs {
            while row.last().is_some_and(|c| *c == C64::new(0.0, 0.0)) {
                row.pop();
            }
        }
        while self.coeffs.last().is_some_and(|r| r.is_empty()) {
            self.coeffs.pop();
        }
    }

    /// Nested Horner evaluation.
    pub fn eval(&self, z1: C64, z2: C64) -> C64 {
        self.coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, row| {
            let inner = row
                .iter()
                .rev()
                .fold(C64::new(0.0, 0.0), |a, &c| a * z2 + c);
            acc * z1 + inner
        })
    }

    /// Coefficients of `u -> p(a1 + u1, a2 + u2)`.
    pub fn taylor_shift(&self, a1: C64, a2: C64) -> Self {
        let (d1, d2) = self.degrees();
        let binom = binomials(d1.max(d2));
        let pow1 = powers(a1, d1);
        let pow2 = powers(a2, d2);
        let mut out = vec![vec![C64::new(0.0, 0.0); d2 + 1]; d1 + 1];
        for (i, row) in self.coeffs.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                if c == C64::new(0.0, 0.0) {
                    continue;
                }
                for k in 0..=i {
                    let ck = c * binom[i][k] * pow1[i - k];
                    for l in 0..=j {
                        out[k][l] += ck * binom[j][l] * pow2[j - l];
                    }
                }
            }
        }
        Self::new(out)
    }

    /// Coefficients of `z -> p(c1 z1, c2 z2)`.
    pub fn scale_vars(&self, c1: C64, c2: C64) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(i, row)| {
                    row.iter()
                        .enumerate()
                        .map(|(j, &c)| c * c1.powu(i as u32) * c2.powu(j as u32))
                        .collect()
                })
                .collect(),
        )
    }

    pub fn scale(&self, c: C64) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .map(|row| row.iter().map(|&x| x * c).collect())
                .collect(),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        let rows = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(rows);
        for i in 0..rows {
            let a = self.coeffs.get(i).map(Vec::as_slice).unwrap_or(&[]);
            let b = other.coeffs.get(i).map(Vec::as_slice).unwrap_or(&[]);
            let cols = a.len().max(b.len());
            out.push(
                (0..cols)
                    .map(|j| {
                        a.get(j).copied().unwrap_or_default() + b.get(j).copied().unwrap_or_default()
                    })
                    .collect(),
            );
        }
        Self::new(out)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Self::default();
        }
        let (a1, a2) = self.degrees();
        let (b1, b2) = other.degrees();
        let mut out = vec![vec![C64::new(0.0, 0.0); a2 + b2 + 1]; a1 + b1 + 1];
        for (i, ra) in self.coeffs.iter().enumerate() {
            for (j, &x) in ra.iter().enumerate() {
                for (k, rb) in other.coeffs.iter().enumerate() {
                    for (l, &y) in rb.iter().enumerate() {
                        out[i + k][j + l] += x * y;
                    }
                }
            }
        }
        Self::new(out)
    }

    /// `conj` applied to every coefficient.
    pub fn conj_coeffs(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .map(|row| row.iter().map(|c| c.conj()).collect())
                .collect(),
        )
    }

    /// Reflection `z1^{n1} z2^{n2} conj(p(1/conj z1, 1/conj z2))` at bidegree `(n1, n2)`.
    pub fn reflect(&self, n1: usize, n2: usize) -> Self {
        let mut out = vec![vec![C64::new(0.0, 0.0); n2 + 1]; n1 + 1];
        for (i, row) in self.coeffs.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                assert!(i <= n1 && j <= n2, "reflection degree below polynomial degree");
                out[n1 - i][n2 - j] = c.conj();
            }
        }
        Self::new(out)
    }
}

fn binomials(n: usize) -> Vec<Vec<f64>> {
    let mut b = vec![vec![0.0; n + 1]; n + 1];
    for i in 0..=n {
        b[i][0] = 1.0;
        for k in 1..=i {
            b[i][k] = b[i - 1][k - 1] + if k < i { b[i - 1][k] } else { 0.0 };
        }
    }
    b
}

fn powers(a: C64, n: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut p = C64::new(1.0, 0.0);
    for _ in 0..=n {
        out.push(p);
        p *= a;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn sample() -> BiPoly {
        BiPoly::new(vec![
            vec![c(1.0, 0.5), c(-2.0, 0.0), c(0.0, 3.0)],
            vec![c(0.25, -1.0)],
            vec![c(0.0, 0.0), c(4.0, 1.0)],
        ])
    }

    #[test]
    fn eval_matches_naive_sum() {
        let p = sample();
        let (z1, z2) = (c(0.3, -0.7), c(-0.2, 0.4));
        let mut naive = c(0.0, 0.0);
        for (i, row) in p.coeffs().iter().enumerate() {
            for (j, &a) in row.iter().enumerate() {
                naive += a * z1.powu(i as u32) * z2.powu(j as u32);
            }
        }
        assert!((p.eval(z1, z2) - naive).norm() < 1e-14);
    }

    #[test]
    fn taylor_shift_reproduces_values() {
        let p = sample();
        let (a1, a2) = (c(0.6, 0.8), c(-1.0, 0.0));
        let q = p.taylor_shift(a1, a2);
        for (u1, u2) in [(c(0.0, 0.0), c(0.0, 0.0)), (c(0.1, 0.2), c(-0.3, 0.05))] {
            assert!((q.eval(u1, u2) - p.eval(a1 + u1, a2 + u2)).norm() < 1e-13);
        }
    }

    #[test]
    fn product_and_sum() {
        let p = sample();
        let q = BiPoly::from_real(&[&[1.0, 1.0], &[2.0]]);
        let (z1, z2) = (c(0.2, 0.1), c(0.5, -0.5));
        assert!((p.mul(&q).eval(z1, z2) - p.eval(z1, z2) * q.eval(z1, z2)).norm() < 1e-13);
        assert!((p.add(&q).eval(z1, z2) - (p.eval(z1, z2) + q.eval(z1, z2))).norm() < 1e-14);
        assert!(p.sub(&p).is_zero());
    }

    #[test]
    fn reflection_is_unimodular_ratio_on_torus() {
        let p = BiPoly::from_real(&[&[2.0, -0.5], &[0.3, 0.1]]);
        let r = p.reflect(1, 1);
        let (z1, z2) = (C64::from_polar(1.0, 0.4), C64::from_polar(1.0, -1.3));
        assert!(((r.eval(z1, z2) / p.eval(z1, z2)).norm() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn trims_trailing_zeros() {
        let p = BiPoly::new(vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![]]);
        assert_eq!(p.degrees(), (0, 0));
        assert_eq!(BiPoly::monomial(c(2.0, 0.0), 1, 2).coeff(1, 2), c(2.0, 0.0));
    }
}
