//! Banded LU factorization with partial pivoting and iterative refinement.
//!
//! The factorization follows the usual layout: row interchanges widen the
//! upper band from `ku` to `ku + kl`, and the multipliers of `L` stay in the
//! rows where they were produced, so the solve interleaves interchanges and
//! forward elimination.
//!
//! Refinement residuals are accumulated in double-double arithmetic. This
//! matters for graded solutions whose entries span many decades: a plain
//! solve is accurate only relative to the largest entry, refinement with
//! exact residuals brings every entry to its own relative accuracy.

use super::{dot_compensated, NumericsError};

const MAX_REFINEMENT_STEPS: usize = 12;

/// Square matrix with `kl` sub-diagonals and `ku` super-diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    // row-major, entry (i, j) at i * (kl + ku + 1) + (j + kl - i)
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        Self {
            n,
            kl,
            ku,
            data: vec![0.0; n * (kl + ku + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    pub fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && j + self.kl >= i && j <= i + self.ku
    }

    fn index(&self, i: usize, j: usize) -> usize {
        i * (self.kl + self.ku + 1) + (j + self.kl - i)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.data[self.index(i, j)]
        } else {
            0.0
        }
    }

    /// Sets entry `(i, j)`. Panics if it lies outside the band.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "({i}, {j}) outside band {}/{}", self.kl, self.ku);
        let k = self.index(i, j);
        self.data[k] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "({i}, {j}) outside band {}/{}", self.kl, self.ku);
        let k = self.index(i, j);
        self.data[k] += v;
    }

    /// Overwrites row `i` with zeros.
    pub fn clear_row(&mut self, i: usize) {
        let w = self.kl + self.ku + 1;
        self.data[i * w..(i + 1) * w].fill(0.0);
    }

    fn row_range(&self, i: usize) -> std::ops::Range<usize> {
        i.saturating_sub(self.kl)..(i + self.ku + 1).min(self.n)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| self.row_range(i).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    /// `b - A x` with each component accumulated in double-double.
    pub fn residual(&self, x: &[f64], b: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        assert_eq!(b.len(), self.n);
        (0..self.n)
            .map(|i| {
                let terms = self.row_range(i).map(|j| (-self.get(i, j), x[j]));
                dot_compensated(std::iter::once((b[i], 1.0)).chain(terms))
            })
            .collect()
    }

    pub fn factor(&self) -> Result<BandedLu, NumericsError> {
        BandedLu::new(self)
    }

    /// Solves `A x = b` and refines the solution until the correction is
    /// below two ulps in every component.
    pub fn solve_refined(&self, b: &[f64]) -> Result<Vec<f64>, NumericsError> {
        let lu = self.factor()?;
        let mut x = lu.solve(b);
        let mut prev = f64::INFINITY;
        for _ in 0..MAX_REFINEMENT_STEPS {
            let r = self.residual(&x, b);
            let d = lu.solve(&r);
            let mut worst = 0.0f64;
            for (xi, di) in x.iter_mut().zip(&d) {
                if *di != 0.0 {
                    let rel = if *xi != 0.0 { (di / *xi).abs() } else { f64::INFINITY };
                    worst = worst.max(rel);
                }
                *xi += di;
            }
            if worst <= 2.0 * f64::EPSILON || worst >= prev {
                break;
            }
            prev = worst;
        }
        Ok(x)
    }
}

/// LU factors of a [`BandedMatrix`].
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    // upper bandwidth of U after interchanges
    ku_fill: usize,
    // entry (i, j) at i * width + (j + kl - i), j in [i - kl, i + ku + kl]
    data: Vec<f64>,
    pivots: Vec<usize>,
}

impl BandedLu {
    fn new(a: &BandedMatrix) -> Result<Self, NumericsError> {
        let (n, kl, ku) = (a.n, a.kl, a.ku);
        let ku_fill = ku + kl;
        let width = kl + ku_fill + 1;
        let mut lu = Self {
            n,
            kl,
            ku_fill,
            data: vec![0.0; n * width],
            pivots: vec![0; n],
        };
        for i in 0..n {
            for j in a.row_range(i) {
                lu.set(i, j, a.get(i, j));
            }
        }
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = lu.get(k, k).abs();
            for i in k + 1..=last {
                let v = lu.get(i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(NumericsError::Singular { index: k });
            }
            lu.pivots[k] = p;
            let jmax = (k + ku_fill).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    let (ik, ip) = (lu.idx(k, j), lu.idx(p, j));
                    lu.data.swap(ik, ip);
                }
            }
            let pivot = lu.get(k, k);
            for i in k + 1..=last {
                let l = lu.get(i, k) / pivot;
                lu.set(i, k, l);
                if l != 0.0 {
                    for j in k + 1..=jmax {
                        let u = lu.get(k, j);
                        let idx = lu.idx(i, j);
                        lu.data[idx] -= l * u;
                    }
                }
            }
        }
        Ok(lu)
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        i * (2 * self.kl + self.ku_fill - self.kl + 1) + (j + self.kl - i)
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        self.data[self.idx(i, j)]
    }

    fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut x = b.to_vec();
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                x.swap(k, p);
            }
            let xk = x[k];
            if xk != 0.0 {
                for i in k + 1..=(k + self.kl).min(n - 1) {
                    x[i] -= self.get(i, k) * xk;
                }
            }
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..=(i + self.ku_fill).min(n - 1) {
                s -= self.get(i, j) * x[j];
            }
            x[i] = s / self.get(i, i);
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};

    fn dense(a: &BandedMatrix) -> DMatrix<f64> {
        DMatrix::from_fn(a.dim(), a.dim(), |i, j| a.get(i, j))
    }

    fn dense_solve(a: &BandedMatrix, b: &[f64]) -> Vec<f64> {
        dense(a)
            .lu()
            .solve(&DVector::from_column_slice(b))
            .expect("dense oracle singular")
            .iter()
            .copied()
            .collect()
    }

    #[test]
    fn tridiagonal_matches_dense() {
        let n = 9;
        let mut a = BandedMatrix::zeros(n, 1, 1);
        for i in 0..n {
            a.set(i, i, 4.0 + i as f64);
            if i > 0 {
                a.set(i, i - 1, -1.0);
            }
            if i + 1 < n {
                a.set(i, i + 1, 2.0);
            }
        }
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let x = a.factor().unwrap().solve(&b);
        let want = dense_solve(&a, &b);
        for (g, w) in x.iter().zip(&want) {
            assert!((g - w).abs() < 1e-14, "{g} vs {w}");
        }
    }

    #[test]
    fn zero_diagonal_needs_pivoting() {
        // [[0, 1], [1, 0]]
        let mut a = BandedMatrix::zeros(2, 1, 1);
        a.set(0, 1, 1.0);
        a.set(1, 0, 1.0);
        let x = a.factor().unwrap().solve(&[3.0, 5.0]);
        assert_eq!(x, vec![5.0, 3.0]);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let mut a = BandedMatrix::zeros(3, 1, 1);
        a.set(0, 0, 1.0);
        a.set(1, 1, 1.0);
        assert!(matches!(a.factor(), Err(NumericsError::Singular { index: 2 })));
    }

    #[test]
    #[should_panic]
    fn setting_outside_band_panics() {
        BandedMatrix::zeros(4, 1, 0).set(0, 1, 1.0);
    }

    #[test]
    fn residual_is_exact_for_exact_solution() {
        let mut a = BandedMatrix::zeros(3, 1, 1);
        for i in 0..3 {
            a.set(i, i, 2.0);
        }
        a.set(0, 1, 1.0);
        let r = a.residual(&[1.0, 2.0, 3.0], &[4.0, 4.0, 6.0]);
        assert_eq!(r, vec![0.0, 0.0, 0.0]);
    }

    // lower bidiagonal chain x_{i+1} = x_i / 1000 with a near-cancelling
    // coupling to the first entry; the small entries are only recovered
    // to full relative accuracy with exact residuals
    #[test]
    fn refinement_recovers_graded_tail() {
        let n = 60;
        let mut a = BandedMatrix::zeros(n, 2, 2);
        for i in 0..n {
            a.set(i, i, 1.0);
            if i >= 1 {
                a.set(i, i - 1, -1e-3);
            }
            if i + 2 < n {
                a.set(i, i + 2, 1e-30);
            }
        }
        let b: Vec<f64> = (0..n).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect();
        let x = a.solve_refined(&b).unwrap();
        let r = a.residual(&x, &b);
        for i in 0..n {
            let scale: f64 = a.row_range(i).map(|j| (a.get(i, j) * x[j]).abs()).sum();
            assert!(r[i].abs() <= 4.0 * f64::EPSILON * scale, "row {i}: {} vs {scale}", r[i]);
        }
        assert!(x[n - 1] > 0.0 && x[n - 1] < 1e-170);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn random_banded_matches_dense(
                n in 1usize..30,
                kl in 0usize..5,
                ku in 0usize..5,
                seed in proptest::collection::vec(-1.0f64..1.0, 30 * 11),
                rhs in proptest::collection::vec(-1.0f64..1.0, 30),
            ) {
                let mut a = BandedMatrix::zeros(n, kl, ku);
                for i in 0..n {
                    for j in a.row_range(i) {
                        let v = seed[i * 11 + (j + kl - i)];
                        // diagonal dominance keeps the oracle well conditioned
                        let v = if i == j { v + 3.0 * (kl + ku + 1) as f64 } else { v };
                        a.set(i, j, v);
                    }
                }
                let b = &rhs[..n];
                let x = a.solve_refined(b).unwrap();
                let want = dense_solve(&a, b);
                for (g, w) in x.iter().zip(&want) {
                    prop_assert!((g - w).abs() <= 1e-12 * w.abs().max(1.0));
                }
            }
        }
    }
}
