//! Symmetric banded matrices with Cholesky factorization.
//!
//! The structured meshes produce tangent systems with small bandwidth
//! (1 in 1D, about the grid width in 2D), so a dense band factorization is
//! exact, deterministic, and fast enough for every problem in this crate.

use crate::error::{Error, Result};

/// Lower-triangular band storage: entry `(i, j)` with `i - bw <= j <= i`
/// lives at `data[i * (bw + 1) + (j + bw - i)]`.
#[derive(Clone, Debug)]
pub struct BandMatrix {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, bw: usize) -> BandMatrix {
        BandMatrix {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.bw);
        i * (self.bw + 1) + (j + self.bw - i)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if i - j > self.bw {
            0.0
        } else {
            self.data[self.idx(i, j)]
        }
    }

    /// Accumulate into the symmetric entry `(i, j)`; only the lower
    /// triangle is stored.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    /// In-place Cholesky factorization `A = L L^T`. Fails when a pivot is
    /// not positive, i.e. the matrix is not positive definite.
    pub fn cholesky(mut self) -> Result<BandCholesky> {
        let bw = self.bw;
        for i in 0..self.n {
            let j_lo = i.saturating_sub(bw);
            for j in j_lo..=i {
                let k_lo = j.saturating_sub(bw).max(j_lo);
                let mut sum = self.data[self.idx(i, j)];
                for k in k_lo..j {
                    sum -= self.data[self.idx(i, k)] * self.data[self.idx(j, k)];
                }
                if j < i {
                    let d = self.data[self.idx(j, j)];
                    let k = self.idx(i, j);
                    self.data[k] = sum / d;
                } else {
                    if !(sum > 0.0) || !sum.is_finite() {
                        return Err(Error::Internal(format!(
                            "Cholesky pivot {sum} at row {i}: system not positive definite"
                        )));
                    }
                    let k = self.idx(i, i);
                    self.data[k] = sum.sqrt();
                }
            }
        }
        Ok(BandCholesky { mat: self })
    }
}

/// Cholesky factor in band storage.
pub struct BandCholesky {
    mat: BandMatrix,
}

impl BandCholesky {
    /// Solve `A x = rhs`.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.mat.n;
        let bw = self.mat.bw;
        let mut x = rhs.to_vec();
        // forward: L y = rhs
        for i in 0..n {
            let j_lo = i.saturating_sub(bw);
            let mut sum = x[i];
            for j in j_lo..i {
                sum -= self.mat.data[self.mat.idx(i, j)] * x[j];
            }
            x[i] = sum / self.mat.data[self.mat.idx(i, i)];
        }
        // backward: L^T x = y
        for i in (0..n).rev() {
            let mut sum = x[i];
            let j_hi = (i + bw).min(n - 1);
            for j in (i + 1)..=j_hi {
                sum -= self.mat.data[self.mat.idx(j, i)] * x[j];
            }
            x[i] = sum / self.mat.data[self.mat.idx(i, i)];
        }
        x
    }
}
