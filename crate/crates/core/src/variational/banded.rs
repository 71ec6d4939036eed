//! Symmetric pentadiagonal matrices and their Cholesky factors.

use crate::error::{Error, Result};

/// Symmetric matrix with bandwidth 2, stored by its upper diagonals.
/// Symmetry holds bitwise because only one triangle is stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SymBanded {
    /// A[i][i]
    pub d0: Vec<f64>,
    /// A[i][i+1]
    pub d1: Vec<f64>,
    /// A[i][i+2]
    pub d2: Vec<f64>,
}

impl SymBanded {
    pub fn zeros(n: usize) -> Self {
        Self {
            d0: vec![0.0; n],
            d1: vec![0.0; n.saturating_sub(1)],
            d2: vec![0.0; n.saturating_sub(2)],
        }
    }

    pub fn dim(&self) -> usize {
        self.d0.len()
    }

    /// Entry (i, j); zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        match b - a {
            0 => self.d0[a],
            1 => self.d1[a],
            2 => self.d2[a],
            _ => 0.0,
        }
    }

    /// Adds `x` to entry (i, j) with |i − j| ≤ 2 (and to (j, i)).
    pub fn add(&mut self, i: usize, j: usize, x: f64) {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        match b - a {
            0 => self.d0[a] += x,
            1 => self.d1[a] += x,
            2 => self.d2[a] += x,
            _ => panic!("entry ({i}, {j}) outside the band"),
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut s = self.d0[i] * x[i];
                if i + 1 < n {
                    s += self.d1[i] * x[i + 1];
                }
                if i + 2 < n {
                    s += self.d2[i] * x[i + 2];
                }
                if i >= 1 {
                    s += self.d1[i - 1] * x[i - 1];
                }
                if i >= 2 {
                    s += self.d2[i - 2] * x[i - 2];
                }
                s
            })
            .collect()
    }

    /// xᵀAx.
    pub fn quad(&self, x: &[f64]) -> f64 {
        self.matvec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Infinity norm (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        let n = self.dim();
        (0..n)
            .map(|i| {
                (i.saturating_sub(2)..(i + 3).min(n))
                    .map(|j| self.get(i, j).abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    pub fn cholesky(&self) -> Result<BandCholesky> {
        let n = self.dim();
        let mut l0 = vec![0.0; n];
        let mut l1 = vec![0.0; n];
        let mut l2 = vec![0.0; n];
        for i in 0..n {
            if i >= 2 {
                l2[i] = self.d2[i - 2] / l0[i - 2];
            }
            if i >= 1 {
                l1[i] = (self.d1[i - 1] - if i >= 2 { l2[i] * l1[i - 1] } else { 0.0 }) / l0[i - 1];
            }
            let piv = self.d0[i] - l1[i] * l1[i] - l2[i] * l2[i];
            if !(piv > 0.0) {
                return Err(Error::Assembly(format!(
                    "banded Cholesky breakdown at row {i} (pivot {piv:e})"
                )));
            }
            l0[i] = piv.sqrt();
        }
        Ok(BandCholesky { l0, l1, l2 })
    }
}

/// Lower factor L with A = LLᵀ: diagonal, first and second subdiagonal.
#[derive(Debug, Clone)]
pub struct BandCholesky {
    l0: Vec<f64>,
    l1: Vec<f64>,
    l2: Vec<f64>,
}

impl BandCholesky {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.l0.len();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut s = b[i];
            if i >= 1 {
                s -= self.l1[i] * y[i - 1];
            }
            if i >= 2 {
                s -= self.l2[i] * y[i - 2];
            }
            y[i] = s / self.l0[i];
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = y[i];
            if i + 1 < n {
                s -= self.l1[i + 1] * x[i + 1];
            }
            if i + 2 < n {
                s -= self.l2[i + 2] * x[i + 2];
            }
            x[i] = s / self.l0[i];
        }
        x
    }
}
