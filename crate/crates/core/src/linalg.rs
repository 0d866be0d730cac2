//! Banded symmetric positive definite solver (Cholesky, lower band storage).

use crate::error::{GluerError, Result};

#[derive(Debug, Clone)]
pub struct BandedSpd {
    n: usize,
    bw: usize,
    /// `data[i * (bw + 1) + d]` holds `A[i][i - d]`.
    data: Vec<f64>,
    factored: bool,
}

impl BandedSpd {
    pub fn zeros(n: usize, bw: usize) -> Self {
        BandedSpd { n, bw, data: vec![0.0; n * (bw + 1)], factored: false }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Adds `v` to `A[i][j]` (and by symmetry `A[j][i]`); needs `|i - j| <= bw`.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        let d = r - c;
        assert!(d <= self.bw, "entry outside the band");
        self.data[r * (self.bw + 1) + d] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        let d = r - c;
        if d > self.bw {
            0.0
        } else {
            self.data[r * (self.bw + 1) + d]
        }
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            for d in 0..=self.bw.min(i) {
                let a = self.data[i * (self.bw + 1) + d];
                let j = i - d;
                y[i] += a * x[j];
                if d > 0 {
                    y[j] += a * x[i];
                }
            }
        }
        y
    }

    /// In-place `A = L L^T`.
    pub fn factor(&mut self) -> Result<()> {
        let w = self.bw + 1;
        for i in 0..self.n {
            let j0 = i.saturating_sub(self.bw);
            for j in j0..=i {
                let mut s = self.data[i * w + (i - j)];
                let k0 = j0.max(j.saturating_sub(self.bw));
                for k in k0..j {
                    s -= self.data[i * w + (i - k)] * self.data[j * w + (j - k)];
                }
                if j == i {
                    if !(s > 0.0) {
                        return Err(GluerError::Solver(format!("matrix not positive definite at row {i} (pivot {s:e})")));
                    }
                    self.data[i * w] = s.sqrt();
                } else {
                    self.data[i * w + (i - j)] = s / self.data[j * w];
                }
            }
        }
        self.factored = true;
        Ok(())
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if !self.factored {
            return Err(GluerError::Solver("solve called before factor".into()));
        }
        if b.len() != self.n {
            return Err(GluerError::Solver(format!("rhs length {} != {}", b.len(), self.n)));
        }
        let w = self.bw + 1;
        let mut y = b.to_vec();
        for i in 0..self.n {
            let mut s = y[i];
            for k in i.saturating_sub(self.bw)..i {
                s -= self.data[i * w + (i - k)] * y[k];
            }
            y[i] = s / self.data[i * w];
        }
        for i in (0..self.n).rev() {
            let mut s = y[i];
            for k in i + 1..(i + w).min(self.n) {
                s -= self.data[k * w + (k - i)] * y[k];
            }
            y[i] = s / self.data[i * w];
        }
        Ok(y)
    }
}
