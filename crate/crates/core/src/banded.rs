//! Symmetric banded storage with an in-place Cholesky factorization.
//!
//! Only the lower band is stored: row `i` keeps columns `i-bw ..= i`.

#[derive(Debug, Clone)]
pub(crate) struct SymBanded {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl SymBanded {
    pub fn zeros(n: usize, bw: usize) -> Self {
        let bw = bw.min(n.saturating_sub(1));
        Self { n, bw, data: vec![0.0; n * (bw + 1)] }
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.bw);
        i * (self.bw + 1) + (self.bw + j - i)
    }

    /// Adds to entry `(i, j)` with `j <= i`.
    #[inline]
    pub fn add_lower(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    #[cfg(test)]
    pub fn get_lower(&self, i: usize, j: usize) -> f64 {
        self.data[self.slot(i, j)]
    }

    pub fn diag(&self, i: usize) -> f64 {
        self.data[self.slot(i, i)]
    }

    pub fn set_diag(&mut self, i: usize, v: f64) {
        let s = self.slot(i, i);
        self.data[s] = v;
    }

    pub fn max_diag(&self) -> f64 {
        (0..self.n).map(|i| self.diag(i).abs()).fold(0.0, f64::max)
    }

    pub fn add_to_diag(&mut self, shift: f64) {
        for i in 0..self.n {
            let s = self.slot(i, i);
            self.data[s] += shift;
        }
    }

    /// Factors `A = L Lᵀ` in place. Returns `false` when a pivot is not
    /// positive; the contents are then unspecified.
    pub fn cholesky(&mut self) -> bool {
        let (n, bw) = (self.n, self.bw);
        let w = bw + 1;
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                let mut sum = self.data[i * w + (bw + j - i)];
                let k0 = lo.max(j.saturating_sub(bw));
                let ri = i * w + bw - i;
                let rj = j * w + bw - j;
                for k in k0..j {
                    sum -= self.data[ri + k] * self.data[rj + k];
                }
                if i == j {
                    if !(sum > 0.0) || !sum.is_finite() {
                        return false;
                    }
                    self.data[i * w + bw] = sum.sqrt();
                } else {
                    self.data[i * w + (bw + j - i)] = sum / self.data[j * w + bw];
                }
            }
        }
        true
    }

    /// Solves `L Lᵀ x = b` after a successful [`cholesky`](Self::cholesky).
    pub fn solve_factored(&self, b: &mut [f64]) {
        let (n, bw) = (self.n, self.bw);
        let w = bw + 1;
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let mut s = b[i];
            for k in lo..i {
                s -= self.data[i * w + (bw + k - i)] * b[k];
            }
            b[i] = s / self.data[i * w + bw];
        }
        for i in (0..n).rev() {
            let hi = (i + bw).min(n - 1);
            let mut s = b[i];
            for k in i + 1..=hi {
                s -= self.data[k * w + (bw + i - k)] * b[k];
            }
            b[i] = s / self.data[i * w + bw];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_tridiagonal_system() {
        // 2 -1 on the diagonals, n = 5
        let n = 5;
        let mut m = SymBanded::zeros(n, 1);
        for i in 0..n {
            m.add_lower(i, i, 2.0);
            if i > 0 {
                m.add_lower(i, i - 1, -1.0);
            }
        }
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64 + 1.0).sin()).collect();
        let mut b: Vec<f64> = (0..n)
            .map(|i| {
                let mut s = 2.0 * x_true[i];
                if i > 0 {
                    s -= x_true[i - 1];
                }
                if i + 1 < n {
                    s -= x_true[i + 1];
                }
                s
            })
            .collect();
        assert!(m.cholesky());
        m.solve_factored(&mut b);
        for i in 0..n {
            assert!((b[i] - x_true[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn wide_band_matches_dense() {
        let n = 7;
        let bw = 3;
        let mut dense = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                if i.abs_diff(j) <= bw {
                    dense[i][j] = if i == j { 10.0 } else { 1.0 / (1.0 + (i + j) as f64) };
                }
            }
        }
        let mut m = SymBanded::zeros(n, bw);
        for i in 0..n {
            for j in 0..=i {
                if i - j <= bw {
                    m.add_lower(i, j, dense[i][j]);
                }
            }
        }
        let x: Vec<f64> = (0..n).map(|i| i as f64 - 2.5).collect();
        let mut b: Vec<f64> = (0..n).map(|i| (0..n).map(|j| dense[i][j] * x[j]).sum()).collect();
        assert!(m.cholesky());
        m.solve_factored(&mut b);
        for i in 0..n {
            assert!((b[i] - x[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn indefinite_is_reported() {
        let mut m = SymBanded::zeros(2, 1);
        m.add_lower(0, 0, 1.0);
        m.add_lower(1, 0, 2.0);
        m.add_lower(1, 1, 1.0);
        assert!(!m.cholesky());
    }
}
