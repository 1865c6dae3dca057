//! Symmetric positive definite pentadiagonal systems.

/// Lower half of a symmetric matrix with two off-diagonals:
/// `d0[i] = M[i][i]`, `d1[i] = M[i][i-1]`, `d2[i] = M[i][i-2]`.
#[derive(Debug, Clone)]
pub(crate) struct Penta {
    pub d0: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
}

impl Penta {
    pub fn zeros(n: usize) -> Self {
        Self {
            d0: vec![0.0; n],
            d1: vec![0.0; n],
            d2: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.d0.len()
    }

    /// In-place `L D L^T` factorization; `None` if a pivot is not positive.
    pub fn factor(&self) -> Option<PentaFactor> {
        let n = self.len();
        let mut l1 = vec![0.0; n];
        let mut l2 = vec![0.0; n];
        let mut d = vec![0.0; n];
        for i in 0..n {
            if i >= 2 {
                l2[i] = self.d2[i] / d[i - 2];
            }
            if i >= 1 {
                let mut a = self.d1[i];
                if i >= 2 {
                    a -= l2[i] * l1[i - 1] * d[i - 2];
                }
                l1[i] = a / d[i - 1];
            }
            let mut p = self.d0[i];
            if i >= 1 {
                p -= l1[i] * l1[i] * d[i - 1];
            }
            if i >= 2 {
                p -= l2[i] * l2[i] * d[i - 2];
            }
            if !(p > 0.0 && p.is_finite()) {
                return None;
            }
            d[i] = p;
        }
        Some(PentaFactor { l1, l2, d })
    }

    #[cfg(test)]
    fn mul(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut y = vec![0.0; n];
        for i in 0..n {
            y[i] += self.d0[i] * x[i];
            if i >= 1 {
                y[i] += self.d1[i] * x[i - 1];
                y[i - 1] += self.d1[i] * x[i];
            }
            if i >= 2 {
                y[i] += self.d2[i] * x[i - 2];
                y[i - 2] += self.d2[i] * x[i];
            }
        }
        y
    }
}

pub(crate) struct PentaFactor {
    l1: Vec<f64>,
    l2: Vec<f64>,
    d: Vec<f64>,
}

impl PentaFactor {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.d.len();
        let mut x = b.to_vec();
        for i in 0..n {
            if i >= 1 {
                x[i] -= self.l1[i] * x[i - 1];
            }
            if i >= 2 {
                x[i] -= self.l2[i] * x[i - 2];
            }
        }
        for i in 0..n {
            x[i] /= self.d[i];
        }
        for i in (0..n).rev() {
            if i + 1 < n {
                x[i] -= self.l1[i + 1] * x[i + 1];
            }
            if i + 2 < n {
                x[i] -= self.l2[i + 2] * x[i + 2];
            }
        }
        x
    }
}
