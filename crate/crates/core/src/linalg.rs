//! Singular value decomposition backed by `faer`, with `nalgebra` at the edges.

use faer::Mat;
use nalgebra::{DMatrix, DVector};

/// Thin SVD `A = U diag(s) V^T` of a dense matrix.
pub(crate) struct Svd {
    u: DMatrix<f64>,
    v: DMatrix<f64>,
    pub singular_values: Vec<f64>,
}

impl Svd {
    pub fn new(a: &DMatrix<f64>) -> Option<Self> {
        let (r, c) = a.shape();
        if r == 0 || c == 0 {
            return Some(Svd {
                u: DMatrix::zeros(r, 0),
                v: DMatrix::zeros(c, 0),
                singular_values: Vec::new(),
            });
        }
        let m = Mat::from_fn(r, c, |i, j| a[(i, j)]);
        let svd = m.thin_svd().ok()?;
        let (u, s, v) = (svd.U(), svd.S().column_vector(), svd.V());
        let k = s.nrows();
        Some(Svd {
            u: DMatrix::from_fn(r, k, |i, j| u[(i, j)]),
            v: DMatrix::from_fn(c, k, |i, j| v[(i, j)]),
            singular_values: (0..k).map(|i| s[i]).collect(),
        })
    }

    pub fn max(&self) -> f64 {
        self.singular_values.iter().copied().fold(0.0, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.singular_values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Minimum-norm least-squares solution, dropping singular values at or
    /// below `cutoff`.
    pub fn solve(&self, b: &DVector<f64>, cutoff: f64) -> DVector<f64> {
        let mut w = self.u.tr_mul(b);
        for (wi, &s) in w.iter_mut().zip(&self.singular_values) {
            *wi = if s > cutoff { *wi / s } else { 0.0 };
        }
        &self.v * w
    }
}
