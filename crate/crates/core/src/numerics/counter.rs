//! Instrumented kernels that tally complex multiplications.
//!
//! Products are counted exactly: an `(a×b)·(b×c)` product adds `a·b·c`, and a
//! squared modulus `|z|²` adds one. The SVD inside a pseudo-inverse is
//! iterative, so each call is charged by shape as `c_svd·p·q² + q³` with
//! `p = max(rows, cols)` and `q = min(rows, cols)`. Real multiplications
//! (FPR's stored-matrix application) go to a separate tally.

use super::linalg;
use super::matrix::{row_norms_sq, CMatrix, RMatrix};
use crate::error::Result;

pub const DEFAULT_SVD_COST: f64 = 4.0;

#[derive(Clone, Debug, PartialEq)]
pub struct MulCounter {
    complex: u64,
    real: u64,
    svd_cost: f64,
}

impl Default for MulCounter {
    fn default() -> Self {
        Self::new(DEFAULT_SVD_COST)
    }
}

impl MulCounter {
    pub fn new(svd_cost: f64) -> Self {
        Self {
            complex: 0,
            real: 0,
            svd_cost,
        }
    }

    pub fn complex(&self) -> u64 {
        self.complex
    }

    pub fn real(&self) -> u64 {
        self.real
    }

    pub fn svd_cost(&self) -> f64 {
        self.svd_cost
    }

    pub fn add_complex(&mut self, n: u64) {
        self.complex += n;
    }

    pub fn add_real(&mut self, n: u64) {
        self.real += n;
    }

    /// Charge for the pseudo-inverse of a `rows × cols` matrix.
    pub fn pinv_charge(svd_cost: f64, rows: usize, cols: usize) -> u64 {
        let p = rows.max(cols) as f64;
        let q = rows.min(cols) as f64;
        (svd_cost * p * q * q + q * q * q).round() as u64
    }

    pub fn matmul(&mut self, a: &CMatrix, b: &CMatrix) -> CMatrix {
        self.complex += (a.rows() * a.cols() * b.cols()) as u64;
        a.matmul(b)
    }

    pub fn pinv(&mut self, a: &CMatrix) -> Result<CMatrix> {
        let out = linalg::pinv(a)?;
        self.complex += Self::pinv_charge(self.svd_cost, a.rows(), a.cols());
        Ok(out)
    }

    pub fn row_norms_sq(&mut self, a: &CMatrix) -> Vec<f64> {
        self.complex += (a.rows() * a.cols()) as u64;
        row_norms_sq(a)
    }

    /// `v · g` with `v` a real row vector; counted as real multiplications.
    pub fn real_left_mul(&mut self, v: &[f64], g: &RMatrix) -> Vec<f64> {
        self.real += (g.rows() * g.cols()) as u64;
        g.left_mul_vec(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_and_pinv_charges() {
        let mut ctr = MulCounter::new(4.0);
        let a = CMatrix::identity(3);
        let b = CMatrix::zeros(3, 5);
        ctr.matmul(&a, &b);
        assert_eq!(ctr.complex(), 45);
        ctr.pinv(&CMatrix::identity(2).hcat(&CMatrix::identity(2))).unwrap();
        // 2x4: p = 4, q = 2 -> 4·4·4 + 8
        assert_eq!(ctr.complex(), 45 + 72);
    }

    #[test]
    fn norms_and_real_tally() {
        let mut ctr = MulCounter::default();
        ctr.row_norms_sq(&CMatrix::zeros(4, 6));
        assert_eq!(ctr.complex(), 24);
        ctr.real_left_mul(&[1.0, 2.0], &RMatrix::identity(2));
        assert_eq!(ctr.real(), 4);
    }
}
