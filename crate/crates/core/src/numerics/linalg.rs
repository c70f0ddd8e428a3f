//! SVD and Moore-Penrose pseudo-inverse.
//!
//! The decomposition is delegated to faer's thin SVD; the rank cutoff and
//! the assembly `V · Σ⁺ · Uᴴ` are done here so that the truncation rule is
//! explicit and shared by the complex and real paths.

use faer::Mat;

use super::matrix::{CMatrix, RMatrix};
use crate::error::{Error, Result};

/// Thin SVD `a = U · diag(σ) · Vᴴ` with `U` of size `rows × r`, `Vᴴ` of size
/// `r × cols` and `r = min(rows, cols)`.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: CMatrix,
    pub singular_values: Vec<f64>,
    pub v_adjoint: CMatrix,
}

/// Default relative cutoff: `1e-12 · max(rows, cols)`.
pub fn default_rel_tol(rows: usize, cols: usize) -> f64 {
    1e-12 * rows.max(cols) as f64
}

fn check_nonempty(rows: usize, cols: usize, what: &str) -> Result<()> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidArgument(format!(
            "{what} of a {rows}x{cols} matrix is undefined"
        )));
    }
    Ok(())
}

fn check_tol(rel_tol: f64) -> Result<()> {
    if !(0.0..1.0).contains(&rel_tol) {
        return Err(Error::InvalidArgument(format!(
            "pseudo-inverse relative tolerance {rel_tol} outside [0, 1)"
        )));
    }
    Ok(())
}

pub fn svd(a: &CMatrix) -> Result<Svd> {
    let (rows, cols) = a.shape();
    check_nonempty(rows, cols, "SVD")?;
    let m = Mat::from_fn(rows, cols, |i, j| a[(i, j)]);
    let dec = m
        .thin_svd()
        .map_err(|e| Error::Numerical(format!("SVD of {rows}x{cols} matrix failed: {e:?}")))?;
    let (u, v) = (dec.U(), dec.V());
    let r = rows.min(cols);
    Ok(Svd {
        u: CMatrix::from_fn(rows, r, |i, k| u[(i, k)]),
        singular_values: (0..r).map(|k| dec.S()[k].re).collect(),
        v_adjoint: CMatrix::from_fn(r, cols, |k, j| v[(j, k)].conj()),
    })
}

/// Numerical rank under the default cutoff.
pub fn rank(a: &CMatrix) -> Result<usize> {
    let s = svd(a)?;
    let smax = s.singular_values.iter().copied().fold(0.0, f64::max);
    let cut = default_rel_tol(a.rows(), a.cols()) * smax;
    Ok(s.singular_values.iter().filter(|&&x| x > cut).count())
}

/// Pseudo-inverse with the default cutoff.
pub fn pinv(a: &CMatrix) -> Result<CMatrix> {
    pinv_tol(a, default_rel_tol(a.rows(), a.cols()))
}

/// Pseudo-inverse keeping singular values `σ_k > rel_tol · σ_max`.
pub fn pinv_tol(a: &CMatrix, rel_tol: f64) -> Result<CMatrix> {
    check_tol(rel_tol)?;
    let s = svd(a)?;
    let smax = s.singular_values.iter().copied().fold(0.0, f64::max);
    let cut = rel_tol * smax;
    let r = s.singular_values.len();

    // V · Σ⁺ as a cols×r matrix, then times Uᴴ (r×rows).
    let mut v_sigma = s.v_adjoint.adjoint();
    for k in 0..r {
        let sk = s.singular_values[k];
        let inv = if sk > cut && sk > 0.0 { 1.0 / sk } else { 0.0 };
        for i in 0..v_sigma.rows() {
            v_sigma[(i, k)] *= inv;
        }
    }
    let out = v_sigma.matmul(&s.u.adjoint());
    if !out.is_finite() {
        return Err(Error::Numerical(format!(
            "pseudo-inverse of {}x{} matrix is not finite",
            a.rows(),
            a.cols()
        )));
    }
    Ok(out)
}

/// Real pseudo-inverse with the default cutoff.
pub fn pinv_real(a: &RMatrix) -> Result<RMatrix> {
    let (rows, cols) = a.shape();
    check_nonempty(rows, cols, "pseudo-inverse")?;
    let m = Mat::from_fn(rows, cols, |i, j| a[(i, j)]);
    let dec = m
        .thin_svd()
        .map_err(|e| Error::Numerical(format!("SVD of {rows}x{cols} matrix failed: {e:?}")))?;
    let (u, v) = (dec.U(), dec.V());
    let r = rows.min(cols);
    let sv: Vec<f64> = (0..r).map(|k| dec.S()[k]).collect();
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let cut = default_rel_tol(rows, cols) * smax;
    let v_sigma = RMatrix::from_fn(cols, r, |i, k| {
        let sk = sv[k];
        if sk > cut && sk > 0.0 {
            v[(i, k)] / sk
        } else {
            0.0
        }
    });
    let u_t = RMatrix::from_fn(r, rows, |k, j| u[(j, k)]);
    Ok(v_sigma.matmul(&u_t))
}
