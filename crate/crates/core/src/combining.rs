//! Spatial combining weights and QPSK demodulation.
//!
//! Direct weight estimation forms `W = P·Y⁺` from the received pilot block
//! alone. The conventional chain estimates `Ĥ = Y·P_det⁺` and inverts it,
//! `W = Ĥ⁺`. When the detected pilot matrix has full column rank (`ξ ≥ L`)
//! the two agree; with fewer detections and no noise they agree on the true
//! positives.

use crate::error::{Error, Result};
use crate::numerics::{CMatrix, Complex64, MulCounter};
use crate::qpsk;

/// One combining row per pilot index.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightMatrix {
    pub w: CMatrix,
    pub index_map: Vec<usize>,
}

impl WeightMatrix {
    pub fn new(w: CMatrix, index_map: Vec<usize>) -> Result<Self> {
        if w.rows() != index_map.len() {
            return Err(Error::InvalidArgument(format!(
                "{} weight rows for {} indices",
                w.rows(),
                index_map.len()
            )));
        }
        let mut sorted = index_map.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|p| p[0] == p[1]) {
            return Err(Error::InvalidArgument("duplicate index in weight map".into()));
        }
        Ok(Self { w, index_map })
    }

    pub fn len(&self) -> usize {
        self.index_map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index_map.is_empty()
    }

    /// Weight row for pilot `idx`, if present.
    pub fn row_for(&self, idx: usize) -> Option<&[Complex64]> {
        self.index_map.iter().position(|&i| i == idx).map(|r| self.w.row(r))
    }
}

/// `row · m` evaluated with a fixed accumulation order so the result does
/// not depend on which other rows are being computed.
fn row_times(row: &[Complex64], m: &CMatrix) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); m.cols()];
    for (k, &a) in row.iter().enumerate() {
        for (o, &b) in out.iter_mut().zip(m.row(k)) {
            *o += a * b;
        }
    }
    out
}

/// DWE rows from a precomputed `Y⁺` (L×M).
pub fn dwe_weights_from_pinv(
    y_pinv: &CMatrix,
    pool_rows: &CMatrix,
    indices: &[usize],
    ctr: &mut MulCounter,
) -> Result<WeightMatrix> {
    if pool_rows.cols() != y_pinv.rows() {
        return Err(Error::InvalidArgument(format!(
            "pilot length {} does not match Y⁺ with {} rows",
            pool_rows.cols(),
            y_pinv.rows()
        )));
    }
    if pool_rows.rows() != indices.len() {
        return Err(Error::InvalidArgument(format!(
            "{} pilot rows for {} indices",
            pool_rows.rows(),
            indices.len()
        )));
    }
    let mut w = CMatrix::zeros(indices.len(), y_pinv.cols());
    for r in 0..indices.len() {
        let row = row_times(pool_rows.row(r), y_pinv);
        w.row_mut(r).copy_from_slice(&row);
    }
    ctr.add_complex((indices.len() * y_pinv.rows() * y_pinv.cols()) as u64);
    WeightMatrix::new(w, indices.to_vec())
}

/// `W = pool_rows · Y⁺`, rows aligned with `indices`.
pub fn dwe_weights(y: &CMatrix, pool_rows: &CMatrix, indices: &[usize]) -> Result<WeightMatrix> {
    dwe_weights_counted(y, pool_rows, indices, &mut MulCounter::default())
}

pub fn dwe_weights_counted(
    y: &CMatrix,
    pool_rows: &CMatrix,
    indices: &[usize],
    ctr: &mut MulCounter,
) -> Result<WeightMatrix> {
    if pool_rows.cols() != y.cols() {
        return Err(Error::InvalidArgument(format!(
            "pilot length {} does not match Y with {} columns",
            pool_rows.cols(),
            y.cols()
        )));
    }
    let y_pinv = ctr.pinv(y)?;
    dwe_weights_from_pinv(&y_pinv, pool_rows, indices, ctr)
}

/// Least-squares channel estimate `Ĥ = Y · P_det⁺` (M×ξ).
pub fn ls_channel_estimate(y: &CMatrix, detected_pilots: &CMatrix) -> Result<CMatrix> {
    ls_channel_estimate_counted(y, detected_pilots, &mut MulCounter::default())
}

pub fn ls_channel_estimate_counted(y: &CMatrix, detected_pilots: &CMatrix, ctr: &mut MulCounter) -> Result<CMatrix> {
    if detected_pilots.rows() == 0 {
        return Err(Error::InvalidArgument("empty detected pilot set".into()));
    }
    if detected_pilots.cols() != y.cols() {
        return Err(Error::InvalidArgument(format!(
            "detected pilots have length {}, Y has {} columns",
            detected_pilots.cols(),
            y.cols()
        )));
    }
    let p_pinv = ctr.pinv(detected_pilots)?;
    Ok(ctr.matmul(y, &p_pinv))
}

/// Zero-forcing weights `W = Ĥ⁺` (ξ×M).
pub fn zf_weights(h_est: &CMatrix, indices: &[usize]) -> Result<WeightMatrix> {
    zf_weights_counted(h_est, indices, &mut MulCounter::default())
}

pub fn zf_weights_counted(h_est: &CMatrix, indices: &[usize], ctr: &mut MulCounter) -> Result<WeightMatrix> {
    if h_est.cols() != indices.len() {
        return Err(Error::InvalidArgument(format!(
            "{} channel columns for {} indices",
            h_est.cols(),
            indices.len()
        )));
    }
    let w = ctr.pinv(h_est)?;
    WeightMatrix::new(w, indices.to_vec())
}

/// LS estimation followed by ZF, for the pilots at `indices`.
pub fn lszf_weights_counted(
    y: &CMatrix,
    pool_rows: &CMatrix,
    indices: &[usize],
    ctr: &mut MulCounter,
) -> Result<WeightMatrix> {
    let h = ls_channel_estimate_counted(y, pool_rows, ctr)?;
    zf_weights_counted(&h, indices, ctr)
}

pub fn lszf_weights(y: &CMatrix, pool_rows: &CMatrix, indices: &[usize]) -> Result<WeightMatrix> {
    lszf_weights_counted(y, pool_rows, indices, &mut MulCounter::default())
}

/// Soft combined symbols `W · Y_D`.
pub fn combine(w: &WeightMatrix, y_d: &CMatrix, ctr: &mut MulCounter) -> Result<CMatrix> {
    if w.w.cols() != y_d.rows() {
        return Err(Error::InvalidArgument(format!(
            "weights have {} columns, data block has {} rows",
            w.w.cols(),
            y_d.rows()
        )));
    }
    Ok(ctr.matmul(&w.w, y_d))
}

/// Hard QPSK decisions on `W · Y_D`.
pub fn demod_qpsk(w: &WeightMatrix, y_d: &CMatrix) -> Result<CMatrix> {
    let soft = combine(w, y_d, &mut MulCounter::default())?;
    Ok(decide_all(&soft))
}

pub fn decide_all(soft: &CMatrix) -> CMatrix {
    CMatrix::from_fn(soft.rows(), soft.cols(), |r, c| qpsk::decide(soft[(r, c)]))
}

/// `‖A − B‖_F / ‖A‖_F` between the DWE rows `P_det·Y⁺` and the LS+ZF rows
/// `(Y·P_det⁺)⁺`.
pub fn dwe_lszf_gap(y: &CMatrix, p_det: &CMatrix) -> Result<f64> {
    let idx: Vec<usize> = (0..p_det.rows()).collect();
    let dwe = dwe_weights(y, p_det, &idx)?;
    let lszf = lszf_weights(y, p_det, &idx)?;
    Ok(dwe.w.rel_diff(&lszf.w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{cgauss, pinv, RngStream};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn dwe_two_by_two_hand_case() {
        let s = 2f64.sqrt();
        let p = CMatrix::identity(2).scale(s);
        let y = p.clone(); // H = I, both active
        let w = dwe_weights(&y, &p, &[0, 1]).unwrap();
        assert!(w.w.max_abs_diff(&CMatrix::identity(2)) < 1e-14);
    }

    #[test]
    fn dwe_subset_rows_bit_identical() {
        let mut rng = RngStream::new(4, 0);
        let y = cgauss(10, 6, 1.0, &mut rng).unwrap();
        let p = cgauss(15, 6, 1.0, &mut rng).unwrap();
        let all: Vec<usize> = (0..15).collect();
        let full = dwe_weights(&y, &p, &all).unwrap();
        let sub_idx = [3usize, 11, 7];
        let sub = dwe_weights(&y, &p.select_rows(&sub_idx), &sub_idx).unwrap();
        for (r, &i) in sub_idx.iter().enumerate() {
            assert_eq!(sub.w.row(r), full.row_for(i).unwrap());
        }
    }

    #[test]
    fn zf_orthonormal_columns_give_adjoint() {
        let s = 0.5f64.sqrt();
        let h = CMatrix::from_rows(&[vec![c(s), c(0.0)], vec![c(s), c(0.0)], vec![c(0.0), c(1.0)]]);
        let w = zf_weights(&h, &[0, 1]).unwrap();
        assert!(w.w.max_abs_diff(&h.adjoint()) < 1e-14);
    }

    #[test]
    fn zf_single_user_is_normalized_matched_filter() {
        let mut rng = RngStream::new(8, 0);
        let h = cgauss(6, 1, 1.0, &mut rng).unwrap();
        let w = zf_weights(&h, &[0]).unwrap();
        let mf = h.adjoint().scale(1.0 / h.frobenius_norm_sq());
        assert!(w.w.max_abs_diff(&mf) < 1e-14);
    }

    #[test]
    fn ls_estimate_orthogonal_pilots_recovers_channel() {
        let l = 4;
        let p = CMatrix::identity(l).scale((l as f64).sqrt());
        let idx = [0usize, 2];
        let p_det = p.select_rows(&idx);
        let mut rng = RngStream::new(8, 1);
        let h = cgauss(5, 2, 1.0, &mut rng).unwrap();
        let y = h.matmul(&p_det);
        let est = ls_channel_estimate(&y, &p_det).unwrap();
        assert!(est.max_abs_diff(&h) < 1e-13);
    }

    #[test]
    fn ls_estimate_rejects_empty() {
        let y = CMatrix::zeros(3, 2);
        assert!(ls_channel_estimate(&y, &CMatrix::zeros(0, 2)).is_err());
    }

    #[test]
    fn ls_estimate_noiseless_oracle_matches_dense_substitution() {
        let mut rng = RngStream::new(21, 0);
        let (m, l, k) = (8, 6, 3);
        let h = cgauss(m, k, 1.0, &mut rng).unwrap();
        let p = cgauss(k, l, 1.0, &mut rng).unwrap();
        let y = h.matmul(&p);
        let est = ls_channel_estimate(&y, &p).unwrap();
        // P·P⁺ = I_K for full row rank P.
        assert!(p.matmul(&pinv(&p).unwrap()).max_abs_diff(&CMatrix::identity(k)) < 1e-12);
        assert!(est.max_abs_diff(&h) < 1e-12);
    }

    #[test]
    fn mismatches_rejected() {
        let y = CMatrix::zeros(4, 3);
        assert!(dwe_weights(&y, &CMatrix::zeros(2, 2), &[0, 1]).is_err());
        assert!(dwe_weights(&CMatrix::identity(3), &CMatrix::identity(3), &[0]).is_err());
        assert!(zf_weights(&CMatrix::identity(3), &[0]).is_err());
        let w = WeightMatrix::new(CMatrix::identity(2), vec![0, 1]).unwrap();
        assert!(demod_qpsk(&w, &CMatrix::zeros(3, 1)).is_err());
        assert!(WeightMatrix::new(CMatrix::identity(2), vec![1, 1]).is_err());
    }

    #[test]
    fn demod_decides_nearest_point() {
        let w = WeightMatrix::new(CMatrix::identity(1), vec![0]).unwrap();
        let y = CMatrix::from_rows(&[vec![Complex64::new(0.9, 0.8)]]);
        let d = demod_qpsk(&w, &y).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(d[(0, 0)], Complex64::new(s, s));
    }

    #[test]
    fn counted_dwe_charges_pinv_and_rows() {
        let mut ctr = MulCounter::new(4.0);
        let y = CMatrix::identity(3);
        dwe_weights_counted(&y, &CMatrix::identity(3), &[0, 1, 2], &mut ctr).unwrap();
        assert_eq!(ctr.complex(), MulCounter::pinv_charge(4.0, 3, 3) + 27);
    }
}
