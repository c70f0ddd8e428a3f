//! Activity detectors. Each returns a ranked support of `ζ` pilot indices.
//!
//! * [`detect_pdrs_dwe`]: one-shot sorting of PDRS recovery residuals
//!   `e_n = ‖p_n·Y⁺·Y_R − r_n‖²` under direct weight estimation. The product
//!   is evaluated right to left, `P·(Y⁺·Y_R)`, so the N×M weight matrix is
//!   never formed.
//! * [`detect_bomp`]: block OMP, `ζ` greedy iterations of correlation and
//!   least-squares deflation.
//! * [`detect_fpr`]: matched-filter powers mapped through the stored
//!   pseudo-inverse of `|P·Pᴴ|²`.
//! * [`oracle_support`]: the ground truth.
//!
//! Sorting ties go to the lower pilot index. Non-finite scores rank after
//! every finite one, ordered by index.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numerics::{abs2_hadamard, col_norms_sq, pinv_real, CMatrix, MulCounter, RMatrix};
use crate::scenario::{PdrsCodebook, PilotPool, ReceivedFrame};

#[derive(Clone, Debug, PartialEq)]
pub struct DetectionResult {
    /// Detected pilot indices, best first.
    pub support: Vec<usize>,
    /// Score per support entry: PDRS residual, BOMP correlation norm at
    /// selection, or FPR recovered power.
    pub scores: Vec<f64>,
    /// Complex multiplications spent.
    pub mult_count: u64,
    /// Real multiplications spent outside the complex tally (FPR's stored matrix).
    pub real_mult_count: u64,
    /// BOMP ran more iterations than the pilot length, so its least-squares
    /// step was rank-deficient.
    pub ls_degenerate: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DetectorKind {
    Pdrs,
    Bomp,
    Fpr,
    Oracle,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 4] = [DetectorKind::Pdrs, DetectorKind::Bomp, DetectorKind::Fpr, DetectorKind::Oracle];

    pub fn name(self) -> &'static str {
        match self {
            DetectorKind::Pdrs => "pdrs",
            DetectorKind::Bomp => "bomp",
            DetectorKind::Fpr => "fpr",
            DetectorKind::Oracle => "oracle",
        }
    }
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DetectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pdrs" | "pdrs-dwe" => Ok(DetectorKind::Pdrs),
            "bomp" => Ok(DetectorKind::Bomp),
            "fpr" => Ok(DetectorKind::Fpr),
            "oracle" => Ok(DetectorKind::Oracle),
            other => Err(Error::InvalidArgument(format!("unknown detector '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Order {
    Ascending,
    Descending,
}

/// Indices of the best `take` scores.
fn rank_support(scores: &[f64], take: usize, order: Order) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| {
        let (sa, sb) = (scores[a], scores[b]);
        match (sa.is_finite(), sb.is_finite()) {
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            (false, false) => a.cmp(&b),
            (true, true) => {
                let by_score = match order {
                    Order::Ascending => sa.total_cmp(&sb),
                    Order::Descending => sb.total_cmp(&sa),
                };
                by_score.then(a.cmp(&b))
            }
        }
    });
    idx.truncate(take);
    idx
}

fn check_zeta(zeta: usize, pool: &PilotPool) -> Result<()> {
    if zeta > pool.size() {
        return Err(Error::InvalidArgument(format!(
            "zeta = {zeta} exceeds pool size {}",
            pool.size()
        )));
    }
    Ok(())
}

fn check_pool(frame: &ReceivedFrame, pool: &PilotPool) -> Result<()> {
    if frame.y.cols() != pool.pilot_len() {
        return Err(Error::InvalidArgument(format!(
            "frame pilot block has {} columns, pool pilots have length {}",
            frame.y.cols(),
            pool.pilot_len()
        )));
    }
    Ok(())
}

/// Detection result plus the `Y⁺` it computed, for reuse by DWE combining.
#[derive(Clone, Debug)]
pub struct PdrsOutput {
    pub result: DetectionResult,
    pub y_pinv: CMatrix,
    /// Residuals `e_n` for every pilot in the pool.
    pub residuals: Vec<f64>,
}

pub fn detect_pdrs_dwe_full(
    frame: &ReceivedFrame,
    pool: &PilotPool,
    codebook: &PdrsCodebook,
    zeta: usize,
    ctr: &mut MulCounter,
) -> Result<PdrsOutput> {
    check_zeta(zeta, pool)?;
    check_pool(frame, pool)?;
    if codebook.matrix().rows() != pool.size() || codebook.len() != frame.y_r.cols() {
        return Err(Error::InvalidArgument(format!(
            "codebook is {}x{}, expected {}x{}",
            codebook.matrix().rows(),
            codebook.len(),
            pool.size(),
            frame.y_r.cols()
        )));
    }
    let start = ctr.complex();
    let y_pinv = ctr.pinv(&frame.y)?;
    let t = ctr.matmul(&y_pinv, &frame.y_r);
    let e = ctr.matmul(pool.matrix(), &t).sub(codebook.matrix());
    let residuals = ctr.row_norms_sq(&e);
    let support = rank_support(&residuals, zeta, Order::Ascending);
    let scores = support.iter().map(|&n| residuals[n]).collect();
    Ok(PdrsOutput {
        result: DetectionResult {
            support,
            scores,
            mult_count: ctr.complex() - start,
            real_mult_count: 0,
            ls_degenerate: false,
        },
        y_pinv,
        residuals,
    })
}

pub fn detect_pdrs_dwe_counted(
    frame: &ReceivedFrame,
    pool: &PilotPool,
    codebook: &PdrsCodebook,
    zeta: usize,
    ctr: &mut MulCounter,
) -> Result<DetectionResult> {
    Ok(detect_pdrs_dwe_full(frame, pool, codebook, zeta, ctr)?.result)
}

pub fn detect_pdrs_dwe(
    frame: &ReceivedFrame,
    pool: &PilotPool,
    codebook: &PdrsCodebook,
    zeta: usize,
) -> Result<DetectionResult> {
    detect_pdrs_dwe_counted(frame, pool, codebook, zeta, &mut MulCounter::default())
}

pub fn detect_bomp_counted(
    frame: &ReceivedFrame,
    pool: &PilotPool,
    zeta: usize,
    ctr: &mut MulCounter,
) -> Result<DetectionResult> {
    check_zeta(zeta, pool)?;
    check_pool(frame, pool)?;
    let start = ctr.complex();
    let p = pool.matrix();
    let p_adj = p.adjoint();
    let y_t = frame.y.transpose();

    let mut selected = vec![false; pool.size()];
    let mut support = Vec::with_capacity(zeta);
    let mut scores = Vec::with_capacity(zeta);
    let mut z = frame.y.clone();

    for _ in 0..zeta {
        // Column n of Z·Pᴴ is the correlation of the residual with pilot n.
        let corr = ctr.matmul(&z, &p_adj);
        let power = col_norms_sq(&corr);
        ctr.add_complex((corr.rows() * corr.cols()) as u64);
        let mut best: Option<usize> = None;
        for (n, &pw) in power.iter().enumerate() {
            if selected[n] || !pw.is_finite() {
                continue;
            }
            if best.is_none_or(|b| pw > power[b]) {
                best = Some(n);
            }
        }
        // Every remaining score non-finite: fall back to the lowest free index.
        let n = match best {
            Some(n) => n,
            None => (0..pool.size()).find(|&i| !selected[i]).expect("zeta <= N"),
        };
        selected[n] = true;
        support.push(n);
        scores.push(power[n].sqrt());

        // Zᵀ = Yᵀ − P_sᵀ · ((P_sᵀ)⁺ · Yᵀ)
        let a = p.select_rows(&support).transpose();
        let a_pinv = ctr.pinv(&a)?;
        let coeff = ctr.matmul(&a_pinv, &y_t);
        let proj = ctr.matmul(&a, &coeff);
        z = y_t.sub(&proj).transpose();
    }

    Ok(DetectionResult {
        support,
        scores,
        mult_count: ctr.complex() - start,
        real_mult_count: 0,
        ls_degenerate: zeta > pool.pilot_len(),
    })
}

pub fn detect_bomp(frame: &ReceivedFrame, pool: &PilotPool, zeta: usize) -> Result<DetectionResult> {
    detect_bomp_counted(frame, pool, zeta, &mut MulCounter::default())
}

/// The stored FPR matrix `(|P·Pᴴ|²)⁺` (N×N, real).
pub fn fpr_gram_pinv(pool: &PilotPool) -> Result<RMatrix> {
    let p = pool.matrix();
    let gram = p.matmul(&p.adjoint());
    pinv_real(&abs2_hadamard(&gram))
}

pub fn detect_fpr_counted(
    frame: &ReceivedFrame,
    pool: &PilotPool,
    zeta: usize,
    g_pinv: &RMatrix,
    ctr: &mut MulCounter,
) -> Result<DetectionResult> {
    check_zeta(zeta, pool)?;
    check_pool(frame, pool)?;
    let n = pool.size();
    if g_pinv.shape() != (n, n) {
        return Err(Error::InvalidArgument(format!(
            "stored FPR matrix is {}x{}, expected {n}x{n}",
            g_pinv.rows(),
            g_pinv.cols()
        )));
    }
    let start = ctr.complex();
    let start_real = ctr.real();
    let h_mf = ctr.matmul(&frame.y, &pool.matrix().adjoint());
    let p_mf = col_norms_sq(&h_mf);
    ctr.add_complex((h_mf.rows() * h_mf.cols()) as u64);
    let p_r = ctr.real_left_mul(&p_mf, g_pinv);
    let support = rank_support(&p_r, zeta, Order::Descending);
    let scores = support.iter().map(|&i| p_r[i]).collect();
    Ok(DetectionResult {
        support,
        scores,
        mult_count: ctr.complex() - start,
        real_mult_count: ctr.real() - start_real,
        ls_degenerate: false,
    })
}

pub fn detect_fpr(frame: &ReceivedFrame, pool: &PilotPool, zeta: usize, g_pinv: &RMatrix) -> Result<DetectionResult> {
    detect_fpr_counted(frame, pool, zeta, g_pinv, &mut MulCounter::default())
}

pub fn oracle_support(frame: &ReceivedFrame) -> DetectionResult {
    let support = frame.ground_truth.active().to_vec();
    DetectionResult {
        scores: vec![0.0; support.len()],
        support,
        mult_count: 0,
        real_mult_count: 0,
        ls_degenerate: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{pinv, Complex64, RngStream};
    use crate::scenario::{
        assemble_frame, gen_pdrs_codebook, gen_pilot_pool, sample_activity, ActivityPattern, PdrsMode, SystemConfig,
    };

    fn setup(cfg: &SystemConfig, seed: u64) -> (PilotPool, PdrsCodebook, ReceivedFrame) {
        let mut rng = RngStream::new(seed, 0);
        let pool = gen_pilot_pool(cfg, &mut rng).unwrap();
        let cb = gen_pdrs_codebook(cfg, &mut rng).unwrap();
        let act = sample_activity(cfg, &mut rng).unwrap();
        let f = assemble_frame(cfg, &pool, &cb, &act, &mut rng).unwrap();
        (pool, cb, f)
    }

    #[test]
    fn rank_support_ties_and_nan() {
        let s = [1.0, 0.5, 0.5, f64::NAN, 0.1];
        assert_eq!(rank_support(&s, 3, Order::Ascending), vec![4, 1, 2]);
        assert_eq!(rank_support(&s, 5, Order::Descending), vec![0, 1, 2, 4, 3]);
        let all_nan = [f64::NAN; 3];
        assert_eq!(rank_support(&all_nan, 2, Order::Ascending), vec![0, 1]);
    }

    #[test]
    fn pdrs_noiseless_small_instance() {
        let mut cfg = SystemConfig::small(8, 12, 6, 3);
        cfg.pdrs_len = 2;
        let (pool, cb, f) = setup(&cfg, 31);
        let out = detect_pdrs_dwe_full(&f, &pool, &cb, 3, &mut MulCounter::default()).unwrap();
        for n in 0..12 {
            if f.ground_truth.contains(n) {
                assert!(out.residuals[n] <= 1e-18, "active {n}: {}", out.residuals[n]);
            } else {
                assert!(out.residuals[n] > 1e-6, "inactive {n}: {}", out.residuals[n]);
            }
        }
        let mut s = out.result.support.clone();
        s.sort_unstable();
        assert_eq!(s, f.ground_truth.active());
        assert!(out.result.scores.windows(2).all(|w| w[0] <= w[1]));

        // Dense route: (P·Y⁺)·Y_R − R.
        let dense = pool
            .matrix()
            .matmul(&pinv(&f.y).unwrap())
            .matmul(&f.y_r)
            .sub(cb.matrix());
        let dense_res = crate::numerics::row_norms_sq(&dense);
        assert_eq!(dense_res.len(), out.residuals.len());
        for (d, r) in dense_res.iter().zip(&out.residuals) {
            assert!((d - r).abs() <= 1e-10 * (1.0 + d));
        }
    }

    #[test]
    fn pdrs_single_user_orthogonal() {
        let mut cfg = SystemConfig::small(4, 4, 3, 1);
        cfg.pdrs_len = 2;
        cfg.pdrs_mode = PdrsMode::OrthogonalReuse;
        let s3 = 3f64.sqrt();
        // Three orthogonal pilots plus one more normalized pilot.
        let mut p = CMatrix::identity(3).scale(s3).transpose();
        p = CMatrix::from_fn(4, 3, |r, c| if r < 3 { p[(r, c)] } else { Complex64::new(1.0, 0.0) });
        let pool = PilotPool::from_matrix(p).unwrap();
        let cb = gen_pdrs_codebook(&cfg, &mut RngStream::new(0, 0)).unwrap();
        let act = ActivityPattern::new(4, vec![1]).unwrap();
        let f = assemble_frame(&cfg, &pool, &cb, &act, &mut RngStream::new(0, 1)).unwrap();
        let r = detect_pdrs_dwe(&f, &pool, &cb, 1).unwrap();
        assert_eq!(r.support, vec![1]);
    }

    #[test]
    fn pdrs_prefix_monotonic_in_zeta() {
        let mut cfg = SystemConfig::small(8, 20, 6, 4);
        cfg.snr_db = 5.0;
        let (pool, cb, f) = setup(&cfg, 2);
        let a = detect_pdrs_dwe(&f, &pool, &cb, 3).unwrap();
        let b = detect_pdrs_dwe(&f, &pool, &cb, 9).unwrap();
        assert_eq!(a.support[..], b.support[..3]);
    }

    #[test]
    fn zeta_above_pool_rejected() {
        let cfg = SystemConfig::small(8, 12, 6, 3);
        let (pool, cb, f) = setup(&cfg, 2);
        assert!(detect_pdrs_dwe(&f, &pool, &cb, 13).is_err());
        assert!(detect_bomp(&f, &pool, 13).is_err());
        let g = RMatrix::identity(12);
        assert!(detect_fpr(&f, &pool, 13, &g).is_err());
        assert!(detect_fpr(&f, &pool, 3, &RMatrix::identity(11)).is_err());
    }

    #[test]
    fn bomp_two_pilot_case() {
        let mut cfg = SystemConfig::small(2, 3, 2, 1);
        cfg.pdrs_len = 1;
        let s = 2f64.sqrt();
        let p = CMatrix::from_fn(3, 2, |r, c| {
            if r == 2 {
                Complex64::new(1.0, 0.0)
            } else if r == c {
                Complex64::new(s, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let pool = PilotPool::from_matrix(p).unwrap();
        let cb = gen_pdrs_codebook(&cfg, &mut RngStream::new(0, 0)).unwrap();
        let act = ActivityPattern::new(3, vec![0]).unwrap();
        let h = CMatrix::identity(2).hcat(&CMatrix::zeros(2, 1));
        let f = crate::scenario::assemble_frame_with_channel(&cfg, &pool, &cb, &act, h, &mut RngStream::new(0, 0))
            .unwrap();
        let r = detect_bomp(&f, &pool, 1).unwrap();
        assert_eq!(r.support, vec![0]);
        assert!(!r.ls_degenerate);
    }

    #[test]
    fn bomp_flags_degenerate_least_squares() {
        let mut cfg = SystemConfig::small(6, 10, 3, 2);
        cfg.snr_db = 10.0;
        let (pool, _, f) = setup(&cfg, 3);
        let r = detect_bomp(&f, &pool, 5).unwrap();
        assert!(r.ls_degenerate);
        let mut s = r.support.clone();
        s.sort_unstable();
        s.dedup();
        assert_eq!(s.len(), 5);
    }

    #[test]
    fn bomp_single_iteration_count() {
        let cfg = SystemConfig::small(8, 12, 6, 3);
        let (pool, _, f) = setup(&cfg, 5);
        let mut ctr = MulCounter::new(4.0);
        let r = detect_bomp_counted(&f, &pool, 1, &mut ctr).unwrap();
        let (n, l, m) = (12u64, 6u64, 8u64);
        let proj = MulCounter::pinv_charge(4.0, 6, 1) + 2 * l * m;
        assert_eq!(r.mult_count, n * l * m + m * n + proj);
    }

    #[test]
    fn fpr_orthogonal_pool_ranks_by_matched_filter() {
        // N = L is outside SystemConfig's L < N rule, so build the frame by hand.
        let l = 4;
        let p = CMatrix::identity(l).scale(2.0);
        let pool = PilotPool::from_matrix(p.clone()).unwrap();
        let g = fpr_gram_pinv(&pool).unwrap();
        // |PPᴴ|² = 16·I, so the stored matrix is I/16.
        assert!(g.max_abs_diff(&RMatrix::from_fn(l, l, |r, c| if r == c { 1.0 / 16.0 } else { 0.0 })) < 1e-14);
        let mut rng = RngStream::new(9, 9);
        let h = crate::numerics::cgauss(6, 2, 1.0, &mut rng).unwrap();
        let act = ActivityPattern::new(l, vec![1, 3]).unwrap();
        let y = h.matmul(&p.select_rows(act.active()));
        let f = ReceivedFrame {
            y_r: CMatrix::zeros(6, 1),
            y,
            y_d: CMatrix::zeros(6, 0),
            sigma2: 0.0,
            ground_truth: act,
            truth: None,
        };
        let r = detect_fpr(&f, &pool, 2, &g).unwrap();
        let mut s = r.support.clone();
        s.sort_unstable();
        assert_eq!(s, vec![1, 3]);
        assert!(r.scores.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn oracle_returns_truth() {
        let cfg = SystemConfig::small(8, 12, 6, 3);
        let (_, _, f) = setup(&cfg, 5);
        let r = oracle_support(&f);
        assert_eq!(r.support, f.ground_truth.active());
        assert_eq!(r.mult_count, 0);
        let mut empty = f.clone();
        empty.ground_truth = ActivityPattern::new(12, vec![]).unwrap();
        assert!(oracle_support(&empty).support.is_empty());
    }

    #[test]
    fn detector_names_round_trip() {
        for k in DetectorKind::ALL {
            assert_eq!(k.name().parse::<DetectorKind>().unwrap(), k);
        }
        assert!("amp".parse::<DetectorKind>().is_err());
    }
}
