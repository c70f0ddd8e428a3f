//! Frame synthesis for one grant-free uplink slot.
//!
//! A frame carries three blocks received over the same flat-fading channel
//! `H` (M×N): the PDRS block `Y_R = H·R_A + noise` (M×l), the pilot block
//! `Y = H·P_A + noise` (M×L) and a QPSK data block `Y_D` (M×D). `R_A` and
//! `P_A` are the codebook and pool with inactive rows zeroed, so only the
//! active columns of `H` contribute.

mod config;
mod frame_file;

pub use config::{PdrsMode, SystemConfig};
pub use frame_file::{read_frame, read_frame_from, write_frame, write_frame_to, FrameFile, FRAME_MAGIC};

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::numerics::{cgauss, row_norms_sq, CMatrix, Complex64, RngStream};
use crate::qpsk;

/// Row-norm tolerance for pools and codebooks, relative to the target norm.
const NORM_TOL: f64 = 1e-10;

fn check_row_norms(m: &CMatrix, what: &str) -> Result<()> {
    let target = m.cols() as f64;
    for (i, n) in row_norms_sq(m).into_iter().enumerate() {
        if (n - target).abs() > NORM_TOL * target.max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "{what} row {i} has squared norm {n}, expected {target}"
            )));
        }
    }
    Ok(())
}

fn normalize_rows(m: &mut CMatrix) {
    let target = m.cols() as f64;
    for r in 0..m.rows() {
        let n: f64 = m.row(r).iter().map(|z| z.norm_sqr()).sum();
        if n > 0.0 {
            let s = (target / n).sqrt();
            for z in m.row_mut(r) {
                *z *= s;
            }
        }
    }
}

/// The pilot pool `P` (N×L); row `i` belongs to user `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct PilotPool {
    p: CMatrix,
}

impl PilotPool {
    /// Wraps a pool, checking `‖p_i‖² = L` for every row.
    pub fn from_matrix(p: CMatrix) -> Result<Self> {
        check_row_norms(&p, "pilot")?;
        Ok(Self { p })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.p
    }

    pub fn size(&self) -> usize {
        self.p.rows()
    }

    pub fn pilot_len(&self) -> usize {
        self.p.cols()
    }

    pub fn rows(&self, idx: &[usize]) -> CMatrix {
        self.p.select_rows(idx)
    }
}

/// The PDRS codebook `R` (N×l).
#[derive(Clone, Debug, PartialEq)]
pub struct PdrsCodebook {
    r: CMatrix,
    mode: PdrsMode,
}

impl PdrsCodebook {
    pub fn from_matrix(r: CMatrix, mode: PdrsMode) -> Result<Self> {
        check_row_norms(&r, "PDRS")?;
        Ok(Self { r, mode })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.r
    }

    pub fn mode(&self) -> PdrsMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.r.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.r.cols() == 0
    }
}

/// The true set of active users.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActivityPattern {
    pool_size: usize,
    active: Vec<usize>,
}

impl ActivityPattern {
    /// Builds a pattern from distinct indices below `pool_size`; the result is sorted.
    pub fn new(pool_size: usize, mut active: Vec<usize>) -> Result<Self> {
        active.sort_unstable();
        if active.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument("duplicate active index".into()));
        }
        if let Some(&last) = active.last() {
            if last >= pool_size {
                return Err(Error::InvalidArgument(format!(
                    "active index {last} outside pool of {pool_size}"
                )));
            }
        }
        Ok(Self { pool_size, active })
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn count(&self) -> usize {
        self.active.len()
    }

    pub fn pool_size(&self) -> usize {
        self.pool_size
    }

    /// Activity flags `a_i ∈ {0, 1}`.
    pub fn flags(&self) -> Vec<bool> {
        let mut f = vec![false; self.pool_size];
        for &i in &self.active {
            f[i] = true;
        }
        f
    }

    pub fn contains(&self, i: usize) -> bool {
        self.active.binary_search(&i).is_ok()
    }
}

/// Quantities known only to the simulator.
#[derive(Clone, Debug, PartialEq)]
pub struct LinkTruth {
    /// Channel `H`, M×N.
    pub h: CMatrix,
    /// Transmitted QPSK symbols, K×D, rows in active order.
    pub x_d: CMatrix,
}

/// One received frame.
#[derive(Clone, Debug, PartialEq)]
pub struct ReceivedFrame {
    pub y_r: CMatrix,
    pub y: CMatrix,
    pub y_d: CMatrix,
    pub sigma2: f64,
    pub ground_truth: ActivityPattern,
    /// Absent for frames loaded from disk.
    pub truth: Option<LinkTruth>,
}

impl ReceivedFrame {
    pub fn antennas(&self) -> usize {
        self.y.rows()
    }

    pub fn pilot_len(&self) -> usize {
        self.y.cols()
    }

    pub fn pdrs_len(&self) -> usize {
        self.y_r.cols()
    }

    pub fn data_len(&self) -> usize {
        self.y_d.cols()
    }
}

/// `N×L` i.i.d. `CN(0,1)` pool with each row rescaled to `‖p_i‖² = L`.
pub fn gen_pilot_pool(cfg: &SystemConfig, rng: &mut RngStream) -> Result<PilotPool> {
    cfg.validate()?;
    let mut p = cgauss(cfg.pool_size, cfg.pilot_len, 1.0, rng)?;
    normalize_rows(&mut p);
    Ok(PilotPool { p })
}

pub fn gen_pdrs_codebook(cfg: &SystemConfig, rng: &mut RngStream) -> Result<PdrsCodebook> {
    cfg.validate()?;
    let (n, l) = (cfg.pool_size, cfg.pdrs_len);
    let r = match cfg.pdrs_mode {
        PdrsMode::Gaussian => {
            let mut r = cgauss(n, l, 1.0, rng)?;
            normalize_rows(&mut r);
            r
        }
        PdrsMode::OrthogonalReuse => {
            let amp = (l as f64).sqrt();
            let mut r = CMatrix::zeros(n, l);
            for i in 0..n {
                let code = rng.random_range(0..l);
                r[(i, code)] = Complex64::new(amp, 0.0);
            }
            r
        }
    };
    Ok(PdrsCodebook {
        r,
        mode: cfg.pdrs_mode,
    })
}

/// Uniformly random `K`-subset of `{0, …, N−1}`, sorted.
pub fn sample_activity(cfg: &SystemConfig, rng: &mut RngStream) -> Result<ActivityPattern> {
    let (n, k) = (cfg.pool_size, cfg.active_users);
    if k > n {
        return Err(Error::InvalidArgument(format!("K = {k} exceeds N = {n}")));
    }
    let mut active = index::sample(rng, n, k).into_vec();
    active.sort_unstable();
    Ok(ActivityPattern { pool_size: n, active })
}

fn add_noise(m: &mut CMatrix, sigma2: f64, rng: &mut RngStream) -> Result<()> {
    if sigma2 > 0.0 && !m.is_empty() {
        let n = cgauss(m.rows(), m.cols(), sigma2, rng)?;
        m.add_assign(&n);
    }
    Ok(())
}

/// Draws the channel, data and noise for one frame.
///
/// Draw order from `rng`: `H`, data bits, then noise for `Y_R`, `Y`, `Y_D`.
pub fn assemble_frame(
    cfg: &SystemConfig,
    pool: &PilotPool,
    codebook: &PdrsCodebook,
    activity: &ActivityPattern,
    rng: &mut RngStream,
) -> Result<ReceivedFrame> {
    let h = cgauss(cfg.antennas, cfg.pool_size, 1.0, rng)?;
    assemble_frame_with_channel(cfg, pool, codebook, activity, h, rng)
}

/// As [`assemble_frame`] but with a caller-supplied channel.
pub fn assemble_frame_with_channel(
    cfg: &SystemConfig,
    pool: &PilotPool,
    codebook: &PdrsCodebook,
    activity: &ActivityPattern,
    h: CMatrix,
    rng: &mut RngStream,
) -> Result<ReceivedFrame> {
    let (m, n) = (cfg.antennas, cfg.pool_size);
    if pool.matrix().shape() != (n, cfg.pilot_len)
        || codebook.matrix().shape() != (n, cfg.pdrs_len)
        || activity.pool_size() != n
        || h.shape() != (m, n)
    {
        return Err(Error::InvalidArgument(
            "pool, codebook, activity and channel dimensions disagree with config".into(),
        ));
    }
    let act = activity.active();
    let d = cfg.data_symbols();
    let sigma2 = cfg.sigma2();

    let x_d = CMatrix::from_fn(act.len(), d, |_, _| qpsk::map(rng.random_range(0..4u8)));

    let h_act = h.select_cols(act);
    let mut y_r = h_act.matmul(&codebook.matrix().select_rows(act));
    let mut y = h_act.matmul(&pool.rows(act));
    let mut y_d = h_act.matmul(&x_d);
    add_noise(&mut y_r, sigma2, rng)?;
    add_noise(&mut y, sigma2, rng)?;
    add_noise(&mut y_d, sigma2, rng)?;

    Ok(ReceivedFrame {
        y_r,
        y,
        y_d,
        sigma2,
        ground_truth: activity.clone(),
        truth: Some(LinkTruth { h, x_d }),
    })
}
