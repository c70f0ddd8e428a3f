use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numerics::DEFAULT_SVD_COST;

/// How PDRS codes are generated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PdrsMode {
    /// i.i.d. complex Gaussian rows normalized to `‖r‖² = l`.
    Gaussian,
    /// Each row is one of the `l` columns of `√l·I_l`, drawn uniformly.
    OrthogonalReuse,
}

impl fmt::Display for PdrsMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PdrsMode::Gaussian => "gaussian",
            PdrsMode::OrthogonalReuse => "orthogonal-reuse",
        })
    }
}

impl FromStr for PdrsMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gaussian" => Ok(PdrsMode::Gaussian),
            "orthogonal-reuse" | "orthogonal_reuse" | "orthogonal" => Ok(PdrsMode::OrthogonalReuse),
            other => Err(Error::Config(format!("unknown pdrs_mode '{other}'"))),
        }
    }
}

/// Parameters of one simulated operating point.
///
/// `snr_db = +∞` selects the noiseless limit (`sigma2 = 0`).
#[derive(Clone, Debug, PartialEq)]
pub struct SystemConfig {
    /// `M`, receive antennas.
    pub antennas: usize,
    /// `N`, pilots in the pool (one per potential user).
    pub pool_size: usize,
    /// `L`, pilot length.
    pub pilot_len: usize,
    /// `l`, PDRS length.
    pub pdrs_len: usize,
    /// `K`, active users per frame.
    pub active_users: usize,
    /// `ζ`, size of the declared support.
    pub zeta: usize,
    pub snr_db: f64,
    /// `D`, data symbols per frame before any PDRS displacement.
    pub data_len: usize,
    pub pdrs_mode: PdrsMode,
    pub trials: u64,
    pub seed: u64,
    /// When set, PDRS symbols take `l` data slots instead of extending the frame.
    pub pdrs_displaces_data: bool,
    /// Draw a fresh pool and codebook per trial instead of once per sweep point.
    pub resample_pool: bool,
    /// Cost constant for SVD-based pseudo-inverses in the complexity ledger.
    pub svd_cost: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self::large_scale()
    }
}

impl SystemConfig {
    /// The large-scale operating point: 128 antennas, 1000 pilots of length
    /// 96, 96 active users, 4 dB, PDRS length 4.
    pub fn large_scale() -> Self {
        Self {
            antennas: 128,
            pool_size: 1000,
            pilot_len: 96,
            pdrs_len: 4,
            active_users: 96,
            zeta: 96,
            snr_db: 4.0,
            data_len: 240,
            pdrs_mode: PdrsMode::Gaussian,
            trials: 2000,
            seed: 1,
            pdrs_displaces_data: false,
            resample_pool: false,
            svd_cost: DEFAULT_SVD_COST,
        }
    }

    /// A small noiseless configuration for quick checks.
    pub fn small(antennas: usize, pool_size: usize, pilot_len: usize, active: usize) -> Self {
        Self {
            antennas,
            pool_size,
            pilot_len,
            pdrs_len: 2,
            active_users: active,
            zeta: active,
            snr_db: f64::INFINITY,
            data_len: 16,
            trials: 10,
            ..Self::large_scale()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidArgument(msg));
        if self.antennas < 1 {
            return fail("M must be at least 1".into());
        }
        if self.pilot_len < 1 {
            return fail("L must be at least 1".into());
        }
        if self.pilot_len >= self.pool_size {
            return fail(format!("L = {} must be below N = {}", self.pilot_len, self.pool_size));
        }
        if self.active_users < 1 || self.active_users > self.pool_size {
            return fail(format!(
                "K = {} must lie in [1, N = {}]",
                self.active_users, self.pool_size
            ));
        }
        if self.zeta < 1 || self.zeta > self.pool_size {
            return fail(format!("zeta = {} must lie in [1, N = {}]", self.zeta, self.pool_size));
        }
        if self.pdrs_len < 1 {
            return fail("l must be at least 1".into());
        }
        if self.snr_db.is_nan() || self.snr_db == f64::NEG_INFINITY {
            return fail(format!("snr_db = {} is not usable", self.snr_db));
        }
        if !(self.svd_cost.is_finite() && self.svd_cost >= 0.0) {
            return fail(format!("c_svd = {} must be finite and nonnegative", self.svd_cost));
        }
        Ok(())
    }

    /// `α = ζ / K`.
    pub fn alpha(&self) -> f64 {
        self.zeta as f64 / self.active_users as f64
    }

    /// Sets `ζ = round(α·K)`, clamped to `[1, N]`.
    pub fn set_alpha(&mut self, alpha: f64) {
        let z = (alpha * self.active_users as f64).round().max(1.0) as usize;
        self.zeta = z.min(self.pool_size);
    }

    /// Noise power under unit per-user receive power: `10^(−snr_db/10)`.
    pub fn sigma2(&self) -> f64 {
        if self.snr_db == f64::INFINITY {
            0.0
        } else {
            10f64.powf(-self.snr_db / 10.0)
        }
    }

    /// Data symbols actually carried per frame.
    pub fn data_symbols(&self) -> usize {
        if self.pdrs_displaces_data {
            self.data_len.saturating_sub(self.pdrs_len)
        } else {
            self.data_len
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn large_point_is_valid() {
        let cfg = SystemConfig::large_scale();
        cfg.validate().unwrap();
        assert!((cfg.sigma2() - 10f64.powf(-0.4)).abs() < 1e-15);
        assert!((cfg.sigma2() - 0.398).abs() < 1e-3);
        assert_eq!(cfg.alpha(), 1.0);
    }

    #[test]
    fn invariant_violations() {
        let mut c = SystemConfig::large_scale();
        c.pilot_len = 1000;
        assert!(c.validate().is_err());
        let mut c = SystemConfig::large_scale();
        c.active_users = 1001;
        assert!(c.validate().is_err());
        let mut c = SystemConfig::large_scale();
        c.zeta = 0;
        assert!(c.validate().is_err());
        let mut c = SystemConfig::large_scale();
        c.pdrs_len = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn alpha_rounding_and_noiseless() {
        let mut c = SystemConfig::large_scale();
        c.set_alpha(2.0);
        assert_eq!(c.zeta, 192);
        c.snr_db = f64::INFINITY;
        assert_eq!(c.sigma2(), 0.0);
    }

    #[test]
    fn displacement_shortens_data() {
        let mut c = SystemConfig::large_scale();
        assert_eq!(c.data_symbols(), 240);
        c.pdrs_displaces_data = true;
        assert_eq!(c.data_symbols(), 236);
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("Gaussian".parse::<PdrsMode>().unwrap(), PdrsMode::Gaussian);
        assert_eq!("orthogonal-reuse".parse::<PdrsMode>().unwrap(), PdrsMode::OrthogonalReuse);
        assert!("dft".parse::<PdrsMode>().is_err());
    }
}
