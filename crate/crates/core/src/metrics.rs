//! Per-trial detection and link metrics, and the complexity ledger.
//!
//! Complexity is counted in complex multiplications. The closed-form model
//! charges an `(a×b)·(b×c)` product `a·b·c` and the pseudo-inverse of an
//! `a×b` matrix (`a ≥ b`) `c_svd·a·b² + b³`. Measured counts come from the
//! instrumented kernels in [`crate::numerics::MulCounter`].

use std::time::{Duration, Instant};

use crate::combining::WeightMatrix;
use crate::detectors::{detect_bomp_counted, detect_fpr_counted, oracle_support, DetectionResult, DetectorKind};
use crate::error::Result;
use crate::numerics::{CMatrix, Complex64, MulCounter, RMatrix};
use crate::scenario::{ActivityPattern, PdrsCodebook, PilotPool, ReceivedFrame, SystemConfig};

/// Post-SINR reported when interference and noise vanish.
pub const SINR_CAP_DB: f64 = 300.0;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrialMetrics {
    pub true_pos: usize,
    pub false_pos: usize,
    pub miss: usize,
    /// `miss / K`; zero when `K = 0`.
    pub per_user_miss_rate: f64,
    pub symbol_errors: u64,
    pub symbols: u64,
    /// Symbol error rate over true positives.
    pub ser: f64,
    pub post_sinr_db: Vec<f64>,
    /// Complex multiplications spent on detection.
    pub mult_count: u64,
    /// Complex multiplications spent on data combining.
    pub combining_mults: u64,
    pub real_mults: u64,
}

impl TrialMetrics {
    pub fn active_users(&self) -> usize {
        self.true_pos + self.miss
    }

    pub fn detected(&self) -> usize {
        self.true_pos + self.false_pos
    }
}

/// True positives, false positives and misses of `result` against the truth.
pub fn detection_metrics(result: &DetectionResult, ground_truth: &ActivityPattern) -> TrialMetrics {
    let true_pos = result.support.iter().filter(|&&i| ground_truth.contains(i)).count();
    let false_pos = result.support.len() - true_pos;
    let k = ground_truth.count();
    let miss = k - true_pos;
    TrialMetrics {
        true_pos,
        false_pos,
        miss,
        per_user_miss_rate: if k == 0 { 0.0 } else { miss as f64 / k as f64 },
        mult_count: result.mult_count,
        real_mults: result.real_mult_count,
        ..Default::default()
    }
}

fn to_db(num: f64, den: f64) -> f64 {
    if den <= 0.0 {
        return if num > 0.0 { SINR_CAP_DB } else { -SINR_CAP_DB };
    }
    let r = num / den;
    if r <= 0.0 {
        -SINR_CAP_DB
    } else {
        (10.0 * r.log10()).clamp(-SINR_CAP_DB, SINR_CAP_DB)
    }
}

fn dot(w: &[Complex64], h: &[Complex64]) -> Complex64 {
    w.iter().zip(h).map(|(a, b)| a * b).sum()
}

/// Post-combining SINR in dB for every weight row whose pilot is active:
/// `|w_n h_n|² / (Σ_{j≠n} |w_n h_j|² + σ²‖w_n‖²)`.
pub fn post_sinr(w: &WeightMatrix, h: &CMatrix, active: &[usize], sigma2: f64) -> Vec<f64> {
    let cols: Vec<(usize, Vec<Complex64>)> = active.iter().map(|&j| (j, h.col(j))).collect();
    let mut out = Vec::new();
    for (r, &n) in w.index_map.iter().enumerate() {
        let Some(own) = cols.iter().find(|(j, _)| *j == n) else {
            continue;
        };
        let wn = w.w.row(r);
        let signal = dot(wn, &own.1).norm_sqr();
        let interference: f64 = cols
            .iter()
            .filter(|(j, _)| *j != n)
            .map(|(_, hj)| dot(wn, hj).norm_sqr())
            .sum();
        let noise = sigma2 * wn.iter().map(|z| z.norm_sqr()).sum::<f64>();
        out.push(to_db(signal, interference + noise));
    }
    out
}

/// Closed-form cost for one frame.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ModeledCost {
    /// Complex multiplications for detection.
    pub detection: u64,
    /// Real multiplications for applying a stored matrix (FPR).
    pub real: u64,
    /// Complex multiplications for the data-combining weights and `W·Y_D`.
    pub combining: u64,
}

fn pinv_cost(c_svd: f64, a: usize, b: usize) -> u64 {
    MulCounter::pinv_charge(c_svd, a, b)
}

/// Data-combining weights used after detection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Combiner {
    /// `W = P_det · Y⁺`.
    Dwe,
    /// `W = (Y · P_det⁺)⁺`.
    LsZf,
}

impl Combiner {
    pub fn name(self) -> &'static str {
        match self {
            Combiner::Dwe => "dwe",
            Combiner::LsZf => "lszf",
        }
    }

    pub fn default_for(kind: DetectorKind) -> Self {
        match kind {
            DetectorKind::Pdrs => Combiner::Dwe,
            _ => Combiner::LsZf,
        }
    }
}

/// Cost of the combining stage with `detected` rows; zero when there is no data.
pub fn combining_model(cfg: &SystemConfig, combiner: Combiner, detected: usize, y_pinv_known: bool) -> u64 {
    let (m, l, d) = (cfg.antennas, cfg.pilot_len, cfg.data_symbols());
    if d == 0 || detected == 0 {
        return 0;
    }
    let apply = (detected * m * d) as u64;
    let c = cfg.svd_cost;
    let weights = match combiner {
        Combiner::Dwe => {
            let base = (detected * l * m) as u64;
            if y_pinv_known {
                base
            } else {
                base + pinv_cost(c, m, l)
            }
        }
        Combiner::LsZf => pinv_cost(c, detected, l) + (m * l * detected) as u64 + pinv_cost(c, m, detected),
    };
    weights + apply
}

/// Closed-form multiplication count for one frame.
pub fn complexity_model(cfg: &SystemConfig, detector: DetectorKind) -> ModeledCost {
    let (m, n, l, r, z) = (cfg.antennas, cfg.pool_size, cfg.pilot_len, cfg.pdrs_len, cfg.zeta);
    let c = cfg.svd_cost;
    let combiner = Combiner::default_for(detector);
    let detected = if detector == DetectorKind::Oracle { cfg.active_users } else { z };
    let combining = combining_model(cfg, combiner, detected, detector == DetectorKind::Pdrs);
    match detector {
        DetectorKind::Bomp => {
            let mut total = 0u64;
            for t in 1..=z {
                total += (n * l * m) as u64;
                total += pinv_cost(c, l, t) + 2 * (t * l * m) as u64;
            }
            ModeledCost {
                detection: total,
                real: 0,
                combining,
            }
        }
        DetectorKind::Fpr => ModeledCost {
            detection: (n * m * l + m * n) as u64,
            real: (n * n) as u64,
            combining,
        },
        DetectorKind::Pdrs => ModeledCost {
            detection: pinv_cost(c, m, l) + (l * m * r + n * l * r) as u64,
            real: 0,
            combining,
        },
        DetectorKind::Oracle => ModeledCost {
            detection: 0,
            real: 0,
            combining,
        },
    }
}

/// `BOMP`'s correlation term alone, `ζ·N·L·M`.
pub fn bomp_correlation_model(cfg: &SystemConfig) -> u64 {
    (cfg.zeta * cfg.pool_size * cfg.pilot_len * cfg.antennas) as u64
}

/// Grant-based normalizer `K³`.
pub fn grant_based_normalizer(cfg: &SystemConfig) -> u64 {
    (cfg.active_users as u64).pow(3)
}

/// One detector's modeled and measured cost at one configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexityLedger {
    pub detector: DetectorKind,
    pub counted: u64,
    pub modeled: u64,
    pub counted_real: u64,
    pub modeled_real: u64,
    pub combining_counted: u64,
    pub combining_modeled: u64,
    pub normalizer: u64,
    pub wall_clock: Duration,
}

impl ComplexityLedger {
    /// `|counted − modeled| / modeled`; zero when both vanish.
    pub fn model_error(&self) -> f64 {
        if self.modeled == 0 {
            return if self.counted == 0 { 0.0 } else { f64::INFINITY };
        }
        (self.counted as f64 - self.modeled as f64).abs() / self.modeled as f64
    }

    pub fn normalized_counted(&self) -> f64 {
        self.counted as f64 / self.normalizer as f64
    }

    pub fn normalized_modeled(&self) -> f64 {
        self.modeled as f64 / self.normalizer as f64
    }
}

/// Runs each detector once on `frame` with counting enabled, then the
/// detector's default data combiner, and pairs the counts with the model.
pub fn complexity_measured(
    cfg: &SystemConfig,
    frame: &ReceivedFrame,
    pool: &PilotPool,
    codebook: &PdrsCodebook,
    g_pinv: Option<&RMatrix>,
    detectors: &[DetectorKind],
) -> Result<Vec<ComplexityLedger>> {
    let mut out = Vec::with_capacity(detectors.len());
    for &kind in detectors {
        let mut ctr = MulCounter::new(cfg.svd_cost);
        let t0 = Instant::now();
        let (result, y_pinv) = match kind {
            DetectorKind::Pdrs => {
                let o = crate::detectors::detect_pdrs_dwe_full(frame, pool, codebook, cfg.zeta, &mut ctr)?;
                (o.result, Some(o.y_pinv))
            }
            DetectorKind::Bomp => (detect_bomp_counted(frame, pool, cfg.zeta, &mut ctr)?, None),
            DetectorKind::Fpr => {
                let owned;
                let g = match g_pinv {
                    Some(g) => g,
                    None => {
                        owned = crate::detectors::fpr_gram_pinv(pool)?;
                        &owned
                    }
                };
                (detect_fpr_counted(frame, pool, cfg.zeta, g, &mut ctr)?, None)
            }
            DetectorKind::Oracle => (oracle_support(frame), None),
        };
        let wall_clock = t0.elapsed();
        let mut comb = MulCounter::new(cfg.svd_cost);
        crate::harness::combine_and_demod(
            frame,
            pool,
            &result.support,
            Combiner::default_for(kind),
            y_pinv.as_ref(),
            &mut comb,
        )?;
        let model = complexity_model(cfg, kind);
        out.push(ComplexityLedger {
            detector: kind,
            counted: result.mult_count,
            modeled: model.detection,
            counted_real: result.real_mult_count,
            modeled_real: model.real,
            combining_counted: comb.complex(),
            combining_modeled: model.combining,
            normalizer: grant_based_normalizer(cfg),
            wall_clock,
        });
    }
    Ok(out)
}

/// Binomial standard error of a miss rate from `trials · k` samples.
pub fn miss_rate_standard_error(p: f64, trials: u64, k: usize) -> f64 {
    let n = trials as f64 * k as f64;
    if n <= 0.0 {
        return f64::INFINITY;
    }
    (p * (1.0 - p) / n).sqrt()
}

/// Rates whose standard error exceeds half the estimate are withheld.
pub fn reportable_rate(p: f64, trials: u64, k: usize) -> Option<f64> {
    let se = miss_rate_standard_error(p, trials, k);
    if se <= 0.5 * p || p == 0.0 && se == 0.0 {
        Some(p)
    } else {
        None
    }
}

/// Order-stable accumulation of [`TrialMetrics`]. Counts are integers; the
/// SINR sum is a float, so callers fold trials in trial order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MetricsSummary {
    pub trials: u64,
    pub true_pos: u64,
    pub false_pos: u64,
    pub miss: u64,
    pub symbol_errors: u64,
    pub symbols: u64,
    pub sinr_sum_db: f64,
    pub sinr_count: u64,
    pub mult_count: u64,
    pub combining_mults: u64,
    pub real_mults: u64,
}

impl MetricsSummary {
    pub fn push(&mut self, t: &TrialMetrics) {
        self.trials += 1;
        self.true_pos += t.true_pos as u64;
        self.false_pos += t.false_pos as u64;
        self.miss += t.miss as u64;
        self.symbol_errors += t.symbol_errors;
        self.symbols += t.symbols;
        for &s in &t.post_sinr_db {
            self.sinr_sum_db += s;
        }
        self.sinr_count += t.post_sinr_db.len() as u64;
        self.mult_count += t.mult_count;
        self.combining_mults += t.combining_mults;
        self.real_mults += t.real_mults;
    }

    pub fn active_samples(&self) -> u64 {
        self.true_pos + self.miss
    }

    pub fn miss_rate(&self) -> f64 {
        let n = self.active_samples();
        if n == 0 {
            0.0
        } else {
            self.miss as f64 / n as f64
        }
    }

    /// False positives per declared slot.
    pub fn false_pos_rate(&self) -> f64 {
        let n = self.true_pos + self.false_pos;
        if n == 0 {
            0.0
        } else {
            self.false_pos as f64 / n as f64
        }
    }

    pub fn ser(&self) -> f64 {
        if self.symbols == 0 {
            0.0
        } else {
            self.symbol_errors as f64 / self.symbols as f64
        }
    }

    pub fn mean_post_sinr_db(&self) -> f64 {
        if self.sinr_count == 0 {
            f64::NAN
        } else {
            self.sinr_sum_db / self.sinr_count as f64
        }
    }

    /// Mean detection multiplications per trial, rounded.
    pub fn mean_mults(&self) -> u64 {
        if self.trials == 0 {
            0
        } else {
            (self.mult_count as f64 / self.trials as f64).round() as u64
        }
    }

    pub fn miss_standard_error(&self) -> f64 {
        let n = self.active_samples() as f64;
        if n == 0.0 {
            return f64::INFINITY;
        }
        let p = self.miss_rate();
        (p * (1.0 - p) / n).sqrt()
    }
}
