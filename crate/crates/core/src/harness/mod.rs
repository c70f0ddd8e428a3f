//! Monte-Carlo trial runner, sweeps and report emission.
//!
//! Randomness layout, all keyed by `cfg.seed`:
//!
//! * stream `POOL_STREAM` draws the pilot pool, `CODEBOOK_STREAM` the PDRS
//!   codebook (once per sweep point);
//! * stream `t` draws activity, channel, data and noise of trial `t`;
//! * with `resample_pool`, trial `t` draws its own pool and codebook from
//!   streams `RESAMPLE_BASE | 2t` and `RESAMPLE_BASE | 2t + 1`.
//!
//! Trials run on a rayon pool (capped by `PDRS_THREADS`) and their metrics
//! are folded in trial order, so every reported number except wall-clock
//! time is independent of the worker count.

mod config_file;
mod lemma;
mod report;

pub use config_file::{load_config, parse_config, parse_snr, to_config_text};
pub use lemma::{
    lemma1_suite, lemma2_suite, left_inverse_suite, moore_penrose_error, moore_penrose_suite, product_pinv_suite,
    run_lemma_checks, LemmaCheck, LemmaSuiteReport,
};
pub use report::{complexity_report, emit_complexity_csv, emit_csv, format_sig6, read_csv, CSV_HEADER};

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::combining::{combine, decide_all, dwe_weights_from_pinv, lszf_weights_counted, WeightMatrix};
use crate::detectors::{
    detect_bomp_counted, detect_fpr_counted, detect_pdrs_dwe_full, fpr_gram_pinv, oracle_support, DetectionResult,
    DetectorKind,
};
use crate::error::{Error, Result};
use crate::metrics::{complexity_model, detection_metrics, post_sinr, reportable_rate, Combiner, MetricsSummary, TrialMetrics};
use crate::numerics::{CMatrix, MulCounter, RMatrix, RngStream};
use crate::scenario::{
    assemble_frame, gen_pdrs_codebook, gen_pilot_pool, sample_activity, PdrsCodebook, PilotPool, ReceivedFrame,
    SystemConfig,
};

pub const POOL_STREAM: u64 = u64::MAX;
pub const CODEBOOK_STREAM: u64 = u64::MAX - 1;
pub const RESAMPLE_BASE: u64 = 1 << 63;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "PDRS_THREADS";

/// A detector paired with the combiner used on its detected set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DetectorSpec {
    pub kind: DetectorKind,
    pub combiner: Combiner,
}

impl DetectorSpec {
    pub fn new(kind: DetectorKind) -> Self {
        Self {
            kind,
            combiner: Combiner::default_for(kind),
        }
    }

    pub fn with_combiner(kind: DetectorKind, combiner: Combiner) -> Self {
        Self { kind, combiner }
    }
}

impl fmt::Display for DetectorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.combiner == Combiner::default_for(self.kind) {
            write!(f, "{}", self.kind)
        } else {
            write!(f, "{}+{}", self.kind, self.combiner.name())
        }
    }
}

impl FromStr for DetectorSpec {
    type Err = Error;

    /// `pdrs`, `bomp`, `fpr`, `oracle`, optionally suffixed `+dwe` or `+lszf`.
    fn from_str(s: &str) -> Result<Self> {
        let (det, comb) = match s.split_once('+') {
            Some((d, c)) => (d, Some(c)),
            None => (s, None),
        };
        let kind: DetectorKind = det.parse()?;
        let combiner = match comb.map(|c| c.trim().to_ascii_lowercase()) {
            None => Combiner::default_for(kind),
            Some(c) if c == "dwe" => Combiner::Dwe,
            Some(c) if c == "lszf" || c == "ls+zf" || c == "ls-zf" => Combiner::LsZf,
            Some(c) => return Err(Error::InvalidArgument(format!("unknown combiner '{c}'"))),
        };
        Ok(Self { kind, combiner })
    }
}

pub fn parse_detector_list(s: &str) -> Result<Vec<DetectorSpec>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(str::parse)
        .collect()
}

/// Pool, codebook and (when FPR runs) its stored matrix for one sweep point.
#[derive(Clone, Debug)]
pub struct PointContext {
    pub cfg: SystemConfig,
    pub pool: PilotPool,
    pub codebook: PdrsCodebook,
    pub g_pinv: Option<RMatrix>,
}

impl PointContext {
    pub fn new(cfg: &SystemConfig, with_fpr: bool) -> Result<Self> {
        cfg.validate()?;
        let pool = gen_pilot_pool(cfg, &mut RngStream::new(cfg.seed, POOL_STREAM))?;
        let codebook = gen_pdrs_codebook(cfg, &mut RngStream::new(cfg.seed, CODEBOOK_STREAM))?;
        let g_pinv = if with_fpr { Some(fpr_gram_pinv(&pool)?) } else { None };
        Ok(Self {
            cfg: cfg.clone(),
            pool,
            codebook,
            g_pinv,
        })
    }

    fn for_trial(&self, trial_index: u64, with_fpr: bool) -> Result<std::borrow::Cow<'_, Self>> {
        if !self.cfg.resample_pool {
            return Ok(std::borrow::Cow::Borrowed(self));
        }
        let cfg = &self.cfg;
        let pool = gen_pilot_pool(cfg, &mut RngStream::new(cfg.seed, RESAMPLE_BASE | (2 * trial_index)))?;
        let codebook = gen_pdrs_codebook(cfg, &mut RngStream::new(cfg.seed, RESAMPLE_BASE | (2 * trial_index + 1)))?;
        let g_pinv = if with_fpr { Some(fpr_gram_pinv(&pool)?) } else { None };
        Ok(std::borrow::Cow::Owned(Self {
            cfg: cfg.clone(),
            pool,
            codebook,
            g_pinv,
        }))
    }

    /// The frame of trial `trial_index`.
    pub fn frame(&self, trial_index: u64) -> Result<ReceivedFrame> {
        let mut rng = RngStream::new(self.cfg.seed, trial_index);
        let activity = sample_activity(&self.cfg, &mut rng)?;
        assemble_frame(&self.cfg, &self.pool, &self.codebook, &activity, &mut rng)
    }
}

/// Combining weights and hard decisions for the detected set; `None` when
/// there is no data segment or nothing was detected.
pub fn combine_and_demod(
    frame: &ReceivedFrame,
    pool: &PilotPool,
    support: &[usize],
    combiner: Combiner,
    y_pinv: Option<&CMatrix>,
    ctr: &mut MulCounter,
) -> Result<Option<(WeightMatrix, CMatrix)>> {
    if frame.y_d.cols() == 0 || support.is_empty() {
        return Ok(None);
    }
    let rows = pool.rows(support);
    let w = match combiner {
        Combiner::Dwe => {
            let owned;
            let yp = match y_pinv {
                Some(p) => p,
                None => {
                    owned = ctr.pinv(&frame.y)?;
                    &owned
                }
            };
            dwe_weights_from_pinv(yp, &rows, support, ctr)?
        }
        Combiner::LsZf => lszf_weights_counted(&frame.y, &rows, support, ctr)?,
    };
    let soft = combine(&w, &frame.y_d, ctr)?;
    Ok(Some((w, decide_all(&soft))))
}

fn run_detector(
    spec: DetectorSpec,
    ctx: &PointContext,
    frame: &ReceivedFrame,
    ctr: &mut MulCounter,
) -> Result<(DetectionResult, Option<CMatrix>)> {
    let cfg = &ctx.cfg;
    Ok(match spec.kind {
        DetectorKind::Pdrs => {
            let o = detect_pdrs_dwe_full(frame, &ctx.pool, &ctx.codebook, cfg.zeta, ctr)?;
            (o.result, Some(o.y_pinv))
        }
        DetectorKind::Bomp => (detect_bomp_counted(frame, &ctx.pool, cfg.zeta, ctr)?, None),
        DetectorKind::Fpr => {
            let g = ctx
                .g_pinv
                .as_ref()
                .ok_or_else(|| Error::InvalidArgument("FPR requested without its stored matrix".into()))?;
            (detect_fpr_counted(frame, &ctx.pool, cfg.zeta, g, ctr)?, None)
        }
        DetectorKind::Oracle => (oracle_support(frame), None),
    })
}

/// Detection, combining and demodulation metrics for one detector on one frame.
pub fn evaluate_detector(
    spec: DetectorSpec,
    ctx: &PointContext,
    frame: &ReceivedFrame,
) -> Result<(TrialMetrics, Duration)> {
    let mut ctr = MulCounter::new(ctx.cfg.svd_cost);
    let t0 = Instant::now();
    let (result, y_pinv) = run_detector(spec, ctx, frame, &mut ctr)?;
    let elapsed = t0.elapsed();
    let mut metrics = detection_metrics(&result, &frame.ground_truth);

    let mut comb = MulCounter::new(ctx.cfg.svd_cost);
    let combined = combine_and_demod(frame, &ctx.pool, &result.support, spec.combiner, y_pinv.as_ref(), &mut comb)?;
    metrics.combining_mults = comb.complex();
    if let (Some((w, decisions)), Some(truth)) = (combined, frame.truth.as_ref()) {
        let active = frame.ground_truth.active();
        for (r, &idx) in w.index_map.iter().enumerate() {
            let Ok(pos) = active.binary_search(&idx) else {
                continue;
            };
            let sent = truth.x_d.row(pos);
            let got = decisions.row(r);
            metrics.symbols += sent.len() as u64;
            metrics.symbol_errors += sent.iter().zip(got).filter(|(a, b)| a != b).count() as u64;
        }
        metrics.ser = if metrics.symbols == 0 {
            0.0
        } else {
            metrics.symbol_errors as f64 / metrics.symbols as f64
        };
        metrics.post_sinr_db = post_sinr(&w, &truth.h, active, frame.sigma2);
    }
    Ok((metrics, elapsed))
}

fn run_trial_timed(
    ctx: &PointContext,
    detectors: &[DetectorSpec],
    trial_index: u64,
) -> Result<Vec<(TrialMetrics, Duration)>> {
    let with_fpr = detectors.iter().any(|d| d.kind == DetectorKind::Fpr);
    let local = ctx.for_trial(trial_index, with_fpr)?;
    let frame = local.frame(trial_index)?;
    detectors
        .iter()
        .map(|&d| evaluate_detector(d, &local, &frame))
        .collect()
}

/// Runs trial `trial_index`: one fresh frame, every requested detector.
pub fn run_trial(ctx: &PointContext, detectors: &[DetectorSpec], trial_index: u64) -> Result<Vec<TrialMetrics>> {
    run_trial_timed(ctx, detectors, trial_index)
        .map(|v| v.into_iter().map(|(m, _)| m).collect())
        .map_err(|e| Error::Trial {
            index: trial_index,
            source: Box::new(e),
        })
}

/// Worker count: available parallelism, capped by `PDRS_THREADS` if set.
pub fn worker_threads() -> usize {
    let avail = std::thread::available_parallelism().map_or(1, |n| n.get());
    match std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        Some(n) if n >= 1 => n,
        _ => avail,
    }
}

/// Per-detector aggregates over trials `0..trials` at one point.
#[derive(Clone, Debug)]
pub struct PointOutcome {
    pub summaries: Vec<MetricsSummary>,
    pub wall_clock: Vec<Duration>,
}

/// Runs `trials` trials in parallel and folds them in trial order.
pub fn run_point(ctx: &PointContext, detectors: &[DetectorSpec], trials: u64, threads: usize) -> Result<PointOutcome> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let per_trial: Vec<Result<Vec<(TrialMetrics, Duration)>>> = pool.install(|| {
        (0..trials)
            .into_par_iter()
            .map(|t| {
                run_trial_timed(ctx, detectors, t).map_err(|e| Error::Trial {
                    index: t,
                    source: Box::new(e),
                })
            })
            .collect()
    });
    let mut summaries = vec![MetricsSummary::default(); detectors.len()];
    let mut wall_clock = vec![Duration::ZERO; detectors.len()];
    for trial in per_trial {
        for (i, (m, d)) in trial?.into_iter().enumerate() {
            summaries[i].push(&m);
            wall_clock[i] += d;
        }
    }
    Ok(PointOutcome { summaries, wall_clock })
}

/// DWE against LS+ZF combining on the same detected set of one trial.
#[derive(Clone, Debug, PartialEq)]
pub struct CombinerAgreement {
    pub support_len: usize,
    /// `‖W_lszf − W_dwe‖_F / ‖W_dwe‖_F`.
    pub weight_rel_diff: f64,
    pub symbols: u64,
    /// Hard decisions that differ between the two combiners.
    pub differing: u64,
    /// Largest distance to a decision boundary among differing symbols.
    pub max_differing_boundary_distance: f64,
    pub ser_dwe: f64,
    pub ser_lszf: f64,
}

/// Runs `detector` on trial `trial_index`, then both combiners on its support.
pub fn combiner_agreement(ctx: &PointContext, detector: DetectorKind, trial_index: u64) -> Result<CombinerAgreement> {
    let frame = ctx.frame(trial_index)?;
    let mut ctr = MulCounter::new(ctx.cfg.svd_cost);
    let (result, _) = run_detector(DetectorSpec::new(detector), ctx, &frame, &mut ctr)?;
    let support = &result.support;
    let rows = ctx.pool.rows(support);
    let dwe = crate::combining::dwe_weights(&frame.y, &rows, support)?;
    let lszf = crate::combining::lszf_weights(&frame.y, &rows, support)?;
    let soft_dwe = combine(&dwe, &frame.y_d, &mut ctr)?;
    let soft_lszf = combine(&lszf, &frame.y_d, &mut ctr)?;
    let (dec_dwe, dec_lszf) = (decide_all(&soft_dwe), decide_all(&soft_lszf));

    let mut out = CombinerAgreement {
        support_len: support.len(),
        weight_rel_diff: lszf.w.sub(&dwe.w).frobenius_norm() / dwe.w.frobenius_norm(),
        symbols: soft_dwe.as_slice().len() as u64,
        differing: 0,
        max_differing_boundary_distance: 0.0,
        ser_dwe: 0.0,
        ser_lszf: 0.0,
    };
    for (i, (a, b)) in dec_dwe.as_slice().iter().zip(dec_lszf.as_slice()).enumerate() {
        if a != b {
            out.differing += 1;
            let d = crate::qpsk::boundary_distance(soft_dwe.as_slice()[i])
                .max(crate::qpsk::boundary_distance(soft_lszf.as_slice()[i]));
            out.max_differing_boundary_distance = out.max_differing_boundary_distance.max(d);
        }
    }
    if let Some(truth) = frame.truth.as_ref() {
        let active = frame.ground_truth.active();
        let (mut n, mut e_dwe, mut e_lszf) = (0u64, 0u64, 0u64);
        for (r, idx) in support.iter().enumerate() {
            let Ok(pos) = active.binary_search(idx) else {
                continue;
            };
            for (c, sent) in truth.x_d.row(pos).iter().enumerate() {
                n += 1;
                e_dwe += u64::from(dec_dwe[(r, c)] != *sent);
                e_lszf += u64::from(dec_lszf[(r, c)] != *sent);
            }
        }
        if n > 0 {
            out.ser_dwe = e_dwe as f64 / n as f64;
            out.ser_lszf = e_lszf as f64 / n as f64;
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepVar {
    SnrDb,
    K,
    PdrsLen,
    Alpha,
}

impl SweepVar {
    pub fn name(self) -> &'static str {
        match self {
            SweepVar::SnrDb => "snr_db",
            SweepVar::K => "K",
            SweepVar::PdrsLen => "l",
            SweepVar::Alpha => "alpha",
        }
    }

    /// `base` with this variable set to `value`. Sweeping `K` keeps `α`.
    pub fn apply(self, base: &SystemConfig, value: f64) -> Result<SystemConfig> {
        let mut cfg = base.clone();
        let as_count = |v: f64| -> Result<usize> {
            if v >= 0.0 && v.fract() == 0.0 && v.is_finite() {
                Ok(v as usize)
            } else {
                Err(Error::InvalidArgument(format!("{} needs a whole number, got {v}", self.name())))
            }
        };
        match self {
            SweepVar::SnrDb => cfg.snr_db = value,
            SweepVar::K => {
                let alpha = base.alpha();
                cfg.active_users = as_count(value)?;
                cfg.set_alpha(alpha);
            }
            SweepVar::PdrsLen => cfg.pdrs_len = as_count(value)?,
            SweepVar::Alpha => cfg.set_alpha(value),
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

impl FromStr for SweepVar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "snr_db" | "snr" => Ok(SweepVar::SnrDb),
            "K" | "k" => Ok(SweepVar::K),
            "l" => Ok(SweepVar::PdrsLen),
            "alpha" => Ok(SweepVar::Alpha),
            other => Err(Error::InvalidArgument(format!("unknown sweep variable '{other}'"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub variable: SweepVar,
    pub values: Vec<f64>,
    pub base: SystemConfig,
    pub detectors: Vec<DetectorSpec>,
}

impl SweepSpec {
    /// Checks the spec and returns the configuration of every point.
    pub fn point_configs(&self) -> Result<Vec<SystemConfig>> {
        if self.values.is_empty() {
            return Err(Error::InvalidArgument("sweep has no values".into()));
        }
        if self.detectors.is_empty() {
            return Err(Error::InvalidArgument("sweep has no detectors".into()));
        }
        self.values.iter().map(|&v| self.variable.apply(&self.base, v)).collect()
    }
}

/// One CSV row: a sweep point and detector.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub sweep_var: String,
    pub sweep_value: f64,
    pub snr_db: f64,
    pub k: usize,
    pub pilot_len: usize,
    pub pool_size: usize,
    pub antennas: usize,
    pub pdrs_len: usize,
    pub zeta: usize,
    pub detector: String,
    pub trials: u64,
    /// `None` when withheld by the standard-error gate or the point failed.
    pub miss_rate: Option<f64>,
    pub false_pos_rate: f64,
    pub ser: f64,
    pub mean_post_sinr_db: f64,
    pub modeled_mults: u64,
    pub counted_mults: u64,
    pub wall_clock_ms: f64,
    pub seed: u64,
    /// Miss rate before the standard-error gate.
    pub raw_miss_rate: f64,
    pub error: Option<String>,
}

impl ResultRow {
    fn skeleton(var: SweepVar, value: f64, cfg: &SystemConfig, det: DetectorSpec) -> Self {
        Self {
            sweep_var: var.name().to_string(),
            sweep_value: value,
            snr_db: cfg.snr_db,
            k: cfg.active_users,
            pilot_len: cfg.pilot_len,
            pool_size: cfg.pool_size,
            antennas: cfg.antennas,
            pdrs_len: cfg.pdrs_len,
            zeta: cfg.zeta,
            detector: det.to_string(),
            trials: cfg.trials,
            miss_rate: None,
            false_pos_rate: f64::NAN,
            ser: f64::NAN,
            mean_post_sinr_db: f64::NAN,
            modeled_mults: complexity_model(cfg, det.kind).detection,
            counted_mults: 0,
            wall_clock_ms: 0.0,
            seed: cfg.seed,
            raw_miss_rate: f64::NAN,
            error: None,
        }
    }
}

/// Runs every sweep point. Rows come out ordered by sweep value, then detector.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<ResultRow>> {
    run_sweep_with_threads(spec, worker_threads())
}

pub fn run_sweep_with_threads(spec: &SweepSpec, threads: usize) -> Result<Vec<ResultRow>> {
    let configs = spec.point_configs()?;
    let mut order: Vec<usize> = (0..spec.detectors.len()).collect();
    order.sort_by_key(|&i| spec.detectors[i].to_string());
    let with_fpr = spec.detectors.iter().any(|d| d.kind == DetectorKind::Fpr);

    let mut points: Vec<(f64, SystemConfig)> = spec.values.iter().copied().zip(configs).collect();
    points.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut rows = Vec::new();
    for (value, cfg) in points {
        let outcome = PointContext::new(&cfg, with_fpr).and_then(|ctx| run_point(&ctx, &spec.detectors, cfg.trials, threads));
        rows.extend(point_rows(spec.variable, value, &cfg, &spec.detectors, &order, &outcome));
    }
    Ok(rows)
}

/// Rows of one point; a failed point yields one diagnostic row per detector.
fn point_rows(
    var: SweepVar,
    value: f64,
    cfg: &SystemConfig,
    detectors: &[DetectorSpec],
    order: &[usize],
    outcome: &Result<PointOutcome>,
) -> Vec<ResultRow> {
    order
        .iter()
        .map(|&i| {
            let mut row = ResultRow::skeleton(var, value, cfg, detectors[i]);
            match outcome {
                Ok(o) => {
                    let s = &o.summaries[i];
                    row.raw_miss_rate = s.miss_rate();
                    row.miss_rate = reportable_rate(s.miss_rate(), s.trials, cfg.active_users);
                    row.false_pos_rate = s.false_pos_rate();
                    row.ser = s.ser();
                    row.mean_post_sinr_db = s.mean_post_sinr_db();
                    row.counted_mults = s.mean_mults();
                    row.wall_clock_ms = o.wall_clock[i].as_secs_f64() * 1e3;
                }
                Err(e) => row.error = Some(e.to_string()),
            }
            row
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detector_spec_parsing() {
        let v = parse_detector_list("pdrs, bomp,fpr+dwe,oracle+lszf, pdrs+lszf").unwrap();
        assert_eq!(v[0], DetectorSpec::new(DetectorKind::Pdrs));
        assert_eq!(v[2].combiner, Combiner::Dwe);
        assert_eq!(v[3].to_string(), "oracle");
        assert_eq!(v[4].to_string(), "pdrs+lszf");
        assert!(parse_detector_list("pdrs+mmse").is_err());
    }

    #[test]
    fn noiseless_small_trial_has_no_misses() {
        let mut cfg = SystemConfig::small(16, 32, 12, 8);
        cfg.data_len = 8;
        let ctx = PointContext::new(&cfg, false).unwrap();
        let m = run_trial(&ctx, &[DetectorSpec::new(DetectorKind::Pdrs)], 0).unwrap();
        assert_eq!(m[0].miss, 0);
        assert_eq!(m[0].symbol_errors, 0);
        assert_eq!(m[0].symbols, 8 * 8);
    }

    #[test]
    fn trial_is_deterministic() {
        let mut cfg = SystemConfig::small(16, 32, 12, 8);
        cfg.snr_db = 3.0;
        let ctx = PointContext::new(&cfg, true).unwrap();
        let dets = parse_detector_list("pdrs,bomp,fpr,oracle").unwrap();
        assert_eq!(run_trial(&ctx, &dets, 4).unwrap(), run_trial(&ctx, &dets, 4).unwrap());
    }

    #[test]
    fn empty_detector_list_rejected_up_front() {
        let spec = SweepSpec {
            variable: SweepVar::SnrDb,
            values: vec![0.0],
            base: SystemConfig::small(8, 12, 6, 3),
            detectors: vec![],
        };
        assert!(run_sweep(&spec).is_err());
    }

    #[test]
    fn sweep_var_application() {
        let mut base = SystemConfig::large_scale();
        base.set_alpha(2.0);
        let c = SweepVar::K.apply(&base, 48.0).unwrap();
        assert_eq!((c.active_users, c.zeta), (48, 96));
        let c = SweepVar::Alpha.apply(&base, 1.0).unwrap();
        assert_eq!(c.zeta, 96);
        assert!(SweepVar::PdrsLen.apply(&base, 1.5).is_err());
        assert_eq!(SweepVar::PdrsLen.apply(&base, 6.0).unwrap().pdrs_len, 6);
        assert_eq!("l".parse::<SweepVar>().unwrap(), SweepVar::PdrsLen);
    }

    #[test]
    fn data_free_frames_skip_combining() {
        let mut cfg = SystemConfig::small(16, 32, 12, 8);
        cfg.data_len = 0;
        let ctx = PointContext::new(&cfg, false).unwrap();
        let dets = parse_detector_list("pdrs,oracle").unwrap();
        for m in run_trial(&ctx, &dets, 1).unwrap() {
            assert_eq!(m.combining_mults, 0);
            assert_eq!(m.symbols, 0);
        }
    }

    #[test]
    fn combiners_agree_when_support_matches_pilot_length() {
        let mut cfg = SystemConfig::small(16, 24, 8, 8);
        cfg.snr_db = 5.0;
        let ctx = PointContext::new(&cfg, false).unwrap();
        let a = combiner_agreement(&ctx, DetectorKind::Oracle, 2).unwrap();
        assert!(a.weight_rel_diff < 1e-8, "{}", a.weight_rel_diff);
        assert_eq!(a.symbols, 8 * 16);
        assert_eq!(a.differing, 0);
        assert_eq!(a.ser_dwe, a.ser_lszf);
    }

    #[test]
    fn failed_point_gives_diagnostic_rows() {
        let cfg = SystemConfig::small(8, 12, 6, 3);
        let dets = parse_detector_list("pdrs,bomp").unwrap();
        let err = Err(Error::Trial {
            index: 4,
            source: Box::new(Error::Numerical("SVD failed".into())),
        });
        let rows = point_rows(SweepVar::SnrDb, 1.0, &cfg, &dets, &[1, 0], &err);
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].detector, "bomp");
        assert!(rows.iter().all(|r| r.miss_rate.is_none()));
        assert!(rows[0].error.as_deref().unwrap().contains("trial 4"));
        let mut buf = Vec::new();
        emit_csv(&rows, &mut buf).unwrap();
        let line = String::from_utf8(buf).unwrap().lines().nth(1).unwrap().to_string();
        assert!(line.contains(",bomp,10,,,,,"), "{line}");
    }

    #[test]
    fn resampled_pools_differ_per_trial() {
        let mut cfg = SystemConfig::small(8, 12, 6, 3);
        cfg.resample_pool = true;
        let ctx = PointContext::new(&cfg, false).unwrap();
        let a = ctx.for_trial(0, false).unwrap();
        let b = ctx.for_trial(1, false).unwrap();
        assert_ne!(a.pool, b.pool);
    }
}
