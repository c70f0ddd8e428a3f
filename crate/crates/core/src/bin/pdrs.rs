use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pdrs_core::detectors::{detect_bomp, detect_fpr, detect_pdrs_dwe, fpr_gram_pinv, oracle_support, DetectorKind};
use pdrs_core::harness::{
    complexity_report, emit_complexity_csv, emit_csv, load_config, parse_detector_list, parse_snr, run_lemma_checks,
    run_sweep, PointContext, SweepSpec, SweepVar,
};
use pdrs_core::metrics::detection_metrics;
use pdrs_core::scenario::{read_frame, write_frame, SystemConfig};
use pdrs_core::{Error, Result};

#[derive(Parser)]
#[command(name = "pdrs", version, about = "Grant-free massive-MIMO activity detection simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte-Carlo sweep over one system parameter, written as CSV.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        /// snr_db, K, l or alpha.
        #[arg(long, default_value = "snr_db")]
        var: String,
        /// Comma-separated values, e.g. `0,2,4` or `inf`.
        #[arg(long)]
        values: String,
        /// Comma-separated detectors, each optionally `+dwe` or `+lszf`.
        #[arg(long, default_value = "pdrs,bomp,fpr,oracle")]
        detectors: String,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output CSV; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs one detector on a stored frame.
    Detect {
        #[arg(long)]
        frame: PathBuf,
        #[arg(long, default_value = "pdrs")]
        detector: String,
        /// Support size; defaults to the frame's active count.
        #[arg(long)]
        zeta: Option<usize>,
    },
    /// Modeled and counted multiplications per detector.
    Complexity {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Randomized pseudo-inverse and DWE / LS+ZF equivalence checks.
    LemmaCheck {
        /// Cases per suite (defaults: 200 Moore-Penrose, 100 otherwise).
        #[arg(long)]
        iterations: Option<usize>,
        /// Overrides every suite tolerance.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Writes trial 0 of a configuration as a frame file.
    GenFrame {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn config_or_default(path: Option<&PathBuf>) -> Result<SystemConfig> {
    match path {
        Some(p) => load_config(p),
        None => Ok(SystemConfig::large_scale()),
    }
}

fn output(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn parse_values(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| parse_snr(t).ok_or_else(|| Error::InvalidArgument(format!("bad sweep value '{t}'"))))
        .collect()
}

fn sweep(
    config: Option<PathBuf>,
    var: &str,
    values: &str,
    detectors: &str,
    trials: Option<u64>,
    seed: Option<u64>,
    out: Option<PathBuf>,
) -> Result<bool> {
    let mut base = config_or_default(config.as_ref())?;
    if let Some(t) = trials {
        base.trials = t;
    }
    if let Some(s) = seed {
        base.seed = s;
    }
    let spec = SweepSpec {
        variable: var.parse::<SweepVar>()?,
        values: parse_values(values)?,
        base,
        detectors: parse_detector_list(detectors)?,
    };
    let rows = run_sweep(&spec)?;
    let mut ok = true;
    for r in &rows {
        if let Some(e) = &r.error {
            eprintln!("{}={} {}: {e}", r.sweep_var, r.sweep_value, r.detector);
            ok = false;
        }
    }
    emit_csv(&rows, output(out.as_ref())?)?;
    Ok(ok)
}

fn detect(frame: PathBuf, detector: &str, zeta: Option<usize>) -> Result<bool> {
    let file = read_frame(frame)?;
    let kind: DetectorKind = detector.parse()?;
    let zeta = zeta.unwrap_or(file.frame.ground_truth.count());
    let result = match kind {
        DetectorKind::Pdrs => detect_pdrs_dwe(&file.frame, &file.pool, &file.codebook, zeta)?,
        DetectorKind::Bomp => detect_bomp(&file.frame, &file.pool, zeta)?,
        DetectorKind::Fpr => detect_fpr(&file.frame, &file.pool, zeta, &fpr_gram_pinv(&file.pool)?)?,
        DetectorKind::Oracle => oracle_support(&file.frame),
    };
    let m = detection_metrics(&result, &file.frame.ground_truth);
    let mut out = io::stdout().lock();
    writeln!(out, "rank,index,score,active")?;
    for (r, (&i, &s)) in result.support.iter().zip(&result.scores).enumerate() {
        writeln!(out, "{r},{i},{s:e},{}", file.frame.ground_truth.contains(i))?;
    }
    eprintln!(
        "{kind}: zeta={zeta} true_pos={} false_pos={} miss={} mults={}",
        m.true_pos, m.false_pos, m.miss, result.mult_count
    );
    Ok(true)
}

fn complexity(config: Option<PathBuf>, out: Option<PathBuf>) -> Result<bool> {
    let cfg = config_or_default(config.as_ref())?;
    let ledgers = complexity_report(&cfg, &DetectorKind::ALL)?;
    for l in &ledgers {
        eprintln!(
            "{:>6}: modeled {:>12} counted {:>12} (err {:.2}%)  /K^3 {:.3}  combining {:>10}",
            l.detector.name(),
            l.modeled,
            l.counted,
            100.0 * l.model_error(),
            l.normalized_modeled(),
            l.combining_modeled
        );
    }
    emit_complexity_csv(&ledgers, output(out.as_ref())?)?;
    Ok(true)
}

fn lemma_check(iterations: Option<usize>, tol: Option<f64>, seed: u64) -> Result<bool> {
    let report = run_lemma_checks(iterations, tol, seed)?;
    for c in &report.checks {
        println!(
            "{} {:<22} cases={:<4} max_err={:.3e} tol={:.0e} {:?}",
            if c.passed() { "PASS" } else { "FAIL" },
            c.name,
            c.cases,
            c.max_err,
            c.tol,
            c.elapsed
        );
    }
    Ok(report.all_passed())
}

fn gen_frame(config: Option<PathBuf>, out: PathBuf) -> Result<bool> {
    let cfg = config_or_default(config.as_ref())?;
    let ctx = PointContext::new(&cfg, false)?;
    write_frame(out, &ctx.frame(0)?, &ctx.pool, &ctx.codebook)?;
    Ok(true)
}

fn main() -> ExitCode {
    let res = match Cli::parse().command {
        Command::Sweep {
            config,
            var,
            values,
            detectors,
            trials,
            seed,
            out,
        } => sweep(config, &var, &values, &detectors, trials, seed, out),
        Command::Detect { frame, detector, zeta } => detect(frame, &detector, zeta),
        Command::Complexity { config, out } => complexity(config, out),
        Command::LemmaCheck { iterations, tol, seed } => lemma_check(iterations, tol, seed),
        Command::GenFrame { config, out } => gen_frame(config, out),
    };
    match res {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
