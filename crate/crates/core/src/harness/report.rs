//! CSV emission and the complexity report.

use std::io::{Read, Write};

use crate::detectors::DetectorKind;
use crate::error::{Error, Result};
use crate::metrics::{complexity_measured, ComplexityLedger};
use crate::scenario::SystemConfig;

use super::{PointContext, ResultRow};

pub const CSV_HEADER: [&str; 19] = [
    "sweep_var",
    "sweep_value",
    "snr_db",
    "K",
    "L",
    "N",
    "M",
    "l",
    "zeta",
    "detector",
    "trials",
    "miss_rate",
    "false_pos_rate",
    "ser",
    "mean_post_sinr_db",
    "modeled_mults",
    "counted_mults",
    "wall_clock_ms",
    "seed",
];

/// `%g` with six significant digits.
pub fn format_sig6(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    // Exponent after rounding to six digits.
    let sci = format!("{:.5e}", x);
    let (mant, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let mant = trim_zeros(mant);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mant}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn opt_cell(v: Option<f64>) -> String {
    v.map(format_sig6).unwrap_or_default()
}

/// Writes `rows` under [`CSV_HEADER`]. Withheld rates and every metric of a
/// failed point are empty cells.
pub fn emit_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        let failed = r.error.is_some();
        let metric = |v: f64| if failed { String::new() } else { format_sig6(v) };
        let record = [
            r.sweep_var.clone(),
            format_sig6(r.sweep_value),
            format_sig6(r.snr_db),
            r.k.to_string(),
            r.pilot_len.to_string(),
            r.pool_size.to_string(),
            r.antennas.to_string(),
            r.pdrs_len.to_string(),
            r.zeta.to_string(),
            r.detector.clone(),
            r.trials.to_string(),
            opt_cell(r.miss_rate),
            metric(r.false_pos_rate),
            metric(r.ser),
            metric(r.mean_post_sinr_db),
            r.modeled_mults.to_string(),
            if failed { String::new() } else { r.counted_mults.to_string() },
            metric(r.wall_clock_ms),
            r.seed.to_string(),
        ];
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, line: usize) -> Result<T> {
    let s = rec.get(i).unwrap_or("");
    s.parse()
        .map_err(|_| Error::Format(format!("row {line}: cannot parse '{s}' in column {}", CSV_HEADER[i])))
}

fn opt_field(rec: &csv::StringRecord, i: usize, line: usize) -> Result<Option<f64>> {
    if rec.get(i).unwrap_or("").is_empty() {
        Ok(None)
    } else {
        field(rec, i, line).map(Some)
    }
}

/// Parses a file written by [`emit_csv`]. Fields not stored in the CSV
/// (`raw_miss_rate`, `error`) come back as NaN and `None`; rows whose
/// metric cells are empty get `error = Some("")`.
pub fn read_csv<R: Read>(input: R) -> Result<Vec<ResultRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers()?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::Format("unexpected CSV header".into()));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let failed = rec.get(12).unwrap_or("").is_empty();
        let nan_if_empty = |c: usize| -> Result<f64> { Ok(opt_field(&rec, c, line)?.unwrap_or(f64::NAN)) };
        rows.push(ResultRow {
            sweep_var: rec.get(0).unwrap_or("").to_string(),
            sweep_value: field(&rec, 1, line)?,
            snr_db: field(&rec, 2, line)?,
            k: field(&rec, 3, line)?,
            pilot_len: field(&rec, 4, line)?,
            pool_size: field(&rec, 5, line)?,
            antennas: field(&rec, 6, line)?,
            pdrs_len: field(&rec, 7, line)?,
            zeta: field(&rec, 8, line)?,
            detector: rec.get(9).unwrap_or("").to_string(),
            trials: field(&rec, 10, line)?,
            miss_rate: opt_field(&rec, 11, line)?,
            false_pos_rate: nan_if_empty(12)?,
            ser: nan_if_empty(13)?,
            mean_post_sinr_db: nan_if_empty(14)?,
            modeled_mults: field(&rec, 15, line)?,
            counted_mults: opt_field(&rec, 16, line)?.map_or(0, |v| v as u64),
            wall_clock_ms: nan_if_empty(17)?,
            seed: field(&rec, 18, line)?,
            raw_miss_rate: f64::NAN,
            error: failed.then(String::new),
        });
    }
    Ok(rows)
}

/// Runs every detector once, with counting, on trial 0 of `cfg`.
pub fn complexity_report(cfg: &SystemConfig, detectors: &[DetectorKind]) -> Result<Vec<ComplexityLedger>> {
    let with_fpr = detectors.contains(&DetectorKind::Fpr);
    let ctx = PointContext::new(cfg, with_fpr)?;
    let frame = ctx.frame(0)?;
    complexity_measured(cfg, &frame, &ctx.pool, &ctx.codebook, ctx.g_pinv.as_ref(), detectors)
}

pub const COMPLEXITY_HEADER: [&str; 12] = [
    "detector",
    "modeled_mults",
    "counted_mults",
    "model_error",
    "modeled_real_mults",
    "counted_real_mults",
    "combining_modeled",
    "combining_counted",
    "normalizer_K3",
    "normalized_modeled",
    "normalized_counted",
    "wall_clock_ms",
];

pub fn emit_complexity_csv<W: Write>(ledgers: &[ComplexityLedger], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COMPLEXITY_HEADER)?;
    for l in ledgers {
        w.write_record([
            l.detector.name().to_string(),
            l.modeled.to_string(),
            l.counted.to_string(),
            format_sig6(l.model_error()),
            l.modeled_real.to_string(),
            l.counted_real.to_string(),
            l.combining_modeled.to_string(),
            l.combining_counted.to_string(),
            l.normalizer.to_string(),
            format_sig6(l.normalized_modeled()),
            format_sig6(l.normalized_counted()),
            format_sig6(l.wall_clock.as_secs_f64() * 1e3),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig6_matches_printf_g() {
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (0.5, "0.5"),
            (123456.0, "123456"),
            (1234567.0, "1.23457e+06"),
            (0.0001, "0.0001"),
            (0.00001234567, "1.23457e-05"),
            (-2.5, "-2.5"),
            (999999.7, "1e+06"),
            (1.0 / 3.0, "0.333333"),
            (12.3456789, "12.3457"),
            (f64::NAN, "nan"),
            (f64::INFINITY, "inf"),
        ];
        for (x, want) in cases {
            assert_eq!(format_sig6(x), want, "{x}");
        }
    }

    #[test]
    fn sig6_keeps_six_digits() {
        for &x in &[std::f64::consts::PI, 1e-7 * std::f64::consts::E, 6.02214076e23, -0.000123456789] {
            let back: f64 = format_sig6(x).parse().unwrap();
            assert!(((back - x) / x).abs() <= 5e-6, "{x}");
        }
    }

    fn row() -> ResultRow {
        ResultRow {
            sweep_var: "snr_db".into(),
            sweep_value: 4.0,
            snr_db: 4.0,
            k: 96,
            pilot_len: 96,
            pool_size: 1000,
            antennas: 128,
            pdrs_len: 4,
            zeta: 96,
            detector: "pdrs".into(),
            trials: 10,
            miss_rate: Some(0.0123),
            false_pos_rate: 0.0123,
            ser: 0.001,
            mean_post_sinr_db: 12.5,
            modeled_mults: 6_036_480,
            counted_mults: 6_036_480,
            wall_clock_ms: 3.25,
            seed: 1,
            raw_miss_rate: f64::NAN,
            error: None,
        }
    }

    #[test]
    fn csv_round_trip_and_header() {
        let mut withheld = row();
        withheld.miss_rate = None;
        withheld.detector = "bomp".into();
        let mut failed = row();
        failed.error = Some("trial 3 failed".into());
        let rows = vec![row(), withheld, failed];
        let mut buf = Vec::new();
        emit_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "sweep_var,sweep_value,snr_db,K,L,N,M,l,zeta,detector,trials,miss_rate,false_pos_rate,ser,mean_post_sinr_db,modeled_mults,counted_mults,wall_clock_ms,seed"
        );
        assert!(text.lines().nth(2).unwrap().contains(",bomp,10,,0.0123,"));
        let back = read_csv(&buf[..]).unwrap();
        assert_eq!(back.len(), 3);
        assert_eq!(back[0].miss_rate, Some(0.0123));
        assert_eq!(back[0].counted_mults, 6_036_480);
        assert_eq!(back[0].wall_clock_ms, 3.25);
        assert_eq!(back[1].miss_rate, None);
        assert!(back[2].error.is_some());
        assert!(back[2].ser.is_nan());
    }
}
