//! Flat `key = value` config files, one entry per line, `#` starts a comment.
//!
//! Keys mirror the system symbols: `M N L l K zeta alpha snr_db D pdrs_mode
//! trials seed c_svd pdrs_displaces_data resample_pool`. Missing keys keep
//! the large-scale defaults of [`SystemConfig::large_scale`]. `alpha` sets
//! `zeta = round(alpha·K)` and cannot be combined with `zeta`.

use std::path::Path;

use crate::error::{Error, Result};
use crate::scenario::SystemConfig;

fn parse_num<T: std::str::FromStr>(key: &str, v: &str, line: usize) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("line {line}: cannot parse '{v}' for {key}")))
}

fn parse_bool(key: &str, v: &str, line: usize) -> Result<bool> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Config(format!("line {line}: '{v}' is not a boolean for {key}"))),
    }
}

pub fn parse_snr(v: &str) -> Option<f64> {
    match v.trim().to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" | "noiseless" => Some(f64::INFINITY),
        s => s.parse().ok().filter(|x: &f64| !x.is_nan()),
    }
}

pub fn parse_config(text: &str) -> Result<SystemConfig> {
    let mut cfg = SystemConfig::large_scale();
    let mut alpha: Option<f64> = None;
    let mut zeta_set = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {line}: expected 'key = value'")))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "M" => cfg.antennas = parse_num(key, value, line)?,
            "N" => cfg.pool_size = parse_num(key, value, line)?,
            "L" => cfg.pilot_len = parse_num(key, value, line)?,
            "l" => cfg.pdrs_len = parse_num(key, value, line)?,
            "K" => cfg.active_users = parse_num(key, value, line)?,
            "zeta" => {
                cfg.zeta = parse_num(key, value, line)?;
                zeta_set = true;
            }
            "alpha" => alpha = Some(parse_num(key, value, line)?),
            "snr_db" => {
                cfg.snr_db = parse_snr(value)
                    .ok_or_else(|| Error::Config(format!("line {line}: cannot parse '{value}' for snr_db")))?
            }
            "D" => cfg.data_len = parse_num(key, value, line)?,
            "pdrs_mode" => cfg.pdrs_mode = value.parse()?,
            "trials" => cfg.trials = parse_num(key, value, line)?,
            "seed" => cfg.seed = parse_num(key, value, line)?,
            "c_svd" => cfg.svd_cost = parse_num(key, value, line)?,
            "pdrs_displaces_data" => cfg.pdrs_displaces_data = parse_bool(key, value, line)?,
            "resample_pool" => cfg.resample_pool = parse_bool(key, value, line)?,
            other => return Err(Error::Config(format!("line {line}: unknown key '{other}'"))),
        }
    }
    match (alpha, zeta_set) {
        (Some(_), true) => return Err(Error::Config("give either zeta or alpha, not both".into())),
        (Some(a), false) => cfg.set_alpha(a),
        (None, false) => cfg.zeta = cfg.active_users.min(cfg.pool_size),
        (None, true) => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<SystemConfig> {
    parse_config(&std::fs::read_to_string(path)?)
}

/// Renders `cfg` in the same format.
pub fn to_config_text(cfg: &SystemConfig) -> String {
    let snr = if cfg.snr_db == f64::INFINITY {
        "inf".to_string()
    } else {
        cfg.snr_db.to_string()
    };
    format!(
        "M = {}\nN = {}\nL = {}\nl = {}\nK = {}\nzeta = {}\nsnr_db = {}\nD = {}\npdrs_mode = {}\ntrials = {}\nseed = {}\nc_svd = {}\npdrs_displaces_data = {}\nresample_pool = {}\n",
        cfg.antennas,
        cfg.pool_size,
        cfg.pilot_len,
        cfg.pdrs_len,
        cfg.active_users,
        cfg.zeta,
        snr,
        cfg.data_len,
        cfg.pdrs_mode,
        cfg.trials,
        cfg.seed,
        cfg.svd_cost,
        cfg.pdrs_displaces_data,
        cfg.resample_pool,
    )
}
