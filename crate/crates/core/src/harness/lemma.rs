//! Randomized numerical checks of the pseudo-inverse identities and the
//! DWE / LS+ZF equivalences.

use std::time::{Duration, Instant};

use rand::seq::index::sample;
use rand::Rng;

use crate::combining::{dwe_weights, lszf_weights};
use crate::error::Result;
use crate::numerics::{cgauss, pinv, rank, CMatrix, RngStream};

/// Outcome of one suite.
#[derive(Clone, Debug)]
pub struct LemmaCheck {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    pub max_err: f64,
    pub tol: f64,
    pub elapsed: Duration,
}

impl LemmaCheck {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.cases > 0
    }
}

#[derive(Clone, Debug)]
pub struct LemmaSuiteReport {
    pub checks: Vec<LemmaCheck>,
}

impl LemmaSuiteReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(LemmaCheck::passed)
    }

    pub fn get(&self, name: &str) -> Option<&LemmaCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub const MOORE_PENROSE: &str = "moore-penrose";
pub const LEFT_INVERSE: &str = "left-inverse";
pub const PRODUCT_PINV: &str = "product-pinv";
pub const LEMMA1: &str = "dwe-equals-lszf";
pub const LEMMA2: &str = "noiseless-oracle-dwe";

fn rel(a: &CMatrix, b: &CMatrix) -> f64 {
    let d = a.sub(b).frobenius_norm();
    let s = b.frobenius_norm();
    if s == 0.0 {
        d
    } else {
        d / s
    }
}

fn run_suite(
    name: &'static str,
    cases: usize,
    tol: f64,
    mut case: impl FnMut(usize) -> Result<f64>,
) -> Result<LemmaCheck> {
    let t0 = Instant::now();
    let mut failures = 0;
    let mut max_err: f64 = 0.0;
    for i in 0..cases {
        let e = case(i)?;
        if e.is_nan() || e > tol {
            failures += 1;
        }
        max_err = if e.is_nan() { f64::NAN } else { max_err.max(e) };
    }
    Ok(LemmaCheck {
        name,
        cases,
        failures,
        max_err,
        tol,
        elapsed: t0.elapsed(),
    })
}

/// Random `rows×cols` matrix of rank `r` (a product of Gaussian factors).
fn random_rank(rows: usize, cols: usize, r: usize, rng: &mut RngStream) -> Result<CMatrix> {
    Ok(cgauss(rows, r, 1.0, rng)?.matmul(&cgauss(r, cols, 1.0, rng)?))
}

/// All four Moore-Penrose conditions; returns the largest relative error.
pub fn moore_penrose_error(a: &CMatrix) -> Result<f64> {
    let ap = pinv(a)?;
    let aap = a.matmul(&ap);
    let apa = ap.matmul(a);
    Ok([
        rel(&aap.matmul(a), a),
        rel(&apa.matmul(&ap), &ap),
        rel(&aap.adjoint(), &aap),
        rel(&apa.adjoint(), &apa),
    ]
    .into_iter()
    .fold(0.0, f64::max))
}

pub fn moore_penrose_suite(cases: usize, tol: f64, seed: u64) -> Result<LemmaCheck> {
    let mut rng = RngStream::new(seed, 1);
    run_suite(MOORE_PENROSE, cases, tol, |_| {
        let rows = rng.random_range(1..=16);
        let cols = rng.random_range(1..=16);
        let r = rng.random_range(1..=rows.min(cols));
        moore_penrose_error(&random_rank(rows, cols, r, &mut rng)?)
    })
}

pub fn left_inverse_suite(cases: usize, tol: f64, seed: u64) -> Result<LemmaCheck> {
    let mut rng = RngStream::new(seed, 2);
    run_suite(LEFT_INVERSE, cases, tol, |_| {
        let l = rng.random_range(1..=15);
        let m = rng.random_range(l + 1..=16);
        let y = cgauss(m, l, 1.0, &mut rng)?;
        let prod = pinv(&y)?.matmul(&y);
        Ok(prod.sub(&CMatrix::identity(l)).frobenius_norm() / (l as f64).sqrt())
    })
}

pub fn product_pinv_suite(cases: usize, tol: f64, seed: u64) -> Result<LemmaCheck> {
    let mut rng = RngStream::new(seed, 3);
    run_suite(PRODUCT_PINV, cases, tol, |_| {
        let p = rng.random_range(1..=12);
        let q = rng.random_range(1..=12);
        let r = rng.random_range(1..=12);
        let a = cgauss(p, q, 1.0, &mut rng)?;
        let b = cgauss(q, r, 1.0, &mut rng)?;
        let ab = a.matmul(&b);
        let lhs = pinv(&ab)?;
        let left = pinv(&pinv(&a)?.matmul(&ab))?;
        let right = pinv(&ab.matmul(&pinv(&b)?))?;
        Ok(rel(&left.matmul(&right), &lhs))
    })
}

/// Noisy instance, `M=16, L=8, N=24`, detected set of size `ξ ∈ 8..=12`.
pub fn lemma1_suite(cases: usize, tol: f64, seed: u64) -> Result<LemmaCheck> {
    let (m, l, n) = (16, 8, 24);
    let mut rng = RngStream::new(seed, 4);
    run_suite(LEMMA1, cases, tol, |_| {
        let pool = cgauss(n, l, 1.0, &mut rng)?;
        let k = rng.random_range(1..=12);
        let active = sample(&mut rng, n, k).into_vec();
        let h = cgauss(m, k, 1.0, &mut rng)?;
        let y = h
            .matmul(&pool.select_rows(&active))
            .add(&cgauss(m, l, 0.1, &mut rng)?);
        let xi = rng.random_range(l..=12);
        let mut det = sample(&mut rng, n, xi).into_vec();
        det.sort_unstable();
        let p_det = pool.select_rows(&det);
        if rank(&p_det)? != l {
            return Ok(f64::NAN);
        }
        let dwe = dwe_weights(&y, &p_det, &det)?;
        let lszf = lszf_weights(&y, &p_det, &det)?;
        Ok(rel(&lszf.w, &dwe.w))
    })
}

/// Noiseless oracle instance, `K ∈ 2..=7 < L = 8`.
pub fn lemma2_suite(cases: usize, tol: f64, seed: u64) -> Result<LemmaCheck> {
    let (m, l, n) = (16, 8, 24);
    let mut rng = RngStream::new(seed, 5);
    run_suite(LEMMA2, cases, tol, |_| {
        let pool = cgauss(n, l, 1.0, &mut rng)?;
        let k = rng.random_range(2..=7);
        let mut active = sample(&mut rng, n, k).into_vec();
        active.sort_unstable();
        let p_a = pool.select_rows(&active);
        let y = cgauss(m, k, 1.0, &mut rng)?.matmul(&p_a);
        let dwe = dwe_weights(&y, &p_a, &active)?;
        let lszf = lszf_weights(&y, &p_a, &active)?;
        Ok(rel(&lszf.w, &dwe.w))
    })
}

pub const DEFAULT_TOLERANCES: [(&str, f64); 5] = [
    (MOORE_PENROSE, 1e-9),
    (LEFT_INVERSE, 1e-10),
    (PRODUCT_PINV, 1e-8),
    (LEMMA1, 1e-8),
    (LEMMA2, 1e-8),
];

/// Runs every suite. `iterations` overrides the case counts (200 for the
/// Moore-Penrose suite, 100 otherwise); `tol` overrides every tolerance.
pub fn run_lemma_checks(iterations: Option<usize>, tol: Option<f64>, seed: u64) -> Result<LemmaSuiteReport> {
    let t = |name: &str| {
        tol.unwrap_or_else(|| {
            DEFAULT_TOLERANCES
                .iter()
                .find(|(n, _)| *n == name)
                .map(|(_, v)| *v)
                .expect("known suite")
        })
    };
    let n = |default: usize| iterations.unwrap_or(default);
    Ok(LemmaSuiteReport {
        checks: vec![
            moore_penrose_suite(n(200), t(MOORE_PENROSE), seed)?,
            left_inverse_suite(n(100), t(LEFT_INVERSE), seed)?,
            product_pinv_suite(n(100), t(PRODUCT_PINV), seed)?,
            lemma1_suite(n(100), t(LEMMA1), seed)?,
            lemma2_suite(n(100), t(LEMMA2), seed)?,
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_suites_pass_at_default_tolerances() {
        let report = run_lemma_checks(Some(20), None, 11).unwrap();
        for c in &report.checks {
            assert!(c.passed(), "{} max_err {:e}", c.name, c.max_err);
        }
    }

    #[test]
    fn impossible_tolerance_fails() {
        let report = run_lemma_checks(Some(5), Some(0.0), 11).unwrap();
        assert!(!report.all_passed());
    }

    #[test]
    fn rank_deficient_moore_penrose() {
        let mut rng = RngStream::new(2, 2);
        let a = random_rank(9, 7, 2, &mut rng).unwrap();
        assert!(moore_penrose_error(&a).unwrap() < 1e-9);
    }
}
