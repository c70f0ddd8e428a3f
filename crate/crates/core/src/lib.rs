//! Grant-free massive-MIMO activity detection: the PDRS detector with
//! direct weight estimation, the BOMP and FPR baselines, LS+ZF combining,
//! and a Monte-Carlo link harness.

pub mod combining;
pub mod detectors;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod numerics;
pub mod qpsk;
pub mod scenario;

pub use error::{Error, Result};
