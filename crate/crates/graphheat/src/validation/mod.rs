//! Independent oracles for the engine and the property suite built on them.

use graphheat_core::{EngineError, KernelError};
use serde::Serialize;
use thiserror::Error;

mod ctrw;
mod matexp;
mod residual;
mod suite;

pub use ctrw::{binomial_standard_error, ctrw_simulate};
pub use matexp::{compare_with_oracle, expm_row, matexp_oracle, MatexpOracle, DENSE_LIMIT};
pub use residual::residual_check;
pub use suite::{suite_run, CheckKind, CheckResult, MassRoute, SuiteConfig, SuiteReport};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("window too small: series order {order} reaches the frontier (exact below {limit})")]
    WindowTooSmall { order: usize, limit: usize },
    #[error("{n} vertices exceed the dense oracle limit {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("unknown vertex")]
    UnknownVertex,
    #[error("time step must satisfy 0 < h < t")]
    InvalidStep,
    #[error("negative or non-finite time")]
    InvalidTime,
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// One oracle comparison. `pass` is exactly
/// `|engine − oracle| ≤ engine_bound + oracle_tolerance`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleResult {
    pub x: usize,
    pub y: usize,
    pub t: f64,
    pub oracle_value: f64,
    pub engine_value: f64,
    pub engine_bound: f64,
    pub oracle_tolerance: f64,
    pub pass: bool,
}

impl OracleResult {
    pub fn new(query: (usize, usize, f64), oracle_value: f64, engine_value: f64, engine_bound: f64, oracle_tolerance: f64) -> Self {
        let pass = (engine_value - oracle_value).abs() <= engine_bound + oracle_tolerance;
        OracleResult {
            x: query.0,
            y: query.1,
            t: query.2,
            oracle_value,
            engine_value,
            engine_bound,
            oracle_tolerance,
            pass,
        }
    }

    /// `engine_bound + oracle_tolerance − |difference|`.
    pub fn margin(&self) -> f64 {
        self.engine_bound + self.oracle_tolerance - (self.engine_value - self.oracle_value).abs()
    }
}
