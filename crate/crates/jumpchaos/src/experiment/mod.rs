//! Monte Carlo orchestration: configuration, moment estimation, exponent
//! fits, statistical checks and persistence.

mod checks;
mod config;
mod fit;
mod identities;
mod kernel_suite;
mod persist;
mod scaling;

pub use checks::{jump_rate_check, wiener_check, wiener_test_function, StatCheck, WienerCheck};
pub use config::{ExperimentConfig, KernelSection, LatticeSection, MartingaleSection, RunSection};
pub use fit::{default_tolerance, fit_exponent, fit_power_law, FitResult, Regime};
pub use identities::{run_identity_suite, IdentityReport, IdentitySizes, SuiteResult};
pub use kernel_suite::{run_kernel_suite, KernelSuiteConfig, KernelSuiteReport, KernelVerdict, ScaleReport};
pub use persist::{parse_records, read_records, records_to_csv, write_fits, write_records, write_text, CSV_HEADER};
pub use scaling::{moment_estimate, run_scaling, ScalingRecord, ScalingRun};

use std::path::PathBuf;

use thiserror::Error;

use crate::chaos::ChaosError;
use crate::kernels::KernelError;
use crate::model::ModelError;
use crate::noise::NoiseError;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}: {msg}")]
    Io { path: PathBuf, msg: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("fit needs at least 3 scaling-regime points, got {0}")]
    InsufficientPoints(usize),
    /// The wall-clock budget ran out; the run holds the partial records.
    #[error("budget of {budget_ms} ms exhausted after {} records", run.records.len())]
    Budget { budget_ms: u64, run: Box<ScalingRun> },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Chaos(#[from] ChaosError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

pub type Result<T> = std::result::Result<T, ExperimentError>;

impl ExperimentError {
    pub(crate) fn io(path: impl Into<PathBuf>, err: impl std::fmt::Display) -> Self {
        ExperimentError::Io { path: path.into(), msg: err.to_string() }
    }
}
