//! Reproducible experiments: TOML specs, ensemble runs, checks, and
//! manifests of every emitted file.

mod certify;
mod checks;
mod convergence;
mod pipeline;
mod presets;
mod run;
mod spec;

pub use certify::{cmd_certify, CertifyReport};
pub use checks::{certificates, read_rows, CheckOutcome, DefectRow, EnergyRow, KornRow};
pub use convergence::{cmd_convergence, convergence_csv, read_convergence_csv, ConvergenceReport, ConvergenceRow, DeltaRow, COLUMNS};
pub use pipeline::Pipeline;
pub use presets::{preset, PRESETS};
pub use run::{cmd_run, sha256_hex, CheckEntry, FileEntry, RunManifest, RunOptions, MANIFEST_FILE};
pub use spec::{
    noise, CertifySpec, Check, Profile, EnsembleSpec, EstimatorSpec, ExperimentSpec, InitialSpec, PerturbationMode, SolverSpec,
    SCHEMA_VERSION,
};

use thiserror::Error;

/// Environment variable overriding the output directory.
pub const OUT_ENV: &str = "RDMV_OUT";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("check failure: {0}")]
    CheckFailed(String),
    #[error("io: {0}")]
    Io(String),
}

impl ExperimentError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Io(_) => 1,
            Self::InvalidSpec(_) => 2,
            Self::Solver(_) => 3,
            Self::CheckFailed(_) => 4,
        }
    }
}

/// Exit status for a finished run.
pub const EXIT_CHECK_FAILED: i32 = 4;
