//! Relative-energy diagnostics between a measure and a smooth reference
//! pair `(r, U)`: the relative energy itself, the remainder integrals
//! `I₂…I₅` with their bounds, and the Grönwall verdict.

mod gronwall;
mod relative_energy;
mod remainder;
mod report;
pub mod tensor;

pub use gronwall::{gronwall_verdict, GronwallVerdict, INPUT_FLOOR, OUTPUT_FLOOR};
pub use relative_energy::{relative_energy, relative_energy_density, relative_energy_series};
pub use remainder::{remainder_series, remainder_terms, BoundConstants, Cutoff, EstimatorConfig, RemainderSeries, RemainderTerms};
pub use report::{
    read_relative_energy_csv, relative_energy_report, write_relative_energy_csv, write_verdict, RelativeEnergyReport,
    RelativeEnergyRow,
};
pub use crate::solver1d::StrongSolutionRef;

use thiserror::Error;

use crate::pressure_law::LawError;
use crate::young_measure::MeasureError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeakStrongError {
    #[error("reference invalid: {0}")]
    InvalidReference(String),
    #[error("cannot bound remainder: {0}")]
    CannotBound(String),
    #[error("invalid cutoff band: {0}")]
    InvalidBand(String),
    #[error("series lengths differ: {0}")]
    MismatchedSeries(String),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Law(#[from] LawError),
}
