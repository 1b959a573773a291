//! Finite-volume solver for the regularized barotropic system
//!
//! ```text
//! ∂t ρ + ∂x(ρu) = 0
//! ∂t(ρu) + ∂x(ρu² + p(ρ) + δρ^Γ) = λ ∂xx u
//! ```
//!
//! on `[0, L]` with `u = 0` at both walls. Hyperbolic fluxes are local
//! Lax-Friedrichs (Rusanov); viscosity is implicit. The split gives a
//! discrete energy inequality whose per-step budget can be recorded.

mod io;
mod reference;
mod scheme;

pub use io::{
    read_initial_csv, read_series_csv, read_snapshot_csv, write_initial_csv, write_series_csv, write_snapshot_csv,
    write_trajectory, SeriesRow, SnapshotRow,
};
pub use reference::{make_reference, RegularityNorms, StrongSolutionRef, DEFAULT_REFINEMENT};
pub use scheme::{
    dissipation_increment, max_admissible_dt, run, step, total_energy, velocity_gradient, StepBudget, Trajectory,
};

use std::time::Duration;

use thiserror::Error;

use crate::pressure_law::{LawError, PressureLaw};

pub const DEFAULT_FLOOR: f64 = 1e-10;
pub const DEFAULT_CFL: f64 = 0.4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("time step {dt:e} exceeds the admissible {max_dt:e}")]
    StepRejected { dt: f64, max_dt: f64 },
    #[error("negative density {rho:e} in cell {cell} at t = {t}")]
    NegativeDensity { cell: usize, rho: f64, t: f64 },
    #[error("non-finite state in cell {cell} at t = {t}")]
    NonFinite { cell: usize, t: f64 },
    #[error("reference solution invalid: min density {min_rho:e} below {threshold:e}")]
    ReferenceInvalid { min_rho: f64, threshold: f64 },
    #[error(transparent)]
    Law(#[from] LawError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    pub n: usize,
    pub length: f64,
}

impl Grid1D {
    pub fn new(n: usize, length: f64) -> Result<Self, SolverError> {
        if n < 4 {
            return Err(SolverError::InvalidConfig(format!("grid needs N >= 4 cells, got {n}")));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(SolverError::InvalidConfig(format!("domain length {length}")));
        }
        Ok(Self { n, length })
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dx()
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    pub fn refined(&self, factor: usize) -> Result<Self, SolverError> {
        Self::new(self.n * factor, self.length)
    }
}

/// Density and momentum per cell at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct FluidState {
    pub rho: Vec<f64>,
    pub m: Vec<f64>,
    pub t: f64,
}

impl FluidState {
    pub fn uniform(grid: &Grid1D, rho: f64, u: f64) -> Self {
        Self {
            rho: vec![rho; grid.n],
            m: vec![rho * u; grid.n],
            t: 0.0,
        }
    }

    /// Samples `(ρ, u)` at cell centres.
    pub fn from_profile<F: Fn(f64) -> (f64, f64)>(grid: &Grid1D, profile: F) -> Self {
        let (rho, m) = grid
            .centers()
            .into_iter()
            .map(|x| {
                let (r, u) = profile(x);
                (r, r * u)
            })
            .unzip();
        Self { rho, m, t: 0.0 }
    }

    /// Velocity with `u = 0` where `ρ ≤ floor`.
    pub fn velocity(&self, floor: f64) -> Vec<f64> {
        self.rho
            .iter()
            .zip(&self.m)
            .map(|(&r, &m)| if r > floor { m / r } else { 0.0 })
            .collect()
    }

    pub fn mass(&self, grid: &Grid1D) -> f64 {
        self.rho.iter().sum::<f64>() * grid.dx()
    }

    pub fn validate(&self, grid: &Grid1D) -> Result<(), SolverError> {
        if self.rho.len() != grid.n || self.m.len() != grid.n {
            return Err(SolverError::InvalidConfig(format!(
                "state has {}/{} cells, grid has {}",
                self.rho.len(),
                self.m.len(),
                grid.n
            )));
        }
        for (cell, (&r, &m)) in self.rho.iter().zip(&self.m).enumerate() {
            if !r.is_finite() || !m.is_finite() {
                return Err(SolverError::NonFinite { cell, t: self.t });
            }
            if r < 0.0 {
                return Err(SolverError::NegativeDensity { cell, rho: r, t: self.t });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub grid: Grid1D,
    pub law: PressureLaw,
    /// Shear viscosity; has no effect in one dimension.
    pub mu: f64,
    pub lambda: f64,
    pub delta: f64,
    pub big_gamma: f64,
    pub cfl: f64,
    pub floor: f64,
    pub t_end: f64,
    /// Snapshot cadence; `None` records only the initial and final states.
    pub output_dt: Option<f64>,
    /// Record a [`StepBudget`] for every accepted step.
    pub track_budget: bool,
    /// Wall-clock budget; exceeding it returns a partial trajectory.
    pub wall_clock: Option<Duration>,
}

impl SolverConfig {
    pub fn new(grid: Grid1D, law: PressureLaw, lambda: f64, t_end: f64) -> Self {
        Self {
            grid,
            law,
            mu: 0.0,
            lambda,
            delta: 0.0,
            big_gamma: 2.0,
            cfl: DEFAULT_CFL,
            floor: DEFAULT_FLOOR,
            t_end,
            output_dt: None,
            track_budget: false,
            wall_clock: None,
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |msg: String| Err(SolverError::InvalidConfig(msg));
        if !(self.lambda > 0.0) {
            return bad(format!("lambda = {} must be positive", self.lambda));
        }
        if !(self.mu >= 0.0) {
            return bad(format!("mu = {} must be nonnegative", self.mu));
        }
        if !(self.delta >= 0.0) {
            return bad(format!("delta = {} must be nonnegative", self.delta));
        }
        if self.delta > 0.0 && !(self.big_gamma >= 2.0) {
            return bad(format!("Gamma = {} must be >= 2 when delta > 0", self.big_gamma));
        }
        if !(self.big_gamma > 1.0) {
            return bad(format!("Gamma = {} must exceed 1", self.big_gamma));
        }
        if !(self.cfl > 0.0 && self.cfl <= 0.45) {
            return bad(format!("CFL = {} outside (0, 0.45]", self.cfl));
        }
        if !(self.floor > 0.0) {
            return bad(format!("vacuum floor {}", self.floor));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad(format!("end time {}", self.t_end));
        }
        if let Some(dt) = self.output_dt {
            if !(dt > 0.0) {
                return bad(format!("output_dt {dt}"));
            }
        }
        Ok(())
    }

    /// Total pressure `p(ρ) + δρ^Γ` for `ρ ≥ 0`.
    pub fn total_pressure(&self, rho: f64) -> f64 {
        let reg = if self.delta > 0.0 { self.delta * rho.powf(self.big_gamma) } else { 0.0 };
        self.law.h(rho) + self.law.q(rho) + reg
    }

    /// Sound speed `sqrt(max(p' + δΓρ^{Γ-1}, dx))`.
    pub fn sound_speed(&self, rho: f64) -> f64 {
        let reg = if self.delta > 0.0 {
            self.delta * self.big_gamma * rho.powf(self.big_gamma - 1.0)
        } else {
            0.0
        };
        (self.law.dpressure(rho) + reg).max(self.grid.dx()).sqrt()
    }
}
