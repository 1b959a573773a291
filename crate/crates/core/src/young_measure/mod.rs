//! Empirical Young measures on the phase space `{(s, v, D)}` and the weak
//! forms they are tested against.
//!
//! A measure stores, for every space-time cell, the same number `K` of
//! weighted atoms in columnar arrays. Ensembles of 1D trajectories give
//! `d = 1`; synthetic measures on `d`-dimensional grids are accepted by the
//! Korn-Poincaré check.

mod defect;
mod io;
mod korn;
mod renorm;
mod residuals;
mod test_functions;

pub use defect::{estimate_defect, ClipEntry, DefectOptions, DefectReport, XI_FLOOR, XI_MEANINGFUL};
pub use io::{read_measure, write_measure};
pub use korn::{korn_poincare_check, KornReport, VelocityField};
pub use renorm::RenormFunction;
pub use residuals::{
    compatibility_residual, continuity_residual, energy_inequality_slack, momentum_residual,
    read_residual_csv, renorm_continuity_residual, residual_suite, write_residual_csv, MomentumResidual,
    Physics, Residual, ResidualKind, ResidualRow, ResidualTolerance,
};
pub use test_functions::{
    matrix_library, momentum_library, scalar_library, SpaceTimeFunction, SpatialFactor, TemporalFactor,
    TestFunction, VectorSpatialFactor, VectorTestFunction,
};

use thiserror::Error;

use crate::solver1d::{Grid1D, Trajectory};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("incompatible ensemble: {0}")]
    IncompatibleEnsemble(String),
    #[error("invalid measure: {0}")]
    Invalid(String),
    #[error("observable is not finite at cell (t = {t_idx}, x = {x_idx}), atom {atom}")]
    ObservableDomain { t_idx: usize, x_idx: usize, atom: usize },
    #[error("time {tau} is not a sampled time of the measure")]
    TimeOutOfRange { tau: f64 },
    #[error("test function {0} does not vanish on the boundary")]
    InvalidTestFunction(String),
    #[error("cannot estimate defects: {0}")]
    CannotEstimate(String),
    #[error("unsupported dimension d = {0}: T vanishes identically in one dimension")]
    UnsupportedDimension(usize),
    #[error(transparent)]
    Law(#[from] crate::pressure_law::LawError),
}

/// One atom, used when building measures.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseAtom {
    pub s: f64,
    pub v: Vec<f64>,
    /// Row-major symmetric `d × d`.
    pub d: Vec<f64>,
    pub w: f64,
}

/// Borrowed view of a stored atom.
#[derive(Debug, Clone, Copy)]
pub struct AtomRef<'a> {
    pub s: f64,
    pub v: &'a [f64],
    pub d: &'a [f64],
    pub w: f64,
}

/// Uniform cell-centred grid on a box `∏ [0, L_k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceGrid {
    pub dims: Vec<usize>,
    pub lengths: Vec<f64>,
}

impl SpaceGrid {
    pub fn line(grid: &Grid1D) -> Self {
        Self {
            dims: vec![grid.n],
            lengths: vec![grid.length],
        }
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn cells(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.lengths[axis] / self.dims[axis] as f64
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|k| self.spacing(k)).product()
    }

    /// Multi-index of a flat cell index; the last axis varies fastest.
    pub fn unflatten(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim()];
        for k in (0..self.dim()).rev() {
            out[k] = idx % self.dims[k];
            idx /= self.dims[k];
        }
        out
    }

    pub fn center(&self, idx: usize) -> Vec<f64> {
        self.unflatten(idx)
            .iter()
            .enumerate()
            .map(|(k, &i)| (i as f64 + 0.5) * self.spacing(k))
            .collect()
    }
}

/// Per-cell atom sets with `K` atoms per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteYoungMeasure {
    pub space: SpaceGrid,
    pub times: Vec<f64>,
    d: usize,
    k: usize,
    s: Vec<f64>,
    v: Vec<f64>,
    dm: Vec<f64>,
    w: Vec<f64>,
    pub provenance: Vec<String>,
}

impl DiscreteYoungMeasure {
    /// Builds a measure from `cells[t_idx * n_space + x_idx]` atom lists.
    pub fn from_atoms(
        space: SpaceGrid,
        times: Vec<f64>,
        cells: Vec<Vec<PhaseAtom>>,
        provenance: Vec<String>,
    ) -> Result<Self, MeasureError> {
        let d = space.dim();
        let n_cells = space.cells() * times.len();
        if cells.len() != n_cells {
            return Err(MeasureError::Invalid(format!("{} cells given, grid has {n_cells}", cells.len())));
        }
        let k = cells.first().map_or(0, Vec::len);
        let mut m = Self {
            space,
            times,
            d,
            k,
            s: Vec::with_capacity(n_cells * k),
            v: Vec::with_capacity(n_cells * k * d),
            dm: Vec::with_capacity(n_cells * k * d * d),
            w: Vec::with_capacity(n_cells * k),
            provenance,
        };
        for cell in cells {
            if cell.len() != k {
                return Err(MeasureError::Invalid("atom count differs between cells".into()));
            }
            for atom in cell {
                if atom.v.len() != d || atom.d.len() != d * d {
                    return Err(MeasureError::Invalid("atom dimension mismatch".into()));
                }
                m.s.push(atom.s);
                m.v.extend_from_slice(&atom.v);
                m.dm.extend_from_slice(&atom.d);
                m.w.push(atom.w);
            }
        }
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), MeasureError> {
        let d = self.d;
        if self.k == 0 {
            return Err(MeasureError::Invalid("cells must be nonempty".into()));
        }
        for w in self.times.windows(2) {
            if !(w[1] > w[0]) {
                return Err(MeasureError::Invalid("times must be strictly increasing".into()));
            }
        }
        for cell in 0..self.n_cells() {
            let mut total = 0.0;
            for a in 0..self.k {
                let atom = self.atom(cell, a);
                if !(atom.s >= 0.0) {
                    return Err(MeasureError::Invalid(format!("negative density {} in cell {cell}", atom.s)));
                }
                if !(atom.w > 0.0 && atom.w <= 1.0) {
                    return Err(MeasureError::Invalid(format!("weight {} in cell {cell}", atom.w)));
                }
                for i in 0..d {
                    for j in 0..i {
                        if atom.d[i * d + j] != atom.d[j * d + i] {
                            return Err(MeasureError::Invalid(format!("non-symmetric D in cell {cell}")));
                        }
                    }
                }
                total += atom.w;
            }
            if (total - 1.0).abs() > 1e-12 {
                return Err(MeasureError::Invalid(format!("weights in cell {cell} sum to {total}")));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn atoms_per_cell(&self) -> usize {
        self.k
    }

    pub fn n_space(&self) -> usize {
        self.space.cells()
    }

    pub fn n_cells(&self) -> usize {
        self.n_space() * self.times.len()
    }

    pub fn cell_index(&self, t_idx: usize, x_idx: usize) -> usize {
        t_idx * self.n_space() + x_idx
    }

    pub fn atom(&self, cell: usize, a: usize) -> AtomRef<'_> {
        let i = cell * self.k + a;
        let d = self.d;
        AtomRef {
            s: self.s[i],
            v: &self.v[i * d..(i + 1) * d],
            d: &self.dm[i * d * d..(i + 1) * d * d],
            w: self.w[i],
        }
    }

    pub fn atoms(&self, cell: usize) -> impl Iterator<Item = AtomRef<'_>> + '_ {
        (0..self.k).map(move |a| self.atom(cell, a))
    }

    pub fn time_index(&self, tau: f64) -> Result<usize, MeasureError> {
        self.times
            .iter()
            .position(|&t| (t - tau).abs() <= 1e-12 * (1.0 + tau.abs()))
            .ok_or(MeasureError::TimeOutOfRange { tau })
    }

    /// `Σ_k w_k g(atom_k)` at one cell.
    pub fn moment_at<G: Fn(&AtomRef) -> f64>(&self, t_idx: usize, x_idx: usize, g: &G) -> Result<f64, MeasureError> {
        let cell = self.cell_index(t_idx, x_idx);
        let mut sum = 0.0;
        for (atom_idx, atom) in self.atoms(cell).enumerate() {
            let value = g(&atom);
            if !value.is_finite() {
                return Err(MeasureError::ObservableDomain { t_idx, x_idx, atom: atom_idx });
            }
            sum += atom.w * value;
        }
        Ok(sum)
    }

    /// Moment field at one time, indexed by space cell.
    pub fn moment_slice<G: Fn(&AtomRef) -> f64>(&self, t_idx: usize, g: &G) -> Result<Vec<f64>, MeasureError> {
        (0..self.n_space()).map(|x| self.moment_at(t_idx, x, g)).collect()
    }

    /// Space-time moment field indexed `[t_idx][x_idx]`.
    pub fn moment<G: Fn(&AtomRef) -> f64>(&self, g: G) -> Result<Vec<Vec<f64>>, MeasureError> {
        (0..self.times.len()).map(|t| self.moment_slice(t, &g)).collect()
    }

    pub(crate) fn from_columns(
        space: SpaceGrid,
        times: Vec<f64>,
        k: usize,
        columns: (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>),
        provenance: Vec<String>,
    ) -> Result<Self, MeasureError> {
        let d = space.dim();
        let (s, v, dm, w) = columns;
        let n = space.cells() * times.len() * k;
        if s.len() != n || w.len() != n || v.len() != n * d || dm.len() != n * d * d {
            return Err(MeasureError::Invalid("column lengths do not match the grid".into()));
        }
        let m = Self {
            space,
            times,
            d,
            k,
            s,
            v,
            dm,
            w,
            provenance,
        };
        m.validate()?;
        Ok(m)
    }
}

/// One atom per member per cell: `s = ρ`, `v = u`, `D = ∂x u` (central,
/// odd ghosts at the walls), weights `1/K`.
pub fn assemble(ensemble: &[&Trajectory], floor: f64) -> Result<DiscreteYoungMeasure, MeasureError> {
    let ids = (0..ensemble.len()).map(|k| format!("member-{k}")).collect();
    assemble_labeled(ensemble, ids, floor)
}

pub fn assemble_labeled(
    ensemble: &[&Trajectory],
    provenance: Vec<String>,
    floor: f64,
) -> Result<DiscreteYoungMeasure, MeasureError> {
    let first = ensemble
        .first()
        .ok_or_else(|| MeasureError::IncompatibleEnsemble("ensemble is empty".into()))?;
    let times = first.times();
    for (k, traj) in ensemble.iter().enumerate() {
        if traj.grid != first.grid {
            return Err(MeasureError::IncompatibleEnsemble(format!("member {k} uses a different grid")));
        }
        let other = traj.times();
        if other.len() != times.len() || other.iter().zip(&times).any(|(a, b)| (a - b).abs() > 1e-12 * (1.0 + b.abs())) {
            return Err(MeasureError::IncompatibleEnsemble(format!("member {k} is sampled at different times")));
        }
    }
    if provenance.len() != ensemble.len() {
        return Err(MeasureError::IncompatibleEnsemble("one provenance id per member required".into()));
    }
    let grid = first.grid;
    let kk = ensemble.len();
    let n = grid.n;
    let nt = times.len();
    let mut s = vec![0.0; nt * n * kk];
    let mut v = vec![0.0; nt * n * kk];
    let mut dm = vec![0.0; nt * n * kk];
    let w = vec![1.0 / kk as f64; nt * n * kk];
    for (m, traj) in ensemble.iter().enumerate() {
        for (t, snap) in traj.snapshots.iter().enumerate() {
            let u = snap.velocity(floor);
            let g = crate::solver1d::velocity_gradient(&u, grid.dx());
            for x in 0..n {
                let i = (t * n + x) * kk + m;
                s[i] = snap.rho[x];
                v[i] = u[x];
                dm[i] = g[x];
            }
        }
    }
    DiscreteYoungMeasure::from_columns(SpaceGrid::line(&grid), times, kk, (s, v, dm, w), provenance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pressure_law::PressureLaw;
    use crate::solver1d::{run, FluidState, SolverConfig};

    fn traj(amp: f64) -> Trajectory {
        let grid = Grid1D::new(16, 1.0).unwrap();
        let mut cfg = SolverConfig::new(grid, PressureLaw::power(1.0, 2.0).unwrap(), 0.1, 0.02);
        cfg.output_dt = Some(0.01);
        run(&cfg, &FluidState::from_profile(&grid, |x| (1.0 + amp * x, 0.0))).unwrap()
    }

    #[test]
    fn single_member_is_dirac() {
        let t = traj(0.2);
        let m = assemble(&[&t], 1e-10).unwrap();
        assert_eq!(m.atoms_per_cell(), 1);
        assert_eq!(m.atom(5, 0).w, 1.0);
        let rho = m.moment(|a| a.s).unwrap();
        for (j, snap) in t.snapshots.iter().enumerate() {
            assert_eq!(rho[j], snap.rho);
        }
    }

    #[test]
    fn duplicate_members_share_moments() {
        let t = traj(0.2);
        let one = assemble(&[&t], 1e-10).unwrap();
        let two = assemble(&[&t, &t], 1e-10).unwrap();
        let g = |a: &AtomRef| a.s * a.v[0] * a.v[0] + a.d[0];
        let (m1, m2) = (one.moment(g).unwrap(), two.moment(g).unwrap());
        for (a, b) in m1.iter().flatten().zip(m2.iter().flatten()) {
            assert!((a - b).abs() <= 1e-15 * a.abs().max(1.0));
        }
    }

    #[test]
    fn two_atom_average() {
        let space = SpaceGrid { dims: vec![1], lengths: vec![1.0] };
        let atom = |s| PhaseAtom { s, v: vec![0.0], d: vec![0.0], w: 0.5 };
        let m = DiscreteYoungMeasure::from_atoms(space, vec![0.0], vec![vec![atom(1.0), atom(3.0)]], vec![]).unwrap();
        assert_eq!(m.moment(|a| a.s).unwrap(), vec![vec![2.0]]);
        assert!(matches!(
            m.moment(|a| 1.0 / (a.s - 1.0)),
            Err(MeasureError::ObservableDomain { t_idx: 0, x_idx: 0, atom: 0 })
        ));
    }

    #[test]
    fn grid_mismatch_rejected() {
        let a = traj(0.1);
        let grid = Grid1D::new(8, 1.0).unwrap();
        let cfg = SolverConfig::new(grid, PressureLaw::power(1.0, 2.0).unwrap(), 0.1, 0.02);
        let b = run(&cfg, &FluidState::uniform(&grid, 1.0, 0.0)).unwrap();
        assert!(matches!(assemble(&[&a, &b], 1e-10), Err(MeasureError::IncompatibleEnsemble(_))));
        assert!(matches!(assemble(&[], 1e-10), Err(MeasureError::IncompatibleEnsemble(_))));
    }
}
