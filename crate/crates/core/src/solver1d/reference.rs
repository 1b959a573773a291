use super::{run, scheme::velocity_gradient, FluidState, SolverConfig, SolverError, Trajectory};
use crate::solver1d::Grid1D;

pub const DEFAULT_REFINEMENT: usize = 8;

/// Grid max-norms of a reference pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularityNorms {
    /// `sup|U| + sup|∂x U| + sup|∂t U|`.
    pub u_c1: f64,
    pub ux_sup: f64,
    pub uxx_sup: f64,
    /// `sup r + sup|∂x r|`.
    pub r_c1: f64,
    pub r_min: f64,
    pub r_max: f64,
    /// `‖1/r‖∞`.
    pub inv_r: f64,
}

/// Smooth surrogate `(r, U)` of a strong solution, sampled at the coarse
/// cell centres and snapshot times.
#[derive(Debug, Clone, PartialEq)]
pub struct StrongSolutionRef {
    pub grid: Grid1D,
    pub times: Vec<f64>,
    pub r: Vec<Vec<f64>>,
    pub u: Vec<Vec<f64>>,
    pub r_x: Vec<Vec<f64>>,
    pub u_x: Vec<Vec<f64>>,
    pub u_xx: Vec<Vec<f64>>,
    pub u_t: Vec<Vec<f64>>,
    pub norms: RegularityNorms,
    pub refinement: usize,
}

fn sup(fields: &[Vec<f64>]) -> f64 {
    fields.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max)
}

impl StrongSolutionRef {
    /// Packages coarse-grid fields `(r, U)` and their finite-difference
    /// derivatives.
    pub fn from_fields(
        grid: Grid1D,
        times: Vec<f64>,
        r: Vec<Vec<f64>>,
        u: Vec<Vec<f64>>,
        refinement: usize,
    ) -> Result<Self, SolverError> {
        let dx = grid.dx();
        let n = grid.n;
        let r_min = r.iter().flatten().copied().fold(f64::INFINITY, f64::min);
        if !(r_min > 0.0) {
            return Err(SolverError::ReferenceInvalid { min_rho: r_min, threshold: 0.0 });
        }
        let r_x: Vec<Vec<f64>> = r
            .iter()
            .map(|f| {
                (0..n)
                    .map(|i| {
                        let l = f[i.saturating_sub(1)];
                        let rt = f[(i + 1).min(n - 1)];
                        (rt - l) / (2.0 * dx)
                    })
                    .collect()
            })
            .collect();
        let u_x: Vec<Vec<f64>> = u.iter().map(|f| velocity_gradient(f, dx)).collect();
        let u_xx: Vec<Vec<f64>> = u
            .iter()
            .map(|f| {
                (0..n)
                    .map(|i| {
                        let l = if i == 0 { -f[0] } else { f[i - 1] };
                        let rt = if i == n - 1 { -f[n - 1] } else { f[i + 1] };
                        (rt - 2.0 * f[i] + l) / (dx * dx)
                    })
                    .collect()
            })
            .collect();
        let k = times.len();
        let u_t = (0..k)
            .map(|j| {
                if k < 2 {
                    return vec![0.0; n];
                }
                let (a, b) = if j == 0 {
                    (0, 1)
                } else if j == k - 1 {
                    (k - 2, k - 1)
                } else {
                    (j - 1, j + 1)
                };
                let span = times[b] - times[a];
                (0..n).map(|i| (u[b][i] - u[a][i]) / span).collect()
            })
            .collect::<Vec<Vec<f64>>>();
        let r_max = r.iter().flatten().copied().fold(0.0, f64::max);
        let norms = RegularityNorms {
            u_c1: sup(&u) + sup(&u_x) + sup(&u_t),
            ux_sup: sup(&u_x),
            uxx_sup: sup(&u_xx),
            r_c1: r_max + sup(&r_x),
            r_min,
            r_max,
            inv_r: 1.0 / r_min,
        };
        Ok(Self {
            grid,
            times,
            r,
            u,
            r_x,
            u_x,
            u_xx,
            u_t,
            norms,
            refinement,
        })
    }

    /// Reference built directly from a trajectory on its own grid.
    pub fn from_trajectory(traj: &Trajectory, floor: f64) -> Result<Self, SolverError> {
        check_vacuum(traj, floor)?;
        let r = traj.snapshots.iter().map(|s| s.rho.clone()).collect();
        let u = traj.snapshots.iter().map(|s| s.velocity(floor)).collect();
        Self::from_fields(traj.grid, traj.times(), r, u, 1)
    }

    /// Index of the snapshot at time `tau`, if sampled.
    pub fn time_index(&self, tau: f64) -> Option<usize> {
        self.times.iter().position(|&t| (t - tau).abs() <= 1e-12 * (1.0 + tau.abs()))
    }
}

fn check_vacuum(traj: &Trajectory, floor: f64) -> Result<(), SolverError> {
    let min_rho = traj.snapshots.iter().flat_map(|s| s.rho.iter().copied()).fold(f64::INFINITY, f64::min);
    let threshold = 10.0 * floor;
    if !(min_rho >= threshold) {
        return Err(SolverError::ReferenceInvalid { min_rho, threshold });
    }
    Ok(())
}

/// Runs on a grid refined by `factor` and cell-averages `(ρ, ρu)` back to
/// `cfg.grid`.
pub fn make_reference<F: Fn(f64) -> (f64, f64)>(
    cfg: &SolverConfig,
    init: F,
    factor: usize,
) -> Result<StrongSolutionRef, SolverError> {
    if factor == 0 {
        return Err(SolverError::InvalidConfig("refinement factor must be >= 1".into()));
    }
    let fine = SolverConfig {
        grid: cfg.grid.refined(factor)?,
        ..cfg.clone()
    };
    let init_state = FluidState::from_profile(&fine.grid, init);
    let threshold = 10.0 * cfg.floor;
    let min0 = init_state.rho.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min0 >= threshold) {
        return Err(SolverError::ReferenceInvalid { min_rho: min0, threshold });
    }
    let traj = run(&fine, &init_state)?;
    check_vacuum(&traj, cfg.floor)?;
    let n = cfg.grid.n;
    let average = |f: &[f64]| -> Vec<f64> {
        (0..n).map(|i| f[i * factor..(i + 1) * factor].iter().sum::<f64>() / factor as f64).collect()
    };
    let mut r = Vec::new();
    let mut u = Vec::new();
    for s in &traj.snapshots {
        let rc = average(&s.rho);
        let mc = average(&s.m);
        u.push(rc.iter().zip(&mc).map(|(&a, &b)| b / a).collect());
        r.push(rc);
    }
    StrongSolutionRef::from_fields(cfg.grid, traj.times(), r, u, factor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pressure_law::PressureLaw;

    fn cfg() -> SolverConfig {
        let mut c = SolverConfig::new(Grid1D::new(16, 1.0).unwrap(), PressureLaw::power(1.0, 2.0).unwrap(), 0.1, 0.05);
        c.output_dt = Some(0.025);
        c
    }

    #[test]
    fn constant_reference() {
        let r = make_reference(&cfg(), |_| (1.0, 0.0), 4).unwrap();
        assert!(r.r.iter().flatten().all(|&v| v == 1.0));
        assert!(r.u_x.iter().chain(&r.u_t).chain(&r.r_x).flatten().all(|&v| v == 0.0));
        assert_eq!(r.norms.u_c1, 0.0);
    }

    #[test]
    fn vacuum_rejected() {
        let err = make_reference(&cfg(), |x| (if x < 0.3 { 0.0 } else { 1.0 }, 0.0), 2).unwrap_err();
        assert!(matches!(err, SolverError::ReferenceInvalid { .. }));
    }
}
