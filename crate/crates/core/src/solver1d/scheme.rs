use std::time::Instant;

use super::{FluidState, Grid1D, SolverConfig, SolverError};

/// Safety factor on the Rusanov dissipation speed.
const SPEED_MARGIN: f64 = 1.1;
/// Negative densities above `-NEG_TOL * max ρ` are rounding and clamped.
const NEG_TOL: f64 = 1e-13;

/// Energy bookkeeping of one accepted step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepBudget {
    pub t: f64,
    pub dt: f64,
    pub energy_before: f64,
    pub energy_after: f64,
    pub dissipation: f64,
}

impl StepBudget {
    /// `E(t_k) - E(t_{k+1}) - dissipation`; nonnegative for a stable step.
    pub fn slack(&self) -> f64 {
        self.energy_before - self.energy_after - self.dissipation
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub grid: Grid1D,
    pub snapshots: Vec<FluidState>,
    pub energy: Vec<f64>,
    /// Cumulative `∫∫ λ |∂x u|²` up to each snapshot.
    pub cum_dissipation: Vec<f64>,
    pub budgets: Vec<StepBudget>,
    pub steps: usize,
    /// `false` when the wall-clock budget ran out before `t_end`.
    pub complete: bool,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    pub fn last(&self) -> &FluidState {
        self.snapshots.last().expect("trajectory holds the initial state")
    }
}

/// `dt_max = CFL dx / max(|u| + c)`.
pub fn max_admissible_dt(state: &FluidState, cfg: &SolverConfig) -> f64 {
    let u = state.velocity(cfg.floor);
    let speed = state
        .rho
        .iter()
        .zip(&u)
        .map(|(&r, &v)| v.abs() + cfg.sound_speed(r))
        .fold(0.0, f64::max);
    cfg.cfl * cfg.grid.dx() / speed
}

fn flux(cfg: &SolverConfig, rho: f64, m: f64, u: f64) -> (f64, f64) {
    (m, m * u + cfg.total_pressure(rho))
}

/// Advances `state` by `dt`.
pub fn step(state: &FluidState, cfg: &SolverConfig, dt: f64) -> Result<FluidState, SolverError> {
    let max_dt = max_admissible_dt(state, cfg);
    if !(dt > 0.0) || dt > max_dt * (1.0 + 1e-12) {
        return Err(SolverError::StepRejected { dt, max_dt });
    }
    let n = cfg.grid.n;
    let dx = cfg.grid.dx();
    let ratio = dt / dx;
    let u = state.velocity(cfg.floor);
    let speed: Vec<f64> = (0..n).map(|i| u[i].abs() + cfg.sound_speed(state.rho[i])).collect();
    let fluxes: Vec<(f64, f64)> = (0..n).map(|i| flux(cfg, state.rho[i], state.m[i], u[i])).collect();

    // face j sits between cells j-1 and j; faces 0 and n are walls with
    // mirror ghosts (ρ, -m)
    let mut face = vec![(0.0, 0.0); n + 1];
    for (j, f) in face.iter_mut().enumerate() {
        let (l, r) = match j {
            0 => (0, 0),
            j if j == n => (n - 1, n - 1),
            j => (j - 1, j),
        };
        let a = SPEED_MARGIN * speed[l].max(speed[r]);
        let (ml, mr) = match j {
            0 => (-state.m[0], state.m[0]),
            j if j == n => (state.m[n - 1], -state.m[n - 1]),
            _ => (state.m[l], state.m[r]),
        };
        let (fl, fr) = match j {
            0 => ((-fluxes[0].0, fluxes[0].1), fluxes[0]),
            j if j == n => (fluxes[n - 1], (-fluxes[n - 1].0, fluxes[n - 1].1)),
            _ => (fluxes[l], fluxes[r]),
        };
        let (rl, rr) = (state.rho[l], state.rho[r]);
        *f = (
            0.5 * (fl.0 + fr.0) - 0.5 * a * (rr - rl),
            0.5 * (fl.1 + fr.1) - 0.5 * a * (mr - ml),
        );
    }

    let t = state.t + dt;
    let mut rho = Vec::with_capacity(n);
    let mut m_star = Vec::with_capacity(n);
    let rho_max = state.rho.iter().copied().fold(0.0, f64::max);
    for i in 0..n {
        let mut r = state.rho[i] - ratio * (face[i + 1].0 - face[i].0);
        if r < 0.0 {
            if r < -NEG_TOL * rho_max {
                return Err(SolverError::NegativeDensity { cell: i, rho: r, t });
            }
            r = 0.0;
        }
        rho.push(r);
        m_star.push(state.m[i] - ratio * (face[i + 1].1 - face[i].1));
    }

    let u_new = viscous_solve(&rho, &m_star, cfg.lambda * dt / (dx * dx));
    let m = rho
        .iter()
        .zip(&u_new)
        .map(|(&r, &v)| if r > cfg.floor { r * v } else { 0.0 })
        .collect();
    let next = FluidState { rho, m, t };
    for (cell, (&r, &mm)) in next.rho.iter().zip(&next.m).enumerate() {
        if !r.is_finite() || !mm.is_finite() {
            return Err(SolverError::NonFinite { cell, t });
        }
    }
    Ok(next)
}

/// Solves `ρ_i u_i - κ(u_{i+1} - 2u_i + u_{i-1}) = m_i` with ghosts
/// `u_{-1} = -u_0`, `u_n = -u_{n-1}` by the Thomas algorithm.
fn viscous_solve(rho: &[f64], rhs: &[f64], kappa: f64) -> Vec<f64> {
    let n = rho.len();
    let diag = |i: usize| rho[i] + if i == 0 || i == n - 1 { 3.0 * kappa } else { 2.0 * kappa };
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut b = diag(0);
    c[0] = -kappa / b;
    d[0] = rhs[0] / b;
    for i in 1..n {
        b = diag(i) + kappa * c[i - 1];
        c[i] = -kappa / b;
        d[i] = (rhs[i] + kappa * d[i - 1]) / b;
    }
    let mut u = vec![0.0; n];
    u[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        u[i] = d[i] - c[i] * u[i + 1];
    }
    u
}

/// `Σ dx (½ρu² + P(ρ) + δρ^Γ/(Γ-1))`, kinetic part zero on vacuum cells.
pub fn total_energy(state: &FluidState, cfg: &SolverConfig) -> Result<f64, SolverError> {
    let u = state.velocity(cfg.floor);
    let mut sum = 0.0;
    for (i, &r) in state.rho.iter().enumerate() {
        let reg = if cfg.delta > 0.0 {
            cfg.delta * r.powf(cfg.big_gamma) / (cfg.big_gamma - 1.0)
        } else {
            0.0
        };
        sum += 0.5 * state.m[i] * u[i] + cfg.law.potential(r)? + reg;
    }
    Ok(sum * cfg.grid.dx())
}

/// Central velocity gradient with odd ghosts at the walls.
pub fn velocity_gradient(u: &[f64], dx: f64) -> Vec<f64> {
    let n = u.len();
    (0..n)
        .map(|i| {
            let left = if i == 0 { -u[0] } else { u[i - 1] };
            let right = if i == n - 1 { -u[n - 1] } else { u[i + 1] };
            (right - left) / (2.0 * dx)
        })
        .collect()
}

/// `dt Σ dx λ (∂x u)²`.
pub fn dissipation_increment(state: &FluidState, cfg: &SolverConfig, dt: f64) -> f64 {
    let dx = cfg.grid.dx();
    let g = velocity_gradient(&state.velocity(cfg.floor), dx);
    dt * dx * cfg.lambda * g.iter().map(|v| v * v).sum::<f64>()
}

fn output_times(cfg: &SolverConfig) -> Vec<f64> {
    let mut times = Vec::new();
    if let Some(step) = cfg.output_dt {
        let mut k = 1;
        loop {
            let t = k as f64 * step;
            if t >= cfg.t_end * (1.0 - 1e-12) {
                break;
            }
            times.push(t);
            k += 1;
        }
    }
    if cfg.t_end > 0.0 {
        times.push(cfg.t_end);
    }
    times
}

/// Integrates from `init` to `cfg.t_end`, landing exactly on output times.
pub fn run(cfg: &SolverConfig, init: &FluidState) -> Result<Trajectory, SolverError> {
    cfg.validate()?;
    init.validate(&cfg.grid)?;
    let started = Instant::now();
    let mut state = FluidState { t: 0.0, ..init.clone() };
    let mut energy_now = total_energy(&state, cfg)?;
    let mut traj = Trajectory {
        grid: cfg.grid,
        snapshots: vec![state.clone()],
        energy: vec![energy_now],
        cum_dissipation: vec![0.0],
        budgets: Vec::new(),
        steps: 0,
        complete: true,
    };
    let mut cumulative = 0.0;
    for target in output_times(cfg) {
        while state.t < target {
            if let Some(limit) = cfg.wall_clock {
                if started.elapsed() > limit {
                    traj.complete = false;
                    return Ok(traj);
                }
            }
            let max_dt = max_admissible_dt(&state, cfg);
            let remaining = target - state.t;
            // split the last two steps evenly to avoid a sliver step
            let dt = if remaining <= max_dt {
                remaining
            } else if remaining < 2.0 * max_dt {
                0.5 * remaining
            } else {
                max_dt
            };
            let mut next = step(&state, cfg, dt)?;
            if remaining <= max_dt {
                next.t = target;
            }
            let dissipation = dissipation_increment(&next, cfg, dt);
            cumulative += dissipation;
            if cfg.track_budget {
                let energy_after = total_energy(&next, cfg)?;
                traj.budgets.push(StepBudget {
                    t: next.t,
                    dt,
                    energy_before: energy_now,
                    energy_after,
                    dissipation,
                });
                energy_now = energy_after;
            }
            state = next;
            traj.steps += 1;
        }
        traj.energy.push(total_energy(&state, cfg)?);
        traj.cum_dissipation.push(cumulative);
        traj.snapshots.push(state.clone());
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pressure_law::PressureLaw;

    fn cfg(n: usize) -> SolverConfig {
        SolverConfig::new(Grid1D::new(n, 1.0).unwrap(), PressureLaw::power(1.0, 2.0).unwrap(), 0.1, 0.1)
    }

    #[test]
    fn uniform_state_is_fixed_point() {
        let c = cfg(32);
        let s = FluidState::uniform(&c.grid, 1.3, 0.0);
        let dt = max_admissible_dt(&s, &c);
        let next = step(&s, &c, dt).unwrap();
        assert_eq!(next.rho, s.rho);
        assert_eq!(next.m, s.m);
    }

    #[test]
    fn oversized_step_rejected_with_max_dt() {
        let c = cfg(32);
        let s = FluidState::uniform(&c.grid, 1.0, 0.0);
        let max = max_admissible_dt(&s, &c);
        match step(&s, &c, 2.0 * max) {
            Err(SolverError::StepRejected { max_dt, .. }) => assert_eq!(max_dt, max),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn mass_conserved_single_step() {
        let c = cfg(64);
        let s = FluidState::from_profile(&c.grid, |x| (1.0, 0.1 * (std::f64::consts::PI * x).sin()));
        let next = step(&s, &c, max_admissible_dt(&s, &c)).unwrap();
        assert!((next.mass(&c.grid) - s.mass(&c.grid)).abs() < 1e-14);
    }

    #[test]
    fn energy_examples() {
        let mut c = cfg(16);
        assert_eq!(total_energy(&FluidState::uniform(&c.grid, 1.0, 0.0), &c).unwrap(), 0.0);
        assert!((total_energy(&FluidState::uniform(&c.grid, 2.0, 0.0), &c).unwrap() - 2.0).abs() < 1e-14);
        c.delta = 0.5;
        assert!((total_energy(&FluidState::uniform(&c.grid, 1.0, 0.0), &c).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn dissipation_of_parabola() {
        let mut c = cfg(4000);
        c.lambda = 1.0;
        let s = FluidState::from_profile(&c.grid, |x| (1.0, x * (1.0 - x)));
        assert!((dissipation_increment(&s, &c, 1.0) - 1.0 / 3.0).abs() < 1e-4);
        assert_eq!(dissipation_increment(&FluidState::uniform(&c.grid, 1.0, 0.0), &c, 1.0), 0.0);
        let single = dissipation_increment(&s, &c, 1.0);
        c.lambda = 2.0;
        assert_eq!(dissipation_increment(&s, &c, 1.0), 2.0 * single);
    }

    #[test]
    fn run_lands_on_output_times() {
        let mut c = cfg(32);
        c.output_dt = Some(0.025);
        let s = FluidState::from_profile(&c.grid, |x| (1.0 + 0.2 * (std::f64::consts::PI * x).cos(), 0.0));
        let traj = run(&c, &s).unwrap();
        let expected = [0.0, 0.025, 0.05, 0.075, 0.1];
        assert_eq!(traj.snapshots.len(), expected.len());
        for (t, e) in traj.times().iter().zip(expected) {
            assert!((t - e).abs() < 1e-15);
        }
        assert_eq!(traj.energy.len(), traj.snapshots.len());
        assert!(traj.energy.windows(2).all(|w| w[1] <= w[0]));
    }
}
