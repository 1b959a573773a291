//! Runs a smooth density pulse and prints the worst per-step energy budget.

use rdmv::pressure_law::PressureLaw;
use rdmv::solver1d::{run, FluidState, Grid1D, SolverConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for delta in [0.0, 1e-3] {
        let grid = Grid1D::new(256, 1.0)?;
        let mut cfg = SolverConfig::new(grid, PressureLaw::power(1.0, 2.0)?, 0.1, 0.5);
        cfg.delta = delta;
        cfg.track_budget = true;
        let init = FluidState::from_profile(&grid, |x| {
            let bump = (-((x - 0.5) / 0.1).powi(2)).exp();
            (1.0 + 0.3 * bump, 0.2 * (std::f64::consts::PI * x).sin())
        });
        let traj = run(&cfg, &init)?;
        let e0 = traj.energy[0];
        let worst = traj.budgets.iter().map(|b| b.slack()).fold(f64::INFINITY, f64::min);
        println!(
            "delta = {delta:e}: steps = {}, E(0) = {e0:.6e}, E(T) = {:.6e}, worst slack / E(0) = {:.3e}",
            traj.steps,
            traj.energy.last().unwrap(),
            worst / e0
        );
    }
    Ok(())
}
