//! Weak-form residuals of Dirac measures built from solver runs, under
//! grid refinement.

use rdmv::pressure_law::PressureLaw;
use rdmv::solver1d::{run, FluidState, Grid1D, SolverConfig};
use rdmv::young_measure::{assemble, residual_suite, Physics, RenormFunction, ResidualKind, ResidualTolerance};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let kinds = [
        ResidualKind::Continuity,
        ResidualKind::Renormalized,
        ResidualKind::Momentum,
        ResidualKind::Compatibility,
    ];
    let mut previous: Option<Vec<f64>> = None;
    for n in [64, 128, 256] {
        let grid = Grid1D::new(n, 1.0)?;
        let mut cfg = SolverConfig::new(grid, PressureLaw::power(1.0, 2.0)?, 0.1, 0.2);
        cfg.output_dt = Some(0.64 / n as f64);
        let init = FluidState::from_profile(&grid, |x| {
            (1.0 + 0.3 * (-((x - 0.5) / 0.1).powi(2)).exp(), 0.2 * (std::f64::consts::PI * x).sin())
        });
        let traj = run(&cfg, &init)?;
        let v = assemble(&[&traj], cfg.floor)?;
        let renorm = RenormFunction::truncation(1.0, 1.25)?;
        let rows = residual_suite(&v, &Physics::from(&cfg), &renorm, None, ResidualTolerance::default(), &kinds)?;
        let maxes: Vec<f64> = kinds
            .iter()
            .map(|k| {
                rows.iter()
                    .filter(|r| r.test_fn_id.starts_with(k.label()))
                    .map(|r| r.residual.abs())
                    .fold(0.0, f64::max)
            })
            .collect();
        let passed = rows.iter().filter(|r| r.pass).count();
        print!("N = {n:4}  pass {passed}/{}  ", rows.len());
        for (k, m) in kinds.iter().zip(&maxes) {
            print!("{} {m:.3e} ", k.label());
        }
        if let Some(p) = &previous {
            print!(" orders:");
            for (a, b) in p.iter().zip(&maxes) {
                print!(" {:.2}", (a / b).log2());
            }
        }
        println!();
        previous = Some(maxes);
    }
    Ok(())
}
