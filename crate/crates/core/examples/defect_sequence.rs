//! Defect bookkeeping along a vanishing artificial-pressure sequence.

use std::f64::consts::PI;

use rdmv::pressure_law::PressureLaw;
use rdmv::solver1d::{run, FluidState, Grid1D, SolverConfig};
use rdmv::young_measure::{assemble, estimate_defect, DefectOptions, Physics};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = Grid1D::new(128, 1.0)?;
    let deltas = [1e-2, 1e-3, 1e-4];
    let init = |x: f64| (1.0 + 0.3 * (-((x - 0.5) / 0.1).powi(2)).exp(), 0.2 * (PI * x).sin());
    let mut runs = Vec::new();
    for &delta in &deltas {
        let mut cfg = SolverConfig::new(grid, PressureLaw::power(1.0, 2.0)?, 0.1, 0.2);
        cfg.output_dt = Some(0.02);
        cfg.delta = delta;
        runs.push((run(&cfg, &FluidState::from_profile(&grid, init))?, cfg));
    }
    let (_, cfg) = &runs[0];
    let tail: Vec<_> = runs[1..].iter().map(|(t, _)| t).collect();
    let v = assemble(&tail, cfg.floor)?;
    let sequence: Vec<_> = runs.iter().zip(deltas).map(|((t, _), d)| (t, d)).collect();
    let opts = DefectOptions {
        tail: Some(2),
        ..DefectOptions::default()
    };
    let report = estimate_defect(&sequence, &v, &Physics::from(cfg), 2.0, cfg.floor, opts)?;
    println!("{:>5} {:>10} {:>10} {:>10} {:>10} {:>10}", "t", "E_inf", "zeta", "sigma", "D", "|r^M|");
    for j in (0..report.times.len()).step_by(2) {
        println!(
            "{:5.2} {:10.3e} {:10.3e} {:10.3e} {:10.3e} {:10.3e}",
            report.times[j], report.e_inf[j], report.zeta[j], report.sigma_inf[j], report.d_total[j], report.rm_total[j]
        );
    }
    for (k, series) in report.zeta_levels.iter().enumerate() {
        println!("delta = {:e}: final zeta = {:.4e}", deltas[k], series.last().unwrap());
    }
    Ok(())
}
