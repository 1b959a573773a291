//! Relative energy between a perturbed ensemble and the unperturbed run,
//! for a pressure law with a non-monotone bump.

use std::f64::consts::PI;

use rdmv::pressure_law::{build_bump_q, PressureLaw};
use rdmv::solver1d::{run, FluidState, Grid1D, SolverConfig, StrongSolutionRef};
use rdmv::weak_strong::{relative_energy_report, EstimatorConfig};
use rdmv::young_measure::{assemble, Physics};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let law = PressureLaw::power(1.0, 2.0)?.with_bump(build_bump_q(1.0, 2.0, 0.05)?);
    let grid = Grid1D::new(128, 1.0)?;
    let mut cfg = SolverConfig::new(grid, law, 0.1, 0.5);
    cfg.output_dt = Some(0.01);
    let base = |x: f64| (1.2 + 0.3 * (2.0 * PI * x).cos(), 0.2 * (PI * x).sin());

    let reference_run = run(&cfg, &FluidState::from_profile(&grid, base))?;
    let reference = StrongSolutionRef::from_trajectory(&reference_run, cfg.floor)?;
    let eps = 1e-2;
    let members = (1..=4)
        .map(|k| {
            let init = FluidState::from_profile(&grid, |x| {
                let (r, u) = base(x);
                let phase = (k as f64 * PI * x).sin();
                (r * (1.0 + eps * phase), u + eps * phase)
            });
            run(&cfg, &init)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let v = assemble(&members.iter().collect::<Vec<_>>(), cfg.floor)?;

    let report = relative_energy_report(&v, &Physics::from(&cfg), &reference, None, &EstimatorConfig::default(), 1.0)?;
    let c = &report.constants;
    println!(
        "band [{:.3}, {:.3}]  C_max {:.3}  G {:.3}  K5 {:.3e}  C_total {:.3}",
        c.cutoff.r1,
        c.cutoff.r2,
        c.c_max,
        c.g_sup,
        c.k_5,
        c.c_total()
    );
    for row in report.rows.iter().step_by(10) {
        println!(
            "t {:.2}  E {:.3e}  I2 {:+.2e}/{:.2e}  I3 {:+.2e}/{:.2e}  I4 {:+.2e}/{:.2e}  I5 {:+.2e}/{:.2e}",
            row.tau, row.e_mv, row.i2, row.bound2, row.i3, row.bound3, row.i4, row.bound4, row.i5, row.bound5
        );
    }
    println!("bounds hold: {}  worst {:?}", report.bounds_hold(), report.worst_relative_slack());
    println!("{}", report.verdict.summary());
    Ok(())
}
