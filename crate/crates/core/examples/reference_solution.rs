//! Strong reference solution from a refined run, and its regularity norms.

use std::f64::consts::PI;

use rdmv::pressure_law::PressureLaw;
use rdmv::solver1d::{make_reference, Grid1D, SolverConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let init = |x: f64| (1.2 + 0.3 * (2.0 * PI * x).cos(), 0.2 * (PI * x).sin());
    for factor in [1, 2, 4, 8] {
        let mut cfg = SolverConfig::new(Grid1D::new(64, 1.0)?, PressureLaw::power(1.0, 2.0)?, 0.1, 0.2);
        cfg.output_dt = Some(0.02);
        let reference = make_reference(&cfg, init, factor)?;
        let n = &reference.norms;
        println!(
            "factor {factor}: |U|_C1 = {:.4}  |U_x| = {:.4}  |U_xx| = {:.4}  |r|_C1 = {:.4}  r in [{:.4}, {:.4}]",
            n.u_c1, n.ux_sup, n.uxx_sup, n.r_c1, n.r_min, n.r_max
        );
    }
    Ok(())
}
