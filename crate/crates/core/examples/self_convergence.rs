//! Self-convergence of the solver on a smooth pulse: L¹ distance between
//! successive refinements, cell-averaged to the coarsest grid.

use rdmv::pressure_law::PressureLaw;
use rdmv::solver1d::{run, FluidState, Grid1D, SolverConfig};

fn density_at(n: usize, coarse: usize) -> Result<Vec<f64>, Box<dyn std::error::Error>> {
    let grid = Grid1D::new(n, 1.0)?;
    let cfg = SolverConfig::new(grid, PressureLaw::power(1.0, 2.0)?, 0.1, 0.1);
    let init = FluidState::from_profile(&grid, |x| (1.0 + 0.3 * (-((x - 0.5) / 0.1).powi(2)).exp(), 0.0));
    let rho = &run(&cfg, &init)?.last().rho.clone();
    let f = n / coarse;
    Ok((0..coarse).map(|i| rho[i * f..(i + 1) * f].iter().sum::<f64>() / f as f64).collect())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let levels = [64, 128, 256, 512];
    let fields: Vec<Vec<f64>> = levels.iter().map(|&n| density_at(n, 64)).collect::<Result<_, _>>()?;
    let mut prev = None;
    for k in 0..levels.len() - 1 {
        let err: f64 = fields[k].iter().zip(&fields[k + 1]).map(|(a, b)| (a - b).abs()).sum::<f64>() / 64.0;
        match prev {
            Some(p) => println!("N = {:4}: L1 diff = {err:.3e}, ratio = {:.3}", levels[k], p / err),
            None => println!("N = {:4}: L1 diff = {err:.3e}", levels[k]),
        }
        prev = Some(err);
    }
    Ok(())
}
