//! Assemble a Young measure from a perturbed ensemble, take moments, and
//! round-trip it through the text format.

use std::f64::consts::PI;

use rdmv::pressure_law::PressureLaw;
use rdmv::solver1d::{run, FluidState, Grid1D, SolverConfig};
use rdmv::young_measure::{assemble, read_measure, write_measure, AtomRef};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = Grid1D::new(64, 1.0)?;
    let mut cfg = SolverConfig::new(grid, PressureLaw::power(1.0, 2.0)?, 0.1, 0.1);
    cfg.output_dt = Some(0.02);
    let ensemble = [0.0, 0.05, -0.05]
        .iter()
        .map(|eps| run(&cfg, &FluidState::from_profile(&grid, |x| (1.0 + eps * (2.0 * PI * x).cos(), 0.0))))
        .collect::<Result<Vec<_>, _>>()?;
    let v = assemble(&ensemble.iter().collect::<Vec<_>>(), cfg.floor)?;
    println!("{} times x {} cells x {} atoms", v.times.len(), v.n_space(), v.atoms_per_cell());

    let variance = v.moment(|a: &AtomRef| a.s * a.s)?;
    let mean = v.moment(|a: &AtomRef| a.s)?;
    let j = v.times.len() - 1;
    let spread: f64 = (0..v.n_space()).map(|x| variance[j][x] - mean[j][x].powi(2)).fold(0.0, f64::max);
    println!("max density variance at t = {}: {spread:.3e}", v.times[j]);

    let mut text = Vec::new();
    write_measure(&v, &mut text)?;
    let back = read_measure(text.as_slice())?;
    println!("text format: {} bytes, round-trip equal: {}", text.len(), back == v);
    Ok(())
}
