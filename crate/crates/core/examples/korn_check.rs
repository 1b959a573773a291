//! Tensor identities and the Korn-Poincaré check on a two-dimensional field
//! `v = (sin πx sin πy, 0)` on the unit square.

use std::f64::consts::PI;

use rdmv::weak_strong::tensor::{contract, stress, traceless};
use rdmv::young_measure::{korn_poincare_check, DiscreteYoungMeasure, PhaseAtom, SpaceGrid, VelocityField};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let a = [1.0, 2.0, 3.0, 4.0];
    let t = traceless(&a, 2);
    println!("T(A) = {t:?}, T:T = {}, 2 T:A = {}", contract(&t, &t), 2.0 * contract(&t, &a));
    println!("S(I) with mu = 2, lambda = 1: {:?}", stress(&[1.0, 0.0, 0.0, 1.0], 2.0, 1.0, 2));

    for n in [16, 32, 64, 128] {
        let space = SpaceGrid {
            dims: vec![n, n],
            lengths: vec![1.0, 1.0],
        };
        let cells = (0..space.cells())
            .map(|c| {
                let x = space.center(c);
                let (sx, sy) = ((PI * x[0]).sin(), (PI * x[1]).sin());
                let (dx, dy) = (PI * (PI * x[0]).cos() * sy, PI * sx * (PI * x[1]).cos());
                vec![PhaseAtom {
                    s: 1.0,
                    v: vec![sx * sy, 0.0],
                    d: vec![dx, 0.5 * dy, 0.5 * dy, 0.0],
                    w: 1.0,
                }]
            })
            .collect();
        let v = DiscreteYoungMeasure::from_atoms(space.clone(), vec![0.0], cells, vec![])?;
        let report = korn_poincare_check(&v, &VelocityField::zero(space, vec![0.0]), 1.0 / PI.powi(2))?;
        println!(
            "n = {n:4}: lhs {:.6} rhs {:.6} ratio {:.6e} (1/(4π²) = {:.6e}) pass {}",
            report.lhs,
            report.rhs,
            report.c_p_estimate,
            0.25 / PI.powi(2),
            report.pass
        );
    }
    Ok(())
}
