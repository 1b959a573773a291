use super::{StrongSolutionRef, WeakStrongError};
use crate::pressure_law::PressureLaw;
use crate::young_measure::{AtomRef, DiscreteYoungMeasure};

/// `½ s |v - U|² + H(s) - H(r) - H'(r)(s - r)` for one atom.
pub fn relative_energy_density(law: &PressureLaw, s: f64, v: f64, r: f64, u: f64) -> Result<f64, WeakStrongError> {
    Ok(0.5 * s * (v - u) * (v - u) + law.bregman_h(s, r)?)
}

pub(crate) fn check_alignment(v: &DiscreteYoungMeasure, reference: &StrongSolutionRef) -> Result<Vec<usize>, WeakStrongError> {
    if v.dim() != 1 || v.n_space() != reference.grid.n || (v.space.lengths[0] - reference.grid.length).abs() > 1e-12 {
        return Err(WeakStrongError::InvalidReference("reference grid does not match the measure".into()));
    }
    v.times
        .iter()
        .map(|&t| {
            reference
                .time_index(t)
                .ok_or_else(|| WeakStrongError::InvalidReference(format!("reference not sampled at t = {t}")))
        })
        .collect()
}

fn energy_at(
    v: &DiscreteYoungMeasure,
    law: &PressureLaw,
    reference: &StrongSolutionRef,
    j: usize,
    jr: usize,
) -> Result<f64, WeakStrongError> {
    let dx = v.space.spacing(0);
    let mut total = 0.0;
    for x in 0..v.n_space() {
        let (r, u) = (reference.r[jr][x], reference.u[jr][x]);
        for a in v.atoms(v.cell_index(j, x)) {
            let AtomRef { s, v: vel, w, .. } = a;
            total += w * relative_energy_density(law, s, vel[0], r, u)?;
        }
    }
    Ok(total * dx)
}

/// `∫⟨V_τ; ½s|v - U|² + B_H(s, r)⟩ dx`.
pub fn relative_energy(
    v: &DiscreteYoungMeasure,
    law: &PressureLaw,
    reference: &StrongSolutionRef,
    tau: f64,
) -> Result<f64, WeakStrongError> {
    let map = check_alignment(v, reference)?;
    let j = v.time_index(tau)?;
    energy_at(v, law, reference, j, map[j])
}

pub fn relative_energy_series(
    v: &DiscreteYoungMeasure,
    law: &PressureLaw,
    reference: &StrongSolutionRef,
) -> Result<Vec<f64>, WeakStrongError> {
    let map = check_alignment(v, reference)?;
    (0..v.times.len()).map(|j| energy_at(v, law, reference, j, map[j])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formula_example() {
        let law = PressureLaw::power(1.0, 2.0).unwrap();
        assert!((relative_energy_density(&law, 2.0, 1.0, 1.0, 0.0).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(relative_energy_density(&law, 1.3, 0.2, 1.3, 0.2).unwrap(), 0.0);
        let base = relative_energy_density(&law, 1.5, 0.5, 1.5, 0.0).unwrap();
        let doubled = relative_energy_density(&law, 1.5, 1.0, 1.5, 0.0).unwrap();
        assert_eq!(doubled, 4.0 * base);
    }
}
