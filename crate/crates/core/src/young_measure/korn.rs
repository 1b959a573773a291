use super::{DiscreteYoungMeasure, MeasureError, SpaceGrid};
use crate::weak_strong::tensor::traceless;

/// Comparison velocity `ũ` with its gradient, sampled like a measure:
/// index `(t_idx * n_space + x_idx)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    pub space: SpaceGrid,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Row-major `∂_j ũ_i` at `[i * d + j]` per cell.
    pub gradient: Vec<f64>,
}

impl VelocityField {
    pub fn zero(space: SpaceGrid, times: Vec<f64>) -> Self {
        let n = space.cells() * times.len();
        let d = space.dim();
        Self {
            space,
            times,
            values: vec![0.0; n * d],
            gradient: vec![0.0; n * d * d],
        }
    }

    /// Samples `u(t, x)` and its exact gradient at cell centres.
    pub fn from_fn<U, G>(space: SpaceGrid, times: Vec<f64>, u: U, grad: G) -> Self
    where
        U: Fn(f64, &[f64]) -> Vec<f64>,
        G: Fn(f64, &[f64]) -> Vec<f64>,
    {
        let mut values = Vec::new();
        let mut gradient = Vec::new();
        for &t in &times {
            for c in 0..space.cells() {
                let x = space.center(c);
                values.extend(u(t, &x));
                gradient.extend(grad(t, &x));
            }
        }
        Self {
            space,
            times,
            values,
            gradient,
        }
    }

    /// Replaces the gradient by central differences, with odd reflection
    /// across the boundary (zero trace).
    pub fn with_difference_gradient(mut self) -> Self {
        let d = self.space.dim();
        let n = self.space.cells();
        let mut stride = vec![1usize; d];
        for k in (0..d.saturating_sub(1)).rev() {
            stride[k] = stride[k + 1] * self.space.dims[k + 1];
        }
        for t in 0..self.times.len() {
            let base = t * n;
            for c in 0..n {
                let idx = self.space.unflatten(c);
                for j in 0..d {
                    let h = self.space.spacing(j);
                    for i in 0..d {
                        let at = |cell: usize| self.values[(base + cell) * d + i];
                        let here = at(c);
                        let lo = if idx[j] == 0 { -here } else { at(c - stride[j]) };
                        let hi = if idx[j] + 1 == self.space.dims[j] { -here } else { at(c + stride[j]) };
                        self.gradient[((base + c) * d + i) * d + j] = (hi - lo) / (2.0 * h);
                    }
                }
            }
        }
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KornReport {
    /// `∫∫⟨|v - ũ|²⟩`
    pub lhs: f64,
    /// `∫∫⟨|T(D) - T(∇ũ)|²⟩`
    pub rhs: f64,
    /// `lhs / rhs`; zero when both vanish.
    pub c_p_estimate: f64,
    pub c_p_config: f64,
    pub pass: bool,
}

/// Checks `lhs ≤ c_P rhs` for `d ∈ {2, 3}`.
pub fn korn_poincare_check(
    v: &DiscreteYoungMeasure,
    u_tilde: &VelocityField,
    c_p_config: f64,
) -> Result<KornReport, MeasureError> {
    let d = v.dim();
    if d == 1 {
        return Err(MeasureError::UnsupportedDimension(1));
    }
    if !(2..=3).contains(&d) {
        return Err(MeasureError::UnsupportedDimension(d));
    }
    if u_tilde.space != v.space || u_tilde.times.len() != v.times.len() {
        return Err(MeasureError::IncompatibleEnsemble("comparison field does not match the measure grid".into()));
    }
    let n = v.n_space();
    let vol = v.space.cell_volume();
    let nt = v.times.len();
    let mut lhs_rate = vec![0.0; nt];
    let mut rhs_rate = vec![0.0; nt];
    for t in 0..nt {
        for x in 0..n {
            let cell = v.cell_index(t, x);
            let ut = &u_tilde.values[cell * d..(cell + 1) * d];
            let t_grad = traceless(&u_tilde.gradient[cell * d * d..(cell + 1) * d * d], d);
            for atom in v.atoms(cell) {
                let dv: f64 = atom.v.iter().zip(ut).map(|(a, b)| (a - b) * (a - b)).sum();
                let td = traceless(atom.d, d);
                let dt: f64 = td.iter().zip(&t_grad).map(|(a, b)| (a - b) * (a - b)).sum();
                lhs_rate[t] += atom.w * dv * vol;
                rhs_rate[t] += atom.w * dt * vol;
            }
        }
    }
    let integrate = |rate: &[f64]| {
        if nt == 1 {
            rate[0]
        } else {
            *super::residuals::cumulative_trapezoid(&v.times, rate).last().unwrap()
        }
    };
    let lhs = integrate(&lhs_rate);
    let rhs = integrate(&rhs_rate);
    let c_p_estimate = if lhs == 0.0 { 0.0 } else { lhs / rhs };
    Ok(KornReport {
        lhs,
        rhs,
        c_p_estimate,
        c_p_config,
        pass: lhs <= c_p_config * rhs * (1.0 + 1e-12) || lhs == 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::young_measure::PhaseAtom;
    use std::f64::consts::PI;

    fn synthetic(n: usize, scale: f64) -> (DiscreteYoungMeasure, VelocityField) {
        let space = SpaceGrid {
            dims: vec![n, n],
            lengths: vec![1.0, 1.0],
        };
        let cells = (0..space.cells())
            .map(|c| {
                let x = space.center(c);
                let (sx, sy, cx, cy) = ((PI * x[0]).sin(), (PI * x[1]).sin(), (PI * x[0]).cos(), (PI * x[1]).cos());
                let (a, b) = (scale * PI * cx * sy, scale * PI * sx * cy);
                vec![PhaseAtom {
                    s: 1.0,
                    v: vec![scale * sx * sy, 0.0],
                    d: vec![a, 0.5 * b, 0.5 * b, 0.0],
                    w: 1.0,
                }]
            })
            .collect();
        let v = DiscreteYoungMeasure::from_atoms(space.clone(), vec![0.0], cells, vec![]).unwrap();
        (v, VelocityField::zero(space, vec![0.0]))
    }

    #[test]
    fn synthetic_ratio_matches_analytic() {
        let (v, u) = synthetic(200, 1.0);
        let rep = korn_poincare_check(&v, &u, 1.0).unwrap();
        assert!((rep.lhs - 0.25).abs() < 1e-6);
        assert!((rep.rhs - PI * PI).abs() < 1e-4);
        assert!((rep.c_p_estimate - 0.25 / (PI * PI)).abs() < 1e-6);
        assert!(rep.pass);
    }

    #[test]
    fn ratio_is_scale_invariant() {
        let (a, u) = synthetic(40, 1.0);
        let (b, _) = synthetic(40, 2.0);
        let ra = korn_poincare_check(&a, &u, 1.0).unwrap();
        let rb = korn_poincare_check(&b, &u, 1.0).unwrap();
        assert!((rb.lhs / ra.lhs - 4.0).abs() < 1e-12);
        assert!((rb.c_p_estimate - ra.c_p_estimate).abs() < 1e-10);
    }

    #[test]
    fn identical_fields_pass_trivially() {
        let (v, _) = synthetic(8, 1.0);
        let space = v.space.clone();
        let u = VelocityField::from_fn(
            space,
            vec![0.0],
            |_, x| vec![(PI * x[0]).sin() * (PI * x[1]).sin(), 0.0],
            |_, x| {
                let (a, b) = (PI * (PI * x[0]).cos() * (PI * x[1]).sin(), PI * (PI * x[0]).sin() * (PI * x[1]).cos());
                vec![a, b, 0.0, 0.0]
            },
        );
        let rep = korn_poincare_check(&v, &u, 1e-3).unwrap();
        assert!(rep.lhs < 1e-28 && rep.rhs < 1e-20 && rep.pass);
    }

    #[test]
    fn one_dimension_unsupported() {
        let space = SpaceGrid { dims: vec![4], lengths: vec![1.0] };
        let cells = (0..4).map(|_| vec![PhaseAtom { s: 1.0, v: vec![0.0], d: vec![0.0], w: 1.0 }]).collect();
        let v = DiscreteYoungMeasure::from_atoms(space.clone(), vec![0.0], cells, vec![]).unwrap();
        let u = VelocityField::zero(space, vec![0.0]);
        assert_eq!(korn_poincare_check(&v, &u, 1.0), Err(MeasureError::UnsupportedDimension(1)));
    }

    #[test]
    fn difference_gradient_converges() {
        let space = SpaceGrid { dims: vec![64, 64], lengths: vec![1.0, 1.0] };
        let f = |_: f64, x: &[f64]| vec![(PI * x[0]).sin() * (PI * x[1]).sin(), 0.0];
        let exact = VelocityField::from_fn(space.clone(), vec![0.0], f, |_, x| {
            vec![PI * (PI * x[0]).cos() * (PI * x[1]).sin(), PI * (PI * x[0]).sin() * (PI * x[1]).cos(), 0.0, 0.0]
        });
        let fd = exact.clone().with_difference_gradient();
        let err = exact.gradient.iter().zip(&fd.gradient).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 5e-3, "{err}");
    }
}
