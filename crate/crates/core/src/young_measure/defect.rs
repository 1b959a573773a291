//! Tail-difference estimates of the concentration defects of a sequence of
//! approximate solutions. These are finite-sequence estimators of weak-*
//! limit objects, not the limits themselves.

use super::residuals::cumulative_trapezoid;
use super::{AtomRef, DiscreteYoungMeasure, MeasureError, Physics};
use crate::solver1d::{velocity_gradient, Trajectory};

/// `ξ` divides by `max(D, XI_FLOOR)`.
pub const XI_FLOOR: f64 = 1e-14;
/// `ξ` is reported as not meaningful when `D` is below this.
pub const XI_MEANINGFUL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefectOptions {
    /// Number of trailing sequence members averaged; default `⌈n/2⌉`.
    pub tail: Option<usize>,
    /// Weight of `ζ` in `D = E∞ + Cζ + σ∞`.
    pub c: f64,
}

impl Default for DefectOptions {
    fn default() -> Self {
        Self { tail: None, c: 1.0 }
    }
}

/// A negative pre-clip value that was set to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ClipEntry {
    pub component: &'static str,
    pub t_idx: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DefectReport {
    pub times: Vec<f64>,
    pub e_inf: Vec<f64>,
    /// Cumulative dissipation gap up to each time.
    pub sigma_inf: Vec<f64>,
    pub zeta: Vec<f64>,
    /// `∫δ_k ρ_k^Γ` per sequence member and time.
    pub zeta_levels: Vec<Vec<f64>>,
    pub d_total: Vec<f64>,
    /// `r^M` density per time and cell.
    pub rm: Vec<Vec<f64>>,
    /// `∫|r^M|` per time.
    pub rm_total: Vec<f64>,
    pub xi: Vec<f64>,
    pub xi_meaningful: Vec<bool>,
    pub c: f64,
    pub tail: usize,
    pub clip_log: Vec<ClipEntry>,
    pub metadata: String,
}

impl DefectReport {
    /// The report of a sequence with no defect.
    pub fn zero(times: Vec<f64>, n_space: usize) -> Self {
        let nt = times.len();
        Self {
            times,
            e_inf: vec![0.0; nt],
            sigma_inf: vec![0.0; nt],
            zeta: vec![0.0; nt],
            zeta_levels: Vec::new(),
            d_total: vec![0.0; nt],
            rm: vec![vec![0.0; n_space]; nt],
            rm_total: vec![0.0; nt],
            xi: vec![0.0; nt],
            xi_meaningful: vec![false; nt],
            c: 1.0,
            tail: 0,
            clip_log: Vec::new(),
            metadata: "zero defect".into(),
        }
    }

    pub fn sup_xi(&self) -> f64 {
        self.xi
            .iter()
            .zip(&self.xi_meaningful)
            .filter(|(_, &ok)| ok)
            .map(|(x, _)| *x)
            .fold(0.0, f64::max)
    }
}

fn clip(value: f64, component: &'static str, t_idx: usize, log: &mut Vec<ClipEntry>) -> f64 {
    if value < 0.0 {
        log.push(ClipEntry { component, t_idx, value });
        0.0
    } else {
        value
    }
}

/// Estimates `E∞, σ∞, ζ, r^M, ξ, D` from `sequence` (pairs of trajectory
/// and its regularization weight δ) against the measure `v`.
pub fn estimate_defect(
    sequence: &[(&Trajectory, f64)],
    v: &DiscreteYoungMeasure,
    physics: &Physics,
    big_gamma: f64,
    floor: f64,
    opts: DefectOptions,
) -> Result<DefectReport, MeasureError> {
    if sequence.len() < 2 {
        return Err(MeasureError::CannotEstimate(format!("sequence has {} member(s), need >= 2", sequence.len())));
    }
    if v.dim() != 1 {
        return Err(MeasureError::Invalid("defect estimation is one-dimensional".into()));
    }
    let n = v.n_space();
    let nt = v.times.len();
    let dx = v.space.spacing(0);
    for (k, (traj, _)) in sequence.iter().enumerate() {
        let times = traj.times();
        if traj.grid.n != n
            || (traj.grid.length - v.space.lengths[0]).abs() > 1e-12
            || times.len() != nt
            || times.iter().zip(&v.times).any(|(a, b)| (a - b).abs() > 1e-12 * (1.0 + b.abs()))
        {
            return Err(MeasureError::IncompatibleEnsemble(format!("sequence member {k} does not match the measure grid")));
        }
    }
    let tail = opts.tail.unwrap_or(sequence.len().div_ceil(2)).clamp(1, sequence.len());
    let members = &sequence[sequence.len() - tail..];
    let law = &physics.law;
    let lambda = physics.lambda;

    let zeta_levels: Vec<Vec<f64>> = sequence
        .iter()
        .map(|(traj, delta)| {
            traj.snapshots
                .iter()
                .map(|s| s.rho.iter().map(|r| delta * r.powf(big_gamma)).sum::<f64>() * dx)
                .collect()
        })
        .collect();

    let mut e_comp = vec![0.0; nt];
    let mut zeta_raw = vec![0.0; nt];
    let mut rm_comp = vec![vec![0.0; n]; nt];
    let mut diss_comp = vec![0.0; nt];
    let weight = 1.0 / tail as f64;
    for (traj, delta) in members {
        let mut rate = Vec::with_capacity(nt);
        for (j, snap) in traj.snapshots.iter().enumerate() {
            let u = snap.velocity(floor);
            let g = velocity_gradient(&u, dx);
            let mut e = 0.0;
            let mut z = 0.0;
            for i in 0..n {
                let r = snap.rho[i];
                let reg = delta * r.powf(big_gamma);
                e += 0.5 * r * u[i] * u[i] + law.potential(r)?;
                z += reg;
                rm_comp[j][i] += weight * (r * u[i] * u[i] + law.pressure(r)? + reg);
            }
            e_comp[j] += weight * e * dx;
            zeta_raw[j] += weight * z * dx;
            rate.push(g.iter().map(|x| lambda * x * x).sum::<f64>() * dx);
        }
        for (acc, c) in diss_comp.iter_mut().zip(cumulative_trapezoid(&v.times, &rate)) {
            *acc += weight * c;
        }
    }

    let e_meas = v.moment(|a: &AtomRef| 0.5 * a.s * a.v[0] * a.v[0] + law.potential(a.s).unwrap_or(f64::NAN))?;
    let rm_meas = v.moment(|a: &AtomRef| a.s * a.v[0] * a.v[0] + law.pressure(a.s).unwrap_or(f64::NAN))?;
    let diss_meas = super::residuals::measure_dissipation(v, physics)?;

    let mut clip_log = Vec::new();
    let mut report = DefectReport::zero(v.times.clone(), n);
    report.zeta_levels = zeta_levels;
    report.c = opts.c;
    report.tail = tail;
    for j in 0..nt {
        let e_v = e_meas[j].iter().sum::<f64>() * dx;
        report.e_inf[j] = clip(e_comp[j] - e_v, "E_inf", j, &mut clip_log);
        report.zeta[j] = clip(zeta_raw[j], "zeta", j, &mut clip_log);
        report.sigma_inf[j] = clip(diss_comp[j] - diss_meas[j], "sigma_inf", j, &mut clip_log);
        report.d_total[j] = report.e_inf[j] + opts.c * report.zeta[j] + report.sigma_inf[j];
        for i in 0..n {
            report.rm[j][i] = rm_comp[j][i] - rm_meas[j][i];
        }
        report.rm_total[j] = report.rm[j].iter().map(|r| r.abs()).sum::<f64>() * dx;
        report.xi[j] = report.rm_total[j] / report.d_total[j].max(XI_FLOOR);
        report.xi_meaningful[j] = report.d_total[j] >= XI_MEANINGFUL;
    }
    report.clip_log = clip_log;
    report.metadata = format!(
        "estimator: tail average over the last {tail} of {} sequence members minus measure moments; \
         approximates weak-* limit defects, is not the limit",
        sequence.len()
    );
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pressure_law::PressureLaw;
    use crate::solver1d::{run, FluidState, Grid1D, SolverConfig};
    use crate::young_measure::assemble;

    fn run_delta(delta: f64) -> (Trajectory, SolverConfig) {
        let grid = Grid1D::new(32, 1.0).unwrap();
        let mut cfg = SolverConfig::new(grid, PressureLaw::power(1.0, 2.0).unwrap(), 0.1, 0.05);
        cfg.delta = delta;
        cfg.output_dt = Some(0.01);
        let init = FluidState::from_profile(&grid, |x| (1.0 + 0.2 * (std::f64::consts::PI * x).cos(), 0.0));
        (run(&cfg, &init).unwrap(), cfg)
    }

    #[test]
    fn duplicated_sequence_has_no_defect() {
        let (t, cfg) = run_delta(0.0);
        let v = assemble(&[&t], cfg.floor).unwrap();
        let rep = estimate_defect(&[(&t, 0.0), (&t, 0.0)], &v, &Physics::from(&cfg), 2.0, cfg.floor, DefectOptions::default())
            .unwrap();
        for j in 0..rep.times.len() {
            assert_eq!(rep.e_inf[j], 0.0);
            assert_eq!(rep.zeta[j], 0.0);
            assert_eq!(rep.sigma_inf[j], 0.0);
            assert_eq!(rep.rm_total[j], 0.0);
            assert!(!rep.xi_meaningful[j]);
        }
        assert!(rep.metadata.contains("estimator"));
    }

    #[test]
    fn short_sequence_rejected() {
        let (t, cfg) = run_delta(0.0);
        let v = assemble(&[&t], cfg.floor).unwrap();
        let err = estimate_defect(&[(&t, 0.0)], &v, &Physics::from(&cfg), 2.0, cfg.floor, DefectOptions::default());
        assert!(matches!(err, Err(MeasureError::CannotEstimate(_))));
    }

    #[test]
    fn delta_sequence_concentration_matches_zeta() {
        let runs: Vec<_> = [1e-2, 1e-3, 1e-4].iter().map(|&d| (run_delta(d).0, d)).collect();
        let seq: Vec<(&Trajectory, f64)> = runs.iter().map(|(t, d)| (t, *d)).collect();
        let (_, cfg) = run_delta(0.0);
        let v = assemble(&[seq[1].0, seq[2].0], cfg.floor).unwrap();
        let rep = estimate_defect(&seq, &v, &Physics::from(&cfg), 2.0, cfg.floor, DefectOptions::default()).unwrap();
        assert_eq!(rep.tail, 2);
        for j in 0..rep.times.len() {
            assert!(rep.zeta_levels[0][j] > rep.zeta_levels[1][j] && rep.zeta_levels[1][j] > rep.zeta_levels[2][j]);
            assert!(rep.rm_total[j] <= rep.e_inf[j] + rep.zeta[j] + 1e-8);
        }
    }
}
