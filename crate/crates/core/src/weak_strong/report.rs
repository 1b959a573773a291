use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::remainder::{remainder_series, BoundConstants, EstimatorConfig, RemainderTerms};
use super::{gronwall_verdict, GronwallVerdict, StrongSolutionRef, WeakStrongError};
use crate::young_measure::{DefectReport, DiscreteYoungMeasure, Physics};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelativeEnergyRow {
    pub tau: f64,
    pub e_mv: f64,
    pub d: f64,
    pub i2: f64,
    pub i3: f64,
    pub i4: f64,
    pub i5: f64,
    pub bound2: f64,
    pub bound3: f64,
    pub bound4: f64,
    pub bound5: f64,
    pub slack2: f64,
    pub slack3: f64,
    pub slack4: f64,
    pub slack5: f64,
}

impl RelativeEnergyRow {
    fn new(t: &RemainderTerms, d: f64) -> Self {
        Self {
            tau: t.tau,
            e_mv: t.e_mv,
            d,
            i2: t.terms[0],
            i3: t.terms[1],
            i4: t.terms[2],
            i5: t.terms[3],
            bound2: t.bounds[0],
            bound3: t.bounds[1],
            bound4: t.bounds[2],
            bound5: t.bounds[3],
            slack2: t.slacks[0],
            slack3: t.slacks[1],
            slack4: t.slacks[2],
            slack5: t.slacks[3],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelativeEnergyReport {
    pub rows: Vec<RelativeEnergyRow>,
    pub terms: Vec<RemainderTerms>,
    pub constants: BoundConstants,
    pub verdict: GronwallVerdict,
    pub slack_tol: f64,
}

impl RelativeEnergyReport {
    pub fn bounds_hold(&self) -> bool {
        self.terms.iter().all(|t| t.passes(self.slack_tol))
    }

    /// Most negative slack relative to `1 + bound`, per term.
    pub fn worst_relative_slack(&self) -> [f64; 4] {
        let mut worst = [f64::INFINITY; 4];
        for t in &self.terms {
            for (w, (s, b)) in worst.iter_mut().zip(t.slacks.iter().zip(&t.bounds)) {
                *w = w.min(s / (1.0 + b));
            }
        }
        worst
    }
}

/// Relative energy, remainder bounds and Grönwall verdict in one pass.
/// `e_ref` scales the uniqueness floor.
pub fn relative_energy_report(
    v: &DiscreteYoungMeasure,
    physics: &Physics,
    reference: &StrongSolutionRef,
    defect: Option<&DefectReport>,
    cfg: &EstimatorConfig,
    e_ref: f64,
) -> Result<RelativeEnergyReport, WeakStrongError> {
    let series = remainder_series(v, physics, reference, defect, cfg)?;
    let d: Vec<f64> = match defect {
        Some(rep) if rep.d_total.len() == v.times.len() => rep.d_total.clone(),
        Some(rep) => {
            return Err(WeakStrongError::MismatchedSeries(format!(
                "defect has {} times, measure {}",
                rep.d_total.len(),
                v.times.len()
            )))
        }
        None => vec![0.0; v.times.len()],
    };
    let e_mv: Vec<f64> = series.rows.iter().map(|r| r.e_mv).collect();
    let verdict = gronwall_verdict(&v.times, &e_mv, &d, series.constants.c_total(), e_ref)?;
    let rows = series.rows.iter().zip(&d).map(|(t, &d)| RelativeEnergyRow::new(t, d)).collect();
    Ok(RelativeEnergyReport {
        rows,
        terms: series.rows,
        constants: series.constants,
        verdict,
        slack_tol: cfg.slack_tol,
    })
}

pub fn write_relative_energy_csv<W: Write>(rows: &[RelativeEnergyRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_relative_energy_csv<R: Read>(input: R) -> csv::Result<Vec<RelativeEnergyRow>> {
    csv::Reader::from_reader(input).deserialize().collect()
}

/// One-line verdict followed by a newline.
pub fn write_verdict<W: Write>(verdict: &GronwallVerdict, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{}", verdict.summary())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pressure_law::{build_bump_q, PressureLaw};
    use crate::solver1d::{run, FluidState, Grid1D, SolverConfig};
    use crate::weak_strong::{relative_energy, Cutoff};
    use crate::young_measure::assemble;

    fn setup(eps: f64) -> (DiscreteYoungMeasure, StrongSolutionRef, SolverConfig) {
        let law = PressureLaw::power(1.0, 2.0).unwrap().with_bump(build_bump_q(1.0, 2.0, 0.05).unwrap());
        let grid = Grid1D::new(32, 1.0).unwrap();
        let mut cfg = SolverConfig::new(grid, law, 0.1, 0.1);
        cfg.output_dt = Some(0.02);
        let base = |x: f64| (1.2 + 0.2 * (2.0 * std::f64::consts::PI * x).cos(), 0.0);
        let reference = run(&cfg, &FluidState::from_profile(&grid, base)).unwrap();
        let r = StrongSolutionRef::from_trajectory(&reference, cfg.floor).unwrap();
        let member = run(
            &cfg,
            &FluidState::from_profile(&grid, |x| {
                let (rho, u) = base(x);
                (rho + eps * (3.0 * x).sin(), u + eps)
            }),
        )
        .unwrap();
        let v = assemble(&[&member, &reference], cfg.floor).unwrap();
        (v, r, cfg)
    }

    #[test]
    fn identical_data_gives_zero_relative_energy() {
        let (v, r, cfg) = setup(0.0);
        let report = relative_energy_report(&v, &Physics::from(&cfg), &r, None, &EstimatorConfig::default(), 1.0).unwrap();
        assert!(report.rows.iter().all(|row| row.e_mv.abs() < 1e-20 && row.i2 == 0.0));
        assert!(report.verdict.uniqueness && report.verdict.pass);
        assert_eq!(relative_energy(&v, &cfg.law, &r, 0.1).unwrap(), report.rows.last().unwrap().e_mv);
    }

    #[test]
    fn perturbed_data_satisfies_bounds() {
        let (v, r, cfg) = setup(1e-2);
        let report = relative_energy_report(&v, &Physics::from(&cfg), &r, None, &EstimatorConfig::default(), 1.0).unwrap();
        assert!(report.rows[0].e_mv > 0.0);
        assert!(report.bounds_hold());
        assert!(report.verdict.pass && !report.verdict.uniqueness);
        let mut buf = Vec::new();
        write_relative_energy_csv(&report.rows, &mut buf).unwrap();
        assert_eq!(read_relative_energy_csv(buf.as_slice()).unwrap(), report.rows);
    }

    #[test]
    fn cutoff_profile() {
        let law = PressureLaw::power(1.0, 2.0).unwrap();
        let c = Cutoff::for_reference(&law, 1.0, 2.0, &EstimatorConfig::default()).unwrap();
        assert_eq!(c.value(1.0), 1.0);
        assert_eq!(c.value(0.0), 0.0);
        assert_eq!(c.value(100.0), 0.0);
        assert!(Cutoff::for_reference(&law, 0.0, 2.0, &EstimatorConfig::default()).is_err());
    }
}
