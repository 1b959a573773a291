use std::path::Path;

use rayon::prelude::*;

use super::spec::{Check, ExperimentSpec, PerturbationMode};
use super::ExperimentError;
use crate::solver1d::{run, SolverConfig, StrongSolutionRef, Trajectory};
use crate::weak_strong::{relative_energy_report, RelativeEnergyReport};
use crate::young_measure::{
    assemble_labeled, estimate_defect, DefectOptions, DefectReport, DiscreteYoungMeasure, Physics, RenormFunction,
    ResidualTolerance,
};

/// Everything computed for one spec at one resolution.
pub struct Pipeline {
    pub cfg: SolverConfig,
    pub physics: Physics,
    pub members: Vec<Trajectory>,
    pub member_deltas: Vec<f64>,
    pub reference_run: Trajectory,
    pub measure: DiscreteYoungMeasure,
    pub defect: Option<DefectReport>,
}

fn solve(cfg: &SolverConfig, init: &crate::solver1d::FluidState) -> Result<Trajectory, ExperimentError> {
    run(cfg, init).map_err(|e| ExperimentError::Solver(e.to_string()))
}

impl Pipeline {
    /// Runs the ensemble (members in parallel) and the unperturbed reference.
    pub fn build(spec: &ExperimentSpec, n: usize, base_dir: &Path) -> Result<Self, ExperimentError> {
        let cfg = spec.solver_config(n)?;
        let inputs = spec.members(&cfg, base_dir)?;
        let member_deltas = inputs.iter().map(|(c, _)| c.delta).collect();
        let profile = spec.initial_profile(base_dir)?;
        let base_state = crate::solver1d::FluidState::from_profile(&cfg.grid, &profile);
        let (members, reference_run) = rayon::join(
            || inputs.par_iter().map(|(c, s)| solve(c, s)).collect::<Result<Vec<_>, _>>(),
            || solve(&cfg, &base_state),
        );
        let members = members?;
        let reference_run = reference_run?;
        let sequence_mode = spec.ensemble.mode == PerturbationMode::Delta && members.len() >= 2;
        // a δ-sequence generates its measure from the tail, as the defect estimator does
        let first = if sequence_mode { members.len() - members.len().div_ceil(2) } else { 0 };
        let labels = (first..members.len()).map(|k| format!("{}/member-{k}", spec.name)).collect();
        let refs: Vec<&Trajectory> = members[first..].iter().collect();
        let measure = assemble_labeled(&refs, labels, cfg.floor).map_err(|e| ExperimentError::Solver(e.to_string()))?;
        let physics = Physics::from(&cfg);
        let defect = if sequence_mode {
            let sequence: Vec<(&Trajectory, f64)> = members.iter().zip(&spec.ensemble.deltas).map(|(t, &d)| (t, d)).collect();
            let opts = DefectOptions {
                tail: Some(members.len() - first),
                c: spec.estimator.defect_c.unwrap_or(1.0),
            };
            Some(
                estimate_defect(&sequence, &measure, &physics, cfg.big_gamma, cfg.floor, opts)
                    .map_err(|e| ExperimentError::Solver(format!("defect: {e}")))?,
            )
        } else {
            None
        };
        Ok(Self {
            cfg,
            physics,
            members,
            member_deltas,
            reference_run,
            measure,
            defect,
        })
    }

    pub fn reference(&self) -> Result<StrongSolutionRef, String> {
        StrongSolutionRef::from_trajectory(&self.reference_run, self.cfg.floor).map_err(|e| e.to_string())
    }

    pub fn residual_tolerance(spec: &ExperimentSpec) -> ResidualTolerance {
        let d = ResidualTolerance::default();
        ResidualTolerance {
            abs: spec.estimator.residual_abs.unwrap_or(d.abs),
            c_res: spec.estimator.residual_c.unwrap_or(d.c_res),
        }
    }

    /// `b(s) = s` up to the mid initial density, flat above.
    pub fn renorm(&self, spec: &ExperimentSpec) -> Result<RenormFunction, String> {
        let rho0 = &self.reference_run.snapshots[0].rho;
        let lo = rho0.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = rho0.iter().copied().fold(0.0, f64::max);
        let r0 = spec.estimator.renorm_r0.unwrap_or(0.5 * (lo + hi));
        let r_b = spec.estimator.renorm_rb.unwrap_or(hi.max(1.25 * r0));
        RenormFunction::truncation(r0, r_b).map_err(|e| e.to_string())
    }

    pub fn relative_energy(&self, spec: &ExperimentSpec) -> Result<RelativeEnergyReport, String> {
        let reference = self.reference()?;
        let e_ref = spec.estimator.e_ref.unwrap_or(self.reference_run.energy[0]);
        relative_energy_report(&self.measure, &self.physics, &reference, self.defect.as_ref(), &spec.estimator_config(), e_ref)
            .map_err(|e| e.to_string())
    }

    pub fn wants(spec: &ExperimentSpec, check: Check) -> bool {
        spec.checks.contains(&check)
    }
}
