use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::pipeline::Pipeline;
use super::spec::{Check, ExperimentSpec};
use crate::pressure_law::{certify_h_bound, certify_lower_bound, default_grid, write_certificate_csv, CertificateRow, PressureLaw};
use crate::weak_strong::{write_relative_energy_csv, write_verdict, RelativeEnergyReport};
use crate::young_measure::{
    energy_inequality_slack, korn_poincare_check, residual_suite, write_residual_csv, DiscreteYoungMeasure, KornReport,
    PhaseAtom, ResidualKind, SpaceGrid, VelocityField,
};

/// Result of one check plus the files it wants written.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub check: Check,
    pub pass: bool,
    pub detail: String,
    pub files: Vec<(String, Vec<u8>)>,
}

impl CheckOutcome {
    fn failed(check: Check, detail: String) -> Self {
        Self {
            check,
            pass: false,
            detail,
            files: vec![],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyRow {
    /// Member index, or `measure` for the measure-level inequality.
    pub source: String,
    pub tau: f64,
    pub e0: f64,
    pub slack: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KornRow {
    pub lhs: f64,
    pub rhs: f64,
    pub c_p_estimate: f64,
    pub c_p_config: f64,
    pub pass: bool,
}

impl From<KornReport> for KornRow {
    fn from(r: KornReport) -> Self {
        Self {
            lhs: r.lhs,
            rhs: r.rhs,
            c_p_estimate: r.c_p_estimate,
            c_p_config: r.c_p_config,
            pass: r.pass,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectRow {
    pub tau: f64,
    pub e_inf: f64,
    pub zeta: f64,
    pub sigma_inf: f64,
    pub d_total: f64,
    pub rm_total: f64,
    pub xi: f64,
}

pub(crate) fn csv_bytes<T: Serialize>(rows: &[T]) -> Result<Vec<u8>, String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| e.to_string())?;
    }
    w.into_inner().map_err(|e| e.to_string())
}

pub fn read_rows<T: for<'de> Deserialize<'de>, R: std::io::Read>(input: R) -> csv::Result<Vec<T>> {
    csv::Reader::from_reader(input).deserialize().collect()
}

fn energy(p: &Pipeline) -> Result<CheckOutcome, String> {
    let mut rows = Vec::new();
    for (k, traj) in p.members.iter().enumerate() {
        let e0 = traj.energy[0];
        let worst = traj
            .budgets
            .iter()
            .map(|b| (b.t, b.slack()))
            .fold((0.0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        let slack = if worst.1.is_finite() { worst.1 } else { 0.0 };
        rows.push(EnergyRow {
            source: format!("member-{k}"),
            tau: worst.0,
            e0,
            slack,
            pass: slack >= -1e-8 * e0.abs(),
        });
    }
    if let Some(defect) = &p.defect {
        let tail = &p.members[p.members.len() - defect.tail..];
        let e0 = tail.iter().map(|t| t.energy[0]).sum::<f64>() / tail.len() as f64;
        for &tau in &p.measure.times {
            let slack = energy_inequality_slack(&p.measure, &p.physics, Some(defect), e0, tau).map_err(|e| e.to_string())?;
            rows.push(EnergyRow {
                source: "measure".into(),
                tau,
                e0,
                slack,
                pass: slack >= -1e-8 * (1.0 + e0.abs()),
            });
        }
    }
    let pass = rows.iter().all(|r| r.pass);
    let worst = rows.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min);
    Ok(CheckOutcome {
        check: Check::Energy,
        pass,
        detail: format!("worst slack {worst:.3e}"),
        files: vec![("energy.csv".into(), csv_bytes(&rows)?)],
    })
}

fn residual(spec: &ExperimentSpec, p: &Pipeline, check: Check, kind: ResidualKind) -> Result<CheckOutcome, String> {
    let renorm = p.renorm(spec)?;
    let rows = residual_suite(&p.measure, &p.physics, &renorm, p.defect.as_ref(), Pipeline::residual_tolerance(spec), &[kind])
        .map_err(|e| e.to_string())?;
    let worst = rows.iter().map(|r| r.residual.abs()).fold(0.0, f64::max);
    let mut bytes = Vec::new();
    write_residual_csv(&rows, &mut bytes).map_err(|e| e.to_string())?;
    Ok(CheckOutcome {
        check,
        pass: rows.iter().all(|r| r.pass),
        detail: format!("max |residual| {worst:.3e} over {} rows", rows.len()),
        files: vec![(format!("residuals_{}.csv", kind.label()), bytes)],
    })
}

/// Embeds a 1D measure as a one-cell-thick 2D slab with `v = (v, 0)` and
/// `D = diag(D, 0)`.
fn slab(v: &DiscreteYoungMeasure) -> Result<DiscreteYoungMeasure, String> {
    let n = v.n_space();
    let dx = v.space.spacing(0);
    let space = SpaceGrid {
        dims: vec![n, 1],
        lengths: vec![v.space.lengths[0], dx],
    };
    let cells = (0..v.n_cells())
        .map(|c| {
            v.atoms(c)
                .map(|a| PhaseAtom {
                    s: a.s,
                    v: vec![a.v[0], 0.0],
                    d: vec![a.d[0], 0.0, 0.0, 0.0],
                    w: a.w,
                })
                .collect()
        })
        .collect();
    DiscreteYoungMeasure::from_atoms(space, v.times.clone(), cells, v.provenance.clone()).map_err(|e| e.to_string())
}

fn korn(spec: &ExperimentSpec, p: &Pipeline) -> Result<CheckOutcome, String> {
    let reference = p.reference()?;
    let lifted = slab(&p.measure)?;
    let n = p.measure.n_space();
    let mut values = Vec::new();
    let mut gradient = Vec::new();
    for j in 0..reference.times.len() {
        for x in 0..n {
            values.extend([reference.u[j][x], 0.0]);
            gradient.extend([reference.u_x[j][x], 0.0, 0.0, 0.0]);
        }
    }
    let field = VelocityField {
        space: lifted.space.clone(),
        times: reference.times.clone(),
        values,
        gradient,
    };
    let length = p.cfg.grid.length;
    // the traceless part of diag(a, 0) has squared norm a²/2
    let c_p = 2.0 * spec.estimator.c_p.unwrap_or((length / PI).powi(2));
    let report = korn_poincare_check(&lifted, &field, c_p).map_err(|e| e.to_string())?;
    Ok(CheckOutcome {
        check: Check::Korn,
        pass: report.pass,
        detail: format!("c_P estimate {:.3e} vs {:.3e}", report.c_p_estimate, c_p),
        files: vec![("korn.csv".into(), csv_bytes(&[KornRow::from(report)])?)],
    })
}

/// Both lemma certificates on `[r_min, r_max]`, merged per `r`.
pub fn certificates(law: &PressureLaw, r_range: (f64, f64), step: f64) -> Result<Vec<CertificateRow>, String> {
    let grid = default_grid(4.0 * r_range.1, step);
    let lower = certify_lower_bound(law, r_range, &grid).map_err(|e| e.to_string())?;
    let upper = certify_h_bound(law, r_range, &grid).map_err(|e| e.to_string())?;
    Ok(CertificateRow::combine(&lower, &upper))
}

pub(crate) fn certificate_bytes(rows: &[CertificateRow]) -> Result<Vec<u8>, String> {
    let mut bytes = Vec::new();
    write_certificate_csv(rows, &mut bytes).map_err(|e| e.to_string())?;
    Ok(bytes)
}

fn lemmas(spec: &ExperimentSpec, p: &Pipeline) -> Result<CheckOutcome, String> {
    let range = match spec.certify.r_range {
        Some([a, b]) => (a, b),
        None => {
            let n = p.reference()?.norms;
            (n.r_min, n.r_max)
        }
    };
    let rows = certificates(&p.cfg.law, range, spec.certify.grid_step.unwrap_or(1e-3))?;
    let c_min = rows.iter().map(|r| r.c_middle.min(r.c_outer)).fold(f64::INFINITY, f64::min);
    let c_max = rows.iter().map(|r| r.c_ratio).fold(0.0, f64::max);
    Ok(CheckOutcome {
        check: Check::Lemmas,
        pass: rows.iter().all(|r| r.valid),
        detail: format!("min c {c_min:.3e}, max C {c_max:.3e}"),
        files: vec![("certificates.csv".into(), certificate_bytes(&rows)?)],
    })
}

fn relative_energy(report: &Result<RelativeEnergyReport, String>) -> Result<CheckOutcome, String> {
    let report = report.as_ref().map_err(Clone::clone)?;
    let mut bytes = Vec::new();
    write_relative_energy_csv(&report.rows, &mut bytes).map_err(|e| e.to_string())?;
    let worst = report.worst_relative_slack();
    Ok(CheckOutcome {
        check: Check::RelativeEnergy,
        pass: report.bounds_hold(),
        detail: format!("worst relative slacks {:.3e} {:.3e} {:.3e} {:.3e}", worst[0], worst[1], worst[2], worst[3]),
        files: vec![("relative_energy.csv".into(), bytes)],
    })
}

fn gronwall(report: &Result<RelativeEnergyReport, String>) -> Result<CheckOutcome, String> {
    let report = report.as_ref().map_err(Clone::clone)?;
    let mut bytes = Vec::new();
    write_verdict(&report.verdict, &mut bytes).map_err(|e| e.to_string())?;
    Ok(CheckOutcome {
        check: Check::Gronwall,
        pass: report.verdict.pass,
        detail: report.verdict.summary(),
        files: vec![("verdict.txt".into(), bytes)],
    })
}

/// Runs one named check; computation errors count as failures.
pub fn run_check(
    spec: &ExperimentSpec,
    p: &Pipeline,
    report: &Result<RelativeEnergyReport, String>,
    check: Check,
) -> CheckOutcome {
    let result = match check {
        Check::Energy => energy(p),
        Check::Continuity => residual(spec, p, check, ResidualKind::Continuity),
        Check::Renorm => residual(spec, p, check, ResidualKind::Renormalized),
        Check::Momentum => residual(spec, p, check, ResidualKind::Momentum),
        Check::Compatibility => residual(spec, p, check, ResidualKind::Compatibility),
        Check::Korn => korn(spec, p),
        Check::Lemmas => lemmas(spec, p),
        Check::RelativeEnergy => relative_energy(report),
        Check::Gronwall => gronwall(report),
    };
    result.unwrap_or_else(|e| CheckOutcome::failed(check, e))
}

pub fn defect_rows(p: &Pipeline) -> Vec<DefectRow> {
    let Some(d) = &p.defect else { return vec![] };
    (0..d.times.len())
        .map(|j| DefectRow {
            tau: d.times[j],
            e_inf: d.e_inf[j],
            zeta: d.zeta[j],
            sigma_inf: d.sigma_inf[j],
            d_total: d.d_total[j],
            rm_total: d.rm_total[j],
            xi: d.xi[j],
        })
        .collect()
}
