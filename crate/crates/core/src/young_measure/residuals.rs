//! Weak-form residuals in one space dimension.
//!
//! Space integrals use the cell-centre (midpoint) rule; time integrals use
//! the trapezoid rule over the sampled times, so test functions that are
//! affine in `t` integrate constant states exactly.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::test_functions::SpaceTimeFunction;
use super::{AtomRef, DefectReport, DiscreteYoungMeasure, MeasureError, RenormFunction};
use crate::pressure_law::PressureLaw;
use crate::solver1d::SolverConfig;

/// Constitutive data needed to evaluate observables.
#[derive(Debug, Clone, PartialEq)]
pub struct Physics {
    pub law: PressureLaw,
    pub lambda: f64,
    pub mu: f64,
}

impl From<&SolverConfig> for Physics {
    fn from(cfg: &SolverConfig) -> Self {
        Self {
            law: cfg.law.clone(),
            lambda: cfg.lambda,
            mu: cfg.mu,
        }
    }
}

/// A residual value and the magnitude of the terms it balances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    pub value: f64,
    pub scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumResidual {
    pub residual: Residual,
    /// `|⟨r^M(τ); ∂x φ(τ)⟩|`
    pub rm_pairing: f64,
    /// `ξ(τ) D(τ) ‖φ(τ)‖_{C¹}`
    pub rm_bound: f64,
}

impl MomentumResidual {
    pub fn inequality_slack(&self) -> f64 {
        self.rm_bound - self.rm_pairing
    }
}

fn require_1d(v: &DiscreteYoungMeasure) -> Result<(), MeasureError> {
    if v.dim() != 1 {
        return Err(MeasureError::Invalid(format!("weak-form residuals are one-dimensional, measure has d = {}", v.dim())));
    }
    Ok(())
}

/// Residual series `[∫A ψ]_0^τ - ∫_0^τ ∫ (A ∂tψ + B ∂xψ - C ψ)` for every
/// sampled `τ`.
struct WeakForm<'a> {
    v: &'a DiscreteYoungMeasure,
    a: Option<Vec<Vec<f64>>>,
    b: Vec<Vec<f64>>,
    c: Option<Vec<Vec<f64>>>,
}

impl WeakForm<'_> {
    fn series(&self, f: &dyn SpaceTimeFunction) -> Vec<Residual> {
        let dx = self.v.space.spacing(0);
        let n = self.v.n_space();
        let times = &self.v.times;
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * dx).collect();
        let mut rate = Vec::with_capacity(times.len());
        let mut rate_abs = Vec::with_capacity(times.len());
        let mut mass = Vec::with_capacity(times.len());
        for (j, &t) in times.iter().enumerate() {
            let (mut r, mut ra, mut m) = (0.0, 0.0, 0.0);
            for (i, &x) in xs.iter().enumerate() {
                let mut terms = [self.b[j][i] * f.dx(t, x), 0.0, 0.0];
                if let Some(a) = &self.a {
                    terms[1] = a[j][i] * f.dt(t, x);
                    m += a[j][i] * f.value(t, x);
                }
                if let Some(c) = &self.c {
                    terms[2] = -c[j][i] * f.value(t, x);
                }
                r += terms.iter().sum::<f64>();
                ra += terms.iter().map(|v| v.abs()).sum::<f64>();
            }
            rate.push(r * dx);
            rate_abs.push(ra * dx);
            mass.push(m * dx);
        }
        let mut out = Vec::with_capacity(times.len());
        let (mut integral, mut integral_abs) = (0.0, 0.0);
        for j in 0..times.len() {
            if j > 0 {
                let h = times[j] - times[j - 1];
                integral += 0.5 * h * (rate[j - 1] + rate[j]);
                integral_abs += 0.5 * h * (rate_abs[j - 1] + rate_abs[j]);
            }
            out.push(Residual {
                value: (mass[j] - mass[0]) - integral,
                scale: mass[j].abs() + mass[0].abs() + integral_abs,
            });
        }
        out
    }
}

fn continuity_form(v: &DiscreteYoungMeasure) -> Result<WeakForm<'_>, MeasureError> {
    require_1d(v)?;
    Ok(WeakForm {
        v,
        a: Some(v.moment(|a| a.s)?),
        b: v.moment(|a| a.s * a.v[0])?,
        c: None,
    })
}

fn renorm_form<'a>(v: &'a DiscreteYoungMeasure, b: &RenormFunction) -> Result<WeakForm<'a>, MeasureError> {
    require_1d(v)?;
    Ok(WeakForm {
        v,
        a: Some(v.moment(|a| b.value(a.s))?),
        b: v.moment(|a| b.value(a.s) * a.v[0])?,
        c: Some(v.moment(|a| (a.s * b.derivative(a.s) - b.value(a.s)) * a.d[0])?),
    })
}

fn pressure_obs(law: &PressureLaw) -> impl Fn(&AtomRef) -> f64 + '_ {
    move |a| law.pressure(a.s).unwrap_or(f64::NAN)
}

fn momentum_form<'a>(
    v: &'a DiscreteYoungMeasure,
    physics: &Physics,
    defect: Option<&DefectReport>,
) -> Result<WeakForm<'a>, MeasureError> {
    require_1d(v)?;
    let p = pressure_obs(&physics.law);
    let lambda = physics.lambda;
    let mut flux = v.moment(|a| a.s * a.v[0] * a.v[0] + p(a) - lambda * a.d[0])?;
    if let Some(d) = defect {
        check_defect_shape(v, d)?;
        for (row, rm) in flux.iter_mut().zip(&d.rm) {
            for (f, r) in row.iter_mut().zip(rm) {
                *f += r;
            }
        }
    }
    Ok(WeakForm {
        v,
        a: Some(v.moment(|a| a.s * a.v[0])?),
        b: flux,
        c: None,
    })
}

fn compatibility_form(v: &DiscreteYoungMeasure) -> Result<WeakForm<'_>, MeasureError> {
    require_1d(v)?;
    Ok(WeakForm {
        v,
        a: None,
        b: v.moment(|a| a.v[0])?,
        c: Some(v.moment(|a| -a.d[0])?),
    })
}

fn check_defect_shape(v: &DiscreteYoungMeasure, d: &DefectReport) -> Result<(), MeasureError> {
    if d.rm.len() != v.times.len() || d.rm.iter().any(|r| r.len() != v.n_space()) {
        return Err(MeasureError::Invalid("defect report does not match the measure grid".into()));
    }
    Ok(())
}

fn check_boundary(v: &DiscreteYoungMeasure, f: &dyn SpaceTimeFunction) -> Result<(), MeasureError> {
    let l = v.space.lengths[0];
    for &t in &v.times {
        if f.value(t, 0.0).abs() > 1e-12 || f.value(t, l).abs() > 1e-12 {
            return Err(MeasureError::InvalidTestFunction(f.id()));
        }
    }
    Ok(())
}

/// `[∫⟨s⟩ψ]_0^τ - ∫_0^τ ∫ (⟨s⟩∂tψ + ⟨sv⟩∂xψ)`.
pub fn continuity_residual(v: &DiscreteYoungMeasure, psi: &dyn SpaceTimeFunction, tau: f64) -> Result<Residual, MeasureError> {
    let j = v.time_index(tau)?;
    Ok(continuity_form(v)?.series(psi)[j])
}

/// Renormalized continuity residual, including the
/// `-∫∫⟨(s b'(s) - b(s)) tr D⟩ψ` source.
pub fn renorm_continuity_residual(
    v: &DiscreteYoungMeasure,
    b: &RenormFunction,
    psi: &dyn SpaceTimeFunction,
    tau: f64,
) -> Result<Residual, MeasureError> {
    let j = v.time_index(tau)?;
    Ok(renorm_form(v, b)?.series(psi)[j])
}

fn c1_norm(f: &dyn SpaceTimeFunction, t: f64, length: f64) -> f64 {
    let n = 2000;
    let (mut sup, mut sup_x) = (0.0f64, 0.0f64);
    for i in 0..=n {
        let x = length * i as f64 / n as f64;
        sup = sup.max(f.value(t, x).abs());
        sup_x = sup_x.max(f.dx(t, x).abs());
    }
    sup + sup_x
}

/// Momentum residual with the `r^M` pairing taken from `defect` (zero when
/// absent), plus the concentration bound at `τ`.
pub fn momentum_residual(
    v: &DiscreteYoungMeasure,
    physics: &Physics,
    phi: &dyn SpaceTimeFunction,
    tau: f64,
    defect: Option<&DefectReport>,
) -> Result<MomentumResidual, MeasureError> {
    let j = v.time_index(tau)?;
    check_boundary(v, phi)?;
    let residual = momentum_form(v, physics, defect)?.series(phi)[j];
    Ok(momentum_extras(v, phi, j, defect, residual))
}

fn momentum_extras(
    v: &DiscreteYoungMeasure,
    phi: &dyn SpaceTimeFunction,
    j: usize,
    defect: Option<&DefectReport>,
    residual: Residual,
) -> MomentumResidual {
    let (rm_pairing, rm_bound) = match defect {
        Some(d) => {
            let dx = v.space.spacing(0);
            let t = v.times[j];
            let pairing: f64 = d.rm[j]
                .iter()
                .enumerate()
                .map(|(i, r)| r * phi.dx(t, (i as f64 + 0.5) * dx))
                .sum::<f64>()
                * dx;
            let xi = if d.xi_meaningful[j] { d.xi[j] } else { 0.0 };
            (pairing.abs(), xi * d.d_total[j] * c1_norm(phi, t, v.space.lengths[0]))
        }
        None => (0.0, 0.0),
    };
    MomentumResidual {
        residual,
        rm_pairing,
        rm_bound,
    }
}

/// `-∫_0^τ∫⟨v⟩ ∂x M - ∫_0^τ∫⟨D⟩ M`.
pub fn compatibility_residual(v: &DiscreteYoungMeasure, m: &dyn SpaceTimeFunction, tau: f64) -> Result<Residual, MeasureError> {
    let j = v.time_index(tau)?;
    Ok(compatibility_form(v)?.series(m)[j])
}

/// `E0 - ∫⟨½s v² + P(s)⟩(τ) - ∫_0^τ∫⟨λ D²⟩ - D(τ)`.
pub fn energy_inequality_slack(
    v: &DiscreteYoungMeasure,
    physics: &Physics,
    defect: Option<&DefectReport>,
    initial_energy: f64,
    tau: f64,
) -> Result<f64, MeasureError> {
    require_1d(v)?;
    let j = v.time_index(tau)?;
    let dx = v.space.spacing(0);
    let law = &physics.law;
    let energy: f64 = v
        .moment_slice(j, &|a: &AtomRef| 0.5 * a.s * a.v[0] * a.v[0] + law.potential(a.s).unwrap_or(f64::NAN))?
        .iter()
        .sum::<f64>()
        * dx;
    let dissipation = measure_dissipation(v, physics)?[j];
    let d = match defect {
        Some(rep) => rep.d_total[j],
        None => 0.0,
    };
    Ok(initial_energy - energy - dissipation - d)
}

/// Cumulative `∫_0^τ ∫⟨λ D²⟩` at every sampled time.
pub(crate) fn measure_dissipation(v: &DiscreteYoungMeasure, physics: &Physics) -> Result<Vec<f64>, MeasureError> {
    let dx = v.space.spacing(0);
    let lambda = physics.lambda;
    let rate: Vec<f64> = v
        .moment(|a| lambda * a.d[0] * a.d[0])?
        .iter()
        .map(|row| row.iter().sum::<f64>() * dx)
        .collect();
    Ok(cumulative_trapezoid(&v.times, &rate))
}

pub(crate) fn cumulative_trapezoid(times: &[f64], rate: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(rate.len());
    let mut acc = 0.0;
    for j in 0..rate.len() {
        if j > 0 {
            acc += 0.5 * (times[j] - times[j - 1]) * (rate[j - 1] + rate[j]);
        }
        out.push(acc);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualKind {
    Continuity,
    Renormalized,
    Momentum,
    Compatibility,
}

impl ResidualKind {
    pub fn label(self) -> &'static str {
        match self {
            Self::Continuity => "continuity",
            Self::Renormalized => "renorm",
            Self::Momentum => "momentum",
            Self::Compatibility => "compatibility",
        }
    }
}

/// Pass threshold `abs + c_res (dx + Δt) scale`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualTolerance {
    pub abs: f64,
    pub c_res: f64,
}

impl Default for ResidualTolerance {
    fn default() -> Self {
        Self { abs: 1e-10, c_res: 10.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualRow {
    pub test_fn_id: String,
    pub tau: f64,
    pub residual: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Evaluates every residual kind against its test-function library at every
/// sampled time. Momentum rows also fail when the concentration bound is
/// violated.
pub fn residual_suite(
    v: &DiscreteYoungMeasure,
    physics: &Physics,
    renorm: &RenormFunction,
    defect: Option<&DefectReport>,
    tol: ResidualTolerance,
    kinds: &[ResidualKind],
) -> Result<Vec<ResidualRow>, MeasureError> {
    require_1d(v)?;
    let length = v.space.lengths[0];
    let dt = v.times.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    let h = v.space.spacing(0) + dt;
    let mut rows = Vec::new();
    let push = |rows: &mut Vec<ResidualRow>, kind: ResidualKind, id: String, series: Vec<Residual>, extra: &dyn Fn(usize) -> bool| {
        for (j, r) in series.into_iter().enumerate() {
            let bound = tol.abs + tol.c_res * h * r.scale;
            rows.push(ResidualRow {
                test_fn_id: format!("{}:{id}", kind.label()),
                tau: v.times[j],
                residual: r.value,
                bound,
                pass: r.value.abs() <= bound && extra(j),
            });
        }
    };
    for &kind in kinds {
        match kind {
            ResidualKind::Continuity | ResidualKind::Renormalized | ResidualKind::Compatibility => {
                let form = match kind {
                    ResidualKind::Continuity => continuity_form(v)?,
                    ResidualKind::Renormalized => renorm_form(v, renorm)?,
                    _ => compatibility_form(v)?,
                };
                for f in super::scalar_library(length) {
                    push(&mut rows, kind, f.id(), form.series(&f), &|_| true);
                }
            }
            ResidualKind::Momentum => {
                let form = momentum_form(v, physics, defect)?;
                for f in super::momentum_library(length) {
                    let series = form.series(&f);
                    let extras: Vec<MomentumResidual> =
                        series.iter().enumerate().map(|(j, r)| momentum_extras(v, &f, j, defect, *r)).collect();
                    push(&mut rows, kind, f.id(), series, &|j| extras[j].inequality_slack() >= -1e-12);
                }
            }
        }
    }
    Ok(rows)
}

pub fn write_residual_csv<W: Write>(rows: &[ResidualRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_residual_csv<R: Read>(input: R) -> csv::Result<Vec<ResidualRow>> {
    csv::Reader::from_reader(input).deserialize().collect()
}
