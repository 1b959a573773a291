use super::relative_energy::check_alignment;
use super::{StrongSolutionRef, WeakStrongError};
use crate::pressure_law::{certify_h_bound, certify_lower_bound_on_band, default_grid, r_samples, PressureLaw};
use crate::young_measure::{DefectReport, DiscreteYoungMeasure, Physics};

/// Tuning of the remainder estimates. `None` fields take defaults derived
/// from the physics and the reference.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorConfig {
    /// Young weight for `I₅`; default `λ/2`.
    pub epsilon: Option<f64>,
    /// Split weight for the low-density part of `I₃`; default `λ / (8 G c_P)`.
    pub delta_split: Option<f64>,
    /// Poincaré constant; default `(L/π)²`.
    pub c_p: Option<f64>,
    pub r1_factor: f64,
    pub r2_factor: f64,
    /// Cutoff transition width relative to `r1`.
    pub transition: f64,
    /// Density step of the certification grid.
    pub grid_step: f64,
    /// Relative tolerance on bound slacks.
    pub slack_tol: f64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            epsilon: None,
            delta_split: None,
            c_p: None,
            r1_factor: 0.9,
            r2_factor: 1.1,
            transition: 0.1,
            grid_step: 1e-3,
            slack_tol: 1e-8,
        }
    }
}

/// Smooth cutoff equal to 1 on `[r1, r2]` and 0 outside `[r1 - w, r2 + w]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cutoff {
    pub r1: f64,
    pub r2: f64,
    pub width: f64,
}

fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

impl Cutoff {
    /// Band below `min(q1/2, inf r/2)` and above `max(2 q2, 2 sup r)`.
    pub fn for_reference(
        law: &PressureLaw,
        r_min: f64,
        r_max: f64,
        cfg: &EstimatorConfig,
    ) -> Result<Self, WeakStrongError> {
        if !(r_min > 0.0 && r_max >= r_min && r_max.is_finite()) {
            return Err(WeakStrongError::InvalidBand(format!("reference density range [{r_min}, {r_max}]")));
        }
        let (lo, hi) = match law.bump {
            Some(b) => ((b.q1 / 2.0).min(r_min / 2.0), (2.0 * b.q2).max(2.0 * r_max)),
            None => (r_min / 2.0, 2.0 * r_max),
        };
        let r1 = cfg.r1_factor * lo;
        let r2 = cfg.r2_factor * hi;
        let width = cfg.transition * r1;
        if !(r1 > 0.0 && r2 > r1 && width > 0.0 && width < r1) {
            return Err(WeakStrongError::InvalidBand(format!("band [{r1}, {r2}] with width {width}")));
        }
        Ok(Self { r1, r2, width })
    }

    pub fn value(&self, s: f64) -> f64 {
        if s < self.r1 {
            smoothstep((s - (self.r1 - self.width)) / self.width)
        } else if s <= self.r2 {
            1.0
        } else {
            1.0 - smoothstep((s - self.r2) / self.width)
        }
    }

    pub fn support(&self) -> (f64, f64) {
        (self.r1 - self.width, self.r2 + self.width)
    }
}

/// Constants entering the remainder bounds and the Grönwall rate.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundConstants {
    pub u_c1: f64,
    pub ux_sup: f64,
    /// `sup |(λ U_xx - q'(r) r_x) / r|`.
    pub g_sup: f64,
    pub c_max: f64,
    pub c_mid: f64,
    pub c_out: f64,
    pub c_psi: f64,
    pub k_a: f64,
    pub k_1: f64,
    pub k_w2: f64,
    pub k_5: f64,
    pub epsilon: f64,
    pub delta_split: f64,
    pub c_p: f64,
    pub sup_xi: f64,
    pub cutoff: Cutoff,
}

impl BoundConstants {
    pub fn i3_rate(&self) -> f64 {
        let split = if self.k_1 > 0.0 { self.k_1 / (4.0 * self.delta_split) } else { 0.0 };
        self.g_sup * (self.k_a + split + self.k_w2)
    }

    pub fn i5_rate(&self) -> f64 {
        self.k_5 / (4.0 * self.epsilon)
    }

    /// Sum of all rates multiplying `∫E` plus the `r^M` contribution.
    pub fn c_total(&self) -> f64 {
        self.u_c1 + self.c_max * self.ux_sup + self.i3_rate() + self.i5_rate() + self.u_c1 * self.sup_xi
    }
}

/// Remainders, bounds and slacks at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RemainderTerms {
    pub tau: f64,
    pub e_mv: f64,
    pub integral_e: f64,
    /// `I₂, I₃, I₄, I₅`.
    pub terms: [f64; 4],
    pub bounds: [f64; 4],
    pub slacks: [f64; 4],
}

impl RemainderTerms {
    pub fn passes(&self, tol: f64) -> bool {
        self.slacks.iter().zip(&self.bounds).all(|(s, b)| *s >= -tol * (1.0 + b))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RemainderSeries {
    pub constants: BoundConstants,
    pub rows: Vec<RemainderTerms>,
}

impl RemainderSeries {
    pub fn passes(&self, tol: f64) -> bool {
        self.rows.iter().all(|r| r.passes(tol))
    }
}

fn sup_abs(field: &[Vec<f64>]) -> f64 {
    field.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
}

fn cumulative_trapezoid(times: &[f64], rate: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; rate.len()];
    for j in 1..rate.len() {
        out[j] = out[j - 1] + 0.5 * (times[j] - times[j - 1]) * (rate[j] + rate[j - 1]);
    }
    out
}

struct BandConstants {
    c_psi: f64,
    k_a: f64,
    k_1: f64,
    k_w2: f64,
}

fn band_constants(law: &PressureLaw, cutoff: &Cutoff, rs: &[f64], grid: &[f64]) -> Result<BandConstants, WeakStrongError> {
    let (s_lo, s_hi) = cutoff.support();
    let mut c_psi = f64::INFINITY;
    let mut k_1: f64 = 0.0;
    let mut k_2: f64 = 0.0;
    for &r in rs {
        let probes = grid.iter().copied().chain([s_lo, s_hi, cutoff.r1, cutoff.r2]);
        for s in probes {
            let gap = s - r;
            let b = law.bregman_h(s, r)?;
            if s >= s_lo && s <= s_hi && gap.abs() > 1e-6 {
                c_psi = c_psi.min(b / (gap * gap));
            }
            if s <= cutoff.r1 {
                k_1 = k_1.max(gap * gap / b);
            }
            if s >= cutoff.r2 {
                k_2 = k_2.max(s / b);
            }
        }
    }
    if !(c_psi > 0.0 && c_psi.is_finite() && k_1.is_finite() && k_2.is_finite()) {
        return Err(WeakStrongError::CannotBound(format!(
            "degenerate cutoff constants c_psi = {c_psi}, K1 = {k_1}, K2 = {k_2}"
        )));
    }
    Ok(BandConstants {
        c_psi,
        k_a: (1.0 / (2.0 * c_psi)).max(1.0) / s_lo.sqrt(),
        k_1,
        k_w2: (0.5 * k_2).max(1.0),
    })
}

/// Remainder integrals `I₂…I₅` on `[0, τ]` for every stored `τ`, with their
/// bounds in terms of `∫E_mv` and the dissipation-type integrals.
pub fn remainder_series(
    v: &DiscreteYoungMeasure,
    physics: &Physics,
    reference: &StrongSolutionRef,
    defect: Option<&DefectReport>,
    cfg: &EstimatorConfig,
) -> Result<RemainderSeries, WeakStrongError> {
    let map = check_alignment(v, reference)?;
    let law = &physics.law;
    let lambda = physics.lambda;
    let norms = &reference.norms;
    let n = v.n_space();
    let dx = v.space.spacing(0);
    let length = v.space.lengths[0];

    let cutoff = Cutoff::for_reference(law, norms.r_min, norms.r_max, cfg)?;
    let s_atoms = (0..v.n_cells())
        .flat_map(|c| v.atoms(c).map(|a| a.s).collect::<Vec<_>>())
        .fold(0.0, f64::max);
    let grid = default_grid((4.0 * cutoff.r2).max(4.0 * norms.r_max).max(1.1 * s_atoms), cfg.grid_step);
    let rs = r_samples(norms.r_min, norms.r_max)?;
    let lower = certify_lower_bound_on_band(law, &rs, (cutoff.r1, cutoff.r2), &grid)
        .map_err(|e| WeakStrongError::CannotBound(format!("lower-bound certificate: {e}")))?;
    let upper = certify_h_bound(law, (norms.r_min, norms.r_max), &grid)
        .map_err(|e| WeakStrongError::CannotBound(format!("h-Bregman certificate: {e}")))?;
    let band = band_constants(law, &cutoff, &rs, &grid)?;
    let (c_mid, c_out) = (lower.min_c_middle(), lower.min_c_outer());

    let g: Vec<Vec<f64>> = map
        .iter()
        .map(|&jr| {
            (0..n)
                .map(|x| {
                    let r = reference.r[jr][x];
                    (lambda * reference.u_xx[jr][x] - law.dq(r) * reference.r_x[jr][x]) / r
                })
                .collect()
        })
        .collect();
    let g_sup = sup_abs(&g);
    let k_5 = match law.bump {
        Some(b) => (b.lipschitz().powi(2) / c_mid).max(b.amplitude.powi(2) / c_out),
        None => 0.0,
    };
    let c_p = cfg.c_p.unwrap_or((length / std::f64::consts::PI).powi(2));
    let epsilon = cfg.epsilon.unwrap_or(lambda / 2.0);
    let delta_split = cfg
        .delta_split
        .unwrap_or(if g_sup > 0.0 { lambda / (8.0 * g_sup * c_p) } else { lambda });
    if !(epsilon > 0.0 && delta_split > 0.0) {
        return Err(WeakStrongError::CannotBound(format!(
            "non-positive splitting weights epsilon = {epsilon}, delta = {delta_split}"
        )));
    }
    let constants = BoundConstants {
        u_c1: norms.u_c1,
        ux_sup: norms.ux_sup,
        g_sup,
        c_max: upper.max_ratio(),
        c_mid,
        c_out,
        c_psi: band.c_psi,
        k_a: band.k_a,
        k_1: band.k_1,
        k_w2: band.k_w2,
        k_5,
        epsilon,
        delta_split,
        c_p,
        sup_xi: defect.map_or(0.0, |d| d.sup_xi()),
        cutoff,
    };

    // rates: E, I2..I5, <|U - v|²>, <(D - U_x)²>
    let nt = v.times.len();
    let mut rates = vec![[0.0f64; 7]; nt];
    for (j, &jr) in map.iter().enumerate() {
        let row = &mut rates[j];
        for (x, &g_x) in g[j].iter().enumerate() {
            let (r, u, ux) = (reference.r[jr][x], reference.u[jr][x], reference.u_x[jr][x]);
            let qr = law.q(r);
            for a in v.atoms(v.cell_index(j, x)) {
                let (s, vel, d, w) = (a.s, a.v[0], a.d[0], a.w);
                let dv = u - vel;
                let b = law.bregman_h(s, r)?;
                row[0] += w * (0.5 * s * dv * dv + b);
                row[1] -= w * s * dv * dv * ux;
                row[2] += w * (s - r) * dv * g_x;
                row[3] -= w * law.bregman_small_h(s, r) * ux;
                row[4] += w * (law.q(s) - qr) * (d - ux);
                row[5] += w * dv * dv;
                row[6] += w * (d - ux) * (d - ux);
            }
        }
        for value in row.iter_mut() {
            *value *= dx;
        }
    }
    let column = |k: usize| cumulative_trapezoid(&v.times, &rates.iter().map(|r| r[k]).collect::<Vec<_>>());
    let cum: Vec<Vec<f64>> = (0..7).map(column).collect();

    let rows = (0..nt)
        .map(|j| {
            let int_e = cum[0][j];
            let terms = [cum[1][j], cum[2][j], cum[3][j], cum[4][j]];
            let bounds = [
                constants.u_c1 * int_e,
                constants.i3_rate() * int_e + g_sup * delta_split * cum[5][j],
                constants.c_max * constants.ux_sup * int_e,
                constants.i5_rate() * int_e + epsilon * cum[6][j],
            ];
            let slacks = std::array::from_fn(|i| bounds[i] - terms[i].abs());
            RemainderTerms {
                tau: v.times[j],
                e_mv: rates[j][0],
                integral_e: int_e,
                terms,
                bounds,
                slacks,
            }
        })
        .collect();
    Ok(RemainderSeries { constants, rows })
}

/// Remainders on `[0, τ]`.
pub fn remainder_terms(
    v: &DiscreteYoungMeasure,
    physics: &Physics,
    reference: &StrongSolutionRef,
    defect: Option<&DefectReport>,
    cfg: &EstimatorConfig,
    tau: f64,
) -> Result<(BoundConstants, RemainderTerms), WeakStrongError> {
    let j = v.time_index(tau)?;
    let series = remainder_series(v, physics, reference, defect, cfg)?;
    Ok((series.constants, series.rows[j]))
}
