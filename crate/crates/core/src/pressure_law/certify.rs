//! Grid certification of the two pressure-potential lemmas:
//!
//! * lower bound: `B_H(ρ, r) ≥ c(r) (ρ - r)²` on `[r1, r2]` and
//!   `B_H(ρ, r) ≥ c(r) (1 + ρ^γ)` outside;
//! * `|h(ρ) - h(r) - h'(r)(ρ - r)| ≤ C(r) B_H(ρ, r)`.
//!
//! Certificates are only as good as the caller's grid; the grid step is
//! recorded in every certificate.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{LawError, PressureLaw};

/// Points with `|ρ - r|` below this are skipped: both sides vanish to
/// second order there.
pub const EXCLUSION_BAND: f64 = 1e-6;

const DEFAULT_R_SAMPLES: usize = 21;

#[derive(Debug, Clone, PartialEq)]
pub struct LowerBoundRow {
    pub r: f64,
    pub c_middle: f64,
    pub c_outer: f64,
}

impl LowerBoundRow {
    pub fn c(&self) -> f64 {
        self.c_middle.min(self.c_outer)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowerBoundCertificate {
    pub r1: f64,
    pub r2: f64,
    pub grid_step: f64,
    pub rows: Vec<LowerBoundRow>,
}

impl LowerBoundCertificate {
    pub fn min_c(&self) -> f64 {
        self.rows.iter().map(LowerBoundRow::c).fold(f64::INFINITY, f64::min)
    }
    pub fn min_c_middle(&self) -> f64 {
        self.rows.iter().map(|r| r.c_middle).fold(f64::INFINITY, f64::min)
    }
    pub fn min_c_outer(&self) -> f64 {
        self.rows.iter().map(|r| r.c_outer).fold(f64::INFINITY, f64::min)
    }
    pub fn is_valid(&self) -> bool {
        self.min_c() > 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HBoundRow {
    pub r: f64,
    pub c_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HBoundCertificate {
    pub grid_step: f64,
    pub rows: Vec<HBoundRow>,
}

impl HBoundCertificate {
    pub fn max_ratio(&self) -> f64 {
        self.rows.iter().map(|r| r.c_ratio).fold(0.0, f64::max)
    }
    pub fn is_valid(&self) -> bool {
        self.rows.iter().all(|r| r.c_ratio.is_finite())
    }
}

/// Uniform grid `0, step, 2 step, ..., ≥ rho_max`.
pub fn default_grid(rho_max: f64, step: f64) -> Vec<f64> {
    let n = (rho_max / step).ceil() as usize;
    (0..=n).map(|i| i as f64 * step).collect()
}

pub(crate) fn r_samples(r_min: f64, r_max: f64) -> Result<Vec<f64>, LawError> {
    if !(r_min > 0.0) {
        return Err(LawError::Domain {
            what: "certification range (r must lie in a compact subset of (0, inf))",
            rho: r_min,
        });
    }
    if !(r_max >= r_min) || !r_max.is_finite() {
        return Err(LawError::InvalidParameter(format!("empty r range [{r_min}, {r_max}]")));
    }
    if r_max == r_min {
        return Ok(vec![r_min]);
    }
    let n = DEFAULT_R_SAMPLES;
    Ok((0..n).map(|i| r_min + (r_max - r_min) * i as f64 / (n - 1) as f64).collect())
}

fn grid_step(grid: &[f64]) -> f64 {
    grid.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}

fn check_grid(grid: &[f64], needed_max: f64) -> Result<(), LawError> {
    if grid.len() < 2 {
        return Err(LawError::InsufficientGrid(format!("{} point(s)", grid.len())));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(LawError::InsufficientGrid("grid must be strictly increasing".into()));
    }
    if grid[0] < 0.0 || grid[0] > 1e-12 {
        return Err(LawError::InsufficientGrid(format!("grid must start at 0, starts at {}", grid[0])));
    }
    if *grid.last().unwrap() < needed_max * (1.0 - 1e-12) {
        return Err(LawError::InsufficientGrid(format!(
            "grid ends at {} but must reach {needed_max}",
            grid.last().unwrap()
        )));
    }
    Ok(())
}

/// Lower-bound certificate with `r1 = r_min / 2`, `r2 = 2 r_max`.
pub fn certify_lower_bound(law: &PressureLaw, r_range: (f64, f64), grid: &[f64]) -> Result<LowerBoundCertificate, LawError> {
    let rs = r_samples(r_range.0, r_range.1)?;
    certify_lower_bound_on_band(law, &rs, (r_range.0 / 2.0, 2.0 * r_range.1), grid)
}

/// Lower-bound certificate for explicit `r` samples and middle band.
pub fn certify_lower_bound_on_band(
    law: &PressureLaw,
    rs: &[f64],
    band: (f64, f64),
    grid: &[f64],
) -> Result<LowerBoundCertificate, LawError> {
    let (r1, r2) = band;
    if !(r1 > 0.0 && r2 > r1) {
        return Err(LawError::InvalidParameter(format!("invalid band [{r1}, {r2}]")));
    }
    check_grid(grid, 2.0 * r2)?;
    let gamma = law.gamma();
    let mut rows = Vec::with_capacity(rs.len());
    let mut violations = Vec::new();
    for &r in rs {
        if !(r > 0.0) {
            return Err(LawError::Domain { what: "certification sample", rho: r });
        }
        let mut c_middle = f64::INFINITY;
        let mut c_outer = f64::INFINITY;
        let mut middle_points = 0;
        // band endpoints are always probed in addition to the grid
        let probes = grid.iter().copied().chain([r1, r2]);
        for rho in probes {
            if (rho - r).abs() < EXCLUSION_BAND {
                continue;
            }
            let b = law.bregman_h(rho, r)?;
            if rho >= r1 && rho <= r2 {
                middle_points += 1;
                let c = b / ((rho - r) * (rho - r));
                if !(c > 0.0) {
                    violations.push((rho, r));
                }
                c_middle = c_middle.min(c);
            } else {
                let c = b / (1.0 + rho.powf(gamma));
                if !(c > 0.0) {
                    violations.push((rho, r));
                }
                c_outer = c_outer.min(c);
            }
        }
        if middle_points == 0 {
            return Err(LawError::InsufficientGrid(format!("no usable points in [{r1}, {r2}] for r = {r}")));
        }
        rows.push(LowerBoundRow { r, c_middle, c_outer });
    }
    if !violations.is_empty() {
        return Err(LawError::CertificationFailure { violations });
    }
    Ok(LowerBoundCertificate {
        r1,
        r2,
        grid_step: grid_step(grid),
        rows,
    })
}

/// Smallest `C(r)` with `|h-Bregman| ≤ C(r) B_H` on the grid.
pub fn certify_h_bound(law: &PressureLaw, r_range: (f64, f64), grid: &[f64]) -> Result<HBoundCertificate, LawError> {
    let rs = r_samples(r_range.0, r_range.1)?;
    check_grid(grid, 4.0 * r_range.1)?;
    let mut rows = Vec::with_capacity(rs.len());
    let mut violations = Vec::new();
    for &r in &rs {
        let mut worst: f64 = 0.0;
        let mut used = 0;
        for &rho in grid {
            if (rho - r).abs() < EXCLUSION_BAND {
                continue;
            }
            used += 1;
            let num = law.bregman_small_h(rho, r).abs();
            let den = law.bregman_h(rho, r)?;
            let ratio = if num == 0.0 { 0.0 } else { num / den };
            if !(ratio.is_finite() && ratio >= 0.0) {
                violations.push((rho, r));
            } else {
                worst = worst.max(ratio);
            }
        }
        if used == 0 {
            return Err(LawError::InsufficientGrid(format!("grid only contains r = {r}")));
        }
        rows.push(HBoundRow { r, c_ratio: worst });
    }
    if !violations.is_empty() {
        return Err(LawError::CertificationFailure { violations });
    }
    Ok(HBoundCertificate {
        grid_step: grid_step(grid),
        rows,
    })
}

/// One CSV row of a combined certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateRow {
    pub r: f64,
    pub c_middle: f64,
    pub c_outer: f64,
    #[serde(rename = "C_ratio")]
    pub c_ratio: f64,
    pub valid: bool,
}

impl CertificateRow {
    pub fn combine(lower: &LowerBoundCertificate, upper: &HBoundCertificate) -> Vec<CertificateRow> {
        lower
            .rows
            .iter()
            .zip(&upper.rows)
            .map(|(l, u)| CertificateRow {
                r: l.r,
                c_middle: l.c_middle,
                c_outer: l.c_outer,
                c_ratio: u.c_ratio,
                valid: l.c() > 0.0 && u.c_ratio.is_finite(),
            })
            .collect()
    }
}

pub fn write_certificate_csv<W: Write>(rows: &[CertificateRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_certificate_csv<R: Read>(input: R) -> csv::Result<Vec<CertificateRow>> {
    csv::Reader::from_reader(input).deserialize().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pressure_law::build_bump_q;

    #[test]
    fn quadratic_middle_band_constant_is_one() {
        let law = PressureLaw::power(1.0, 2.0).unwrap();
        let grid = default_grid(8.0, 0.01);
        let cert = certify_lower_bound(&law, (1.0, 1.0), &grid).unwrap();
        assert_eq!(cert.rows.len(), 1);
        assert!((cert.rows[0].c_middle - 1.0).abs() < 1e-10);
        assert!(cert.is_valid());
        assert_eq!((cert.r1, cert.r2), (0.5, 2.0));
    }

    #[test]
    fn degenerate_grid_rejected() {
        let law = PressureLaw::power(1.0, 2.0).unwrap();
        assert!(matches!(
            certify_lower_bound(&law, (1.0, 1.0), &[1.0]),
            Err(LawError::InsufficientGrid(_))
        ));
        assert!(matches!(certify_h_bound(&law, (1.0, 1.0), &[1.0]), Err(LawError::InsufficientGrid(_))));
    }

    #[test]
    fn short_grid_rejected() {
        let law = PressureLaw::power(1.0, 2.0).unwrap();
        let grid = default_grid(3.0, 0.01);
        assert!(matches!(
            certify_lower_bound(&law, (1.0, 1.0), &grid),
            Err(LawError::InsufficientGrid(_))
        ));
    }

    #[test]
    fn h_ratio_for_quadratic_is_one() {
        let law = PressureLaw::power(1.0, 2.0).unwrap();
        let cert = certify_h_bound(&law, (1.0, 1.0), &default_grid(8.0, 0.01)).unwrap();
        assert!((cert.rows[0].c_ratio - 1.0).abs() < 1e-10);
    }

    #[test]
    fn h_ratio_ignores_bump() {
        let law = PressureLaw::power(1.0, 2.0)
            .unwrap()
            .with_bump(build_bump_q(1.0, 2.0, 0.1).unwrap());
        let cert = certify_h_bound(&law, (0.5, 2.0), &default_grid(8.0, 0.01)).unwrap();
        assert!(cert.is_valid());
        assert!((cert.max_ratio() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn r_range_touching_zero_rejected() {
        let law = PressureLaw::power(1.0, 2.0).unwrap();
        assert!(matches!(
            certify_lower_bound(&law, (0.0, 2.0), &default_grid(8.0, 0.01)),
            Err(LawError::Domain { .. })
        ));
    }

    #[test]
    fn csv_round_trip() {
        let law = PressureLaw::power(1.0, 1.4).unwrap();
        let grid = default_grid(8.0, 0.01);
        let rows = CertificateRow::combine(
            &certify_lower_bound(&law, (0.5, 2.0), &grid).unwrap(),
            &certify_h_bound(&law, (0.5, 2.0), &grid).unwrap(),
        );
        let mut buf = Vec::new();
        write_certificate_csv(&rows, &mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("r,c_middle,c_outer,C_ratio,valid"));
        assert_eq!(read_certificate_csv(&buf[..]).unwrap(), rows);
    }
}
