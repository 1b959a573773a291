//! Pressure laws `p = h + q` with a monotone part `h` and a compactly
//! supported perturbation `q`, together with the pressure potentials
//! `H(ρ) = ρ ∫₁^ρ h(z)/z² dz`, `Q(ρ) = ρ ∫₁^ρ q(z)/z² dz` and the Bregman
//! distance of `H`.

mod certify;
mod config;
mod table;
pub(crate) use certify::r_samples;

pub use certify::{
    certify_h_bound, certify_lower_bound, certify_lower_bound_on_band, default_grid, read_certificate_csv,
    write_certificate_csv, CertificateRow, HBoundCertificate, HBoundRow, LowerBoundCertificate, LowerBoundRow,
    EXCLUSION_BAND,
};
pub use config::{LawConfig, LawKind};
pub use table::Table;

use thiserror::Error;

use crate::quadrature::{self, QuadratureError, Tolerance};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LawError {
    #[error("invalid bump support [{q1}, {q2}]: need 0 < q1 < q2")]
    InvalidSupport { q1: f64, q2: f64 },
    #[error("density {rho} outside the domain of {what}")]
    Domain { what: &'static str, rho: f64 },
    #[error("invalid law parameter: {0}")]
    InvalidParameter(String),
    #[error("monotone part is not strictly increasing: h'({rho}) = {slope}")]
    NotMonotone { rho: f64, slope: f64 },
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("insufficient certification grid: {0}")]
    InsufficientGrid(String),
    #[error("certification failed at {} (rho, r) pairs, first {:?}", .violations.len(), .violations.first())]
    CertificationFailure { violations: Vec<(f64, f64)> },
}

/// Monotone pressure component `h`.
#[derive(Debug, Clone, PartialEq)]
pub enum MonotonePart {
    /// `h(ρ) = a ρ^γ`.
    PowerLaw { a: f64, gamma: f64 },
    Tabulated(Table),
}

/// `q(ρ) = A ψ((ρ - q1) / (q2 - q1))` with `ψ(t) = 16 t² (1 - t)²` on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub q1: f64,
    pub q2: f64,
    pub amplitude: f64,
}

pub fn build_bump_q(q1: f64, q2: f64, amplitude: f64) -> Result<Bump, LawError> {
    if !(q1 > 0.0 && q2 > q1 && q2.is_finite()) {
        return Err(LawError::InvalidSupport { q1, q2 });
    }
    if !amplitude.is_finite() {
        return Err(LawError::InvalidParameter(format!("bump amplitude {amplitude}")));
    }
    Ok(Bump { q1, q2, amplitude })
}

impl Bump {
    fn local(&self, rho: f64) -> Option<(f64, f64)> {
        if rho <= self.q1 || rho >= self.q2 {
            return None;
        }
        let width = self.q2 - self.q1;
        Some(((rho - self.q1) / width, width))
    }

    pub fn value(&self, rho: f64) -> f64 {
        match self.local(rho) {
            Some((t, _)) => {
                let s = t * (1.0 - t);
                self.amplitude * 16.0 * s * s
            }
            None => 0.0,
        }
    }

    pub fn derivative(&self, rho: f64) -> f64 {
        match self.local(rho) {
            Some((t, width)) => self.amplitude * 32.0 * t * (1.0 - t) * (1.0 - 2.0 * t) / width,
            None => 0.0,
        }
    }

    /// `max |q'|`, attained at `t = 1/2 ± 1/(2√3)`.
    pub fn lipschitz(&self) -> f64 {
        let t = 0.5 - 0.5 / 3f64.sqrt();
        (self.amplitude * 32.0 * t * (1.0 - t) * (1.0 - 2.0 * t) / (self.q2 - self.q1)).abs()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PressureLaw {
    pub monotone: MonotonePart,
    pub bump: Option<Bump>,
}

/// `(1 + x)^γ - 1 - γx` without cancellation near `x = 0`.
fn power_remainder(gamma: f64, x: f64) -> f64 {
    if x.abs() < 0.1 {
        let mut coeff = gamma * (gamma - 1.0) / 2.0;
        let mut power = x * x;
        let mut sum = 0.0;
        for k in 2..200 {
            let term = coeff * power;
            sum += term;
            if term.abs() <= 1e-18 * sum.abs() || coeff == 0.0 {
                break;
            }
            coeff *= (gamma - k as f64) / (k as f64 + 1.0);
            power *= x;
        }
        sum
    } else {
        (1.0 + x).powf(gamma) - 1.0 - gamma * x
    }
}

/// `(1 + x) ln(1 + x) - x`, stable near `x = 0`.
fn entropy_remainder(x: f64) -> f64 {
    if x.abs() < 0.1 {
        let mut sum = 0.0;
        let mut power = x * x;
        for k in 2..200 {
            let kf = k as f64;
            let term = power / (kf * (kf - 1.0));
            sum += if k % 2 == 0 { term } else { -term };
            if term.abs() <= 1e-18 * sum.abs() {
                break;
            }
            power *= x;
        }
        sum
    } else if x == -1.0 {
        1.0
    } else {
        (1.0 + x) * x.ln_1p() - x
    }
}

impl PressureLaw {
    pub fn power(a: f64, gamma: f64) -> Result<Self, LawError> {
        let law = Self {
            monotone: MonotonePart::PowerLaw { a, gamma },
            bump: None,
        };
        law.check_parameters()?;
        Ok(law)
    }

    pub fn with_bump(mut self, bump: Bump) -> Self {
        self.bump = Some(bump);
        self
    }

    pub fn tabulated(table: Table) -> Self {
        Self {
            monotone: MonotonePart::Tabulated(table),
            bump: None,
        }
    }

    /// Growth exponent of `h`.
    pub fn gamma(&self) -> f64 {
        match &self.monotone {
            MonotonePart::PowerLaw { gamma, .. } => *gamma,
            MonotonePart::Tabulated(t) => t.gamma(),
        }
    }

    fn check_parameters(&self) -> Result<(), LawError> {
        if let MonotonePart::PowerLaw { a, gamma } = self.monotone {
            if !(a > 0.0 && a.is_finite()) {
                return Err(LawError::InvalidParameter(format!("a = {a} must be positive")));
            }
            if !(gamma >= 1.0 && gamma.is_finite()) {
                return Err(LawError::InvalidParameter(format!("gamma = {gamma} must be >= 1")));
            }
        }
        Ok(())
    }

    /// Checks the structural invariants: parameters, `h(0) = 0`, and
    /// `h' > 0` on a grid of `(0, rho_max]`.
    pub fn validate(&self, rho_max: f64) -> Result<(), LawError> {
        self.check_parameters()?;
        if self.h(0.0) != 0.0 {
            return Err(LawError::InvalidParameter("h(0) must vanish".into()));
        }
        let n = 2000;
        for i in 1..=n {
            let rho = rho_max * i as f64 / n as f64;
            let slope = self.dh(rho);
            if !(slope > 0.0) {
                return Err(LawError::NotMonotone { rho, slope });
            }
        }
        Ok(())
    }

    pub fn h(&self, rho: f64) -> f64 {
        match &self.monotone {
            MonotonePart::PowerLaw { a, gamma } => a * rho.powf(*gamma),
            MonotonePart::Tabulated(t) => t.value(rho),
        }
    }

    pub fn dh(&self, rho: f64) -> f64 {
        match &self.monotone {
            MonotonePart::PowerLaw { a, gamma } => {
                if *gamma == 1.0 {
                    *a
                } else {
                    a * gamma * rho.powf(gamma - 1.0)
                }
            }
            MonotonePart::Tabulated(t) => t.derivative(rho),
        }
    }

    pub fn q(&self, rho: f64) -> f64 {
        self.bump.map_or(0.0, |b| b.value(rho))
    }

    pub fn dq(&self, rho: f64) -> f64 {
        self.bump.map_or(0.0, |b| b.derivative(rho))
    }

    pub fn pressure(&self, rho: f64) -> Result<f64, LawError> {
        if rho < 0.0 || rho.is_nan() {
            return Err(LawError::Domain { what: "pressure", rho });
        }
        Ok(self.h(rho) + self.q(rho))
    }

    /// `p'(ρ)`; may be negative in the non-monotone regime.
    pub fn dpressure(&self, rho: f64) -> f64 {
        self.dh(rho) + self.dq(rho)
    }

    /// `H(ρ)`, with `H(0)` defined as its limit `0`.
    pub fn potential_h(&self, rho: f64) -> Result<f64, LawError> {
        if rho < 0.0 || rho.is_nan() {
            return Err(LawError::Domain { what: "H", rho });
        }
        if rho == 0.0 {
            return Ok(0.0);
        }
        match &self.monotone {
            MonotonePart::PowerLaw { a, gamma } => Ok(if *gamma == 1.0 {
                a * rho * rho.ln()
            } else {
                a * (rho.powf(*gamma) - rho) / (gamma - 1.0)
            }),
            MonotonePart::Tabulated(t) => {
                let mut breaks = t.breakpoints_between(rho.min(1.0), rho.max(1.0));
                breaks.insert(0, rho.min(1.0));
                breaks.push(rho.max(1.0));
                let mut integral = 0.0;
                for w in breaks.windows(2) {
                    integral += quadrature::integrate(|z| t.value(z) / (z * z), w[0], w[1], Tolerance::default())?.value;
                }
                Ok(if rho < 1.0 { -rho * integral } else { rho * integral })
            }
        }
    }

    /// `H'(ρ)` for `ρ > 0`.
    pub fn potential_dh(&self, rho: f64) -> Result<f64, LawError> {
        if !(rho > 0.0) {
            return Err(LawError::Domain { what: "H'", rho });
        }
        match &self.monotone {
            MonotonePart::PowerLaw { a, gamma } => Ok(if *gamma == 1.0 {
                a * (rho.ln() + 1.0)
            } else {
                a * (gamma * rho.powf(gamma - 1.0) - 1.0) / (gamma - 1.0)
            }),
            MonotonePart::Tabulated(_) => Ok((self.potential_h(rho)? + self.h(rho)) / rho),
        }
    }

    /// `Q(ρ)` by adaptive quadrature of `q(z)/z²` over the part of the
    /// support lying between 1 and ρ.
    pub fn potential_q(&self, rho: f64) -> Result<f64, LawError> {
        if rho < 0.0 || rho.is_nan() {
            return Err(LawError::Domain { what: "Q", rho });
        }
        let Some(bump) = self.bump else { return Ok(0.0) };
        if rho == 0.0 {
            return Ok(0.0);
        }
        let lo = rho.min(1.0).max(bump.q1);
        let hi = rho.max(1.0).min(bump.q2);
        if lo >= hi {
            return Ok(0.0);
        }
        let integral = quadrature::integrate(|z| bump.value(z) / (z * z), lo, hi, Tolerance::default())?.value;
        Ok(if rho < 1.0 { -rho * integral } else { rho * integral })
    }

    pub fn potential_dq(&self, rho: f64) -> Result<f64, LawError> {
        if !(rho > 0.0) {
            return Err(LawError::Domain { what: "Q'", rho });
        }
        Ok((self.potential_q(rho)? + self.q(rho)) / rho)
    }

    /// `P(ρ) = H(ρ) + Q(ρ)`.
    pub fn potential(&self, rho: f64) -> Result<f64, LawError> {
        Ok(self.potential_h(rho)? + self.potential_q(rho)?)
    }

    /// `H(ρ) - H(r) - H'(r)(ρ - r)`.
    pub fn bregman_h(&self, rho: f64, r: f64) -> Result<f64, LawError> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(LawError::Domain { what: "Bregman reference", rho: r });
        }
        if rho < 0.0 || rho.is_nan() {
            return Err(LawError::Domain { what: "Bregman", rho });
        }
        match &self.monotone {
            MonotonePart::PowerLaw { a, gamma } => {
                let x = (rho - r) / r;
                Ok(if *gamma == 1.0 {
                    a * r * entropy_remainder(x)
                } else {
                    a * r.powf(*gamma) / (gamma - 1.0) * power_remainder(*gamma, x)
                })
            }
            MonotonePart::Tabulated(_) => {
                Ok(self.potential_h(rho)? - self.potential_h(r)? - self.potential_dh(r)? * (rho - r))
            }
        }
    }

    /// `h(ρ) - h(r) - h'(r)(ρ - r)`.
    pub fn bregman_small_h(&self, rho: f64, r: f64) -> f64 {
        match &self.monotone {
            MonotonePart::PowerLaw { a, gamma } => {
                if *gamma == 1.0 {
                    0.0
                } else {
                    a * r.powf(*gamma) * power_remainder(*gamma, (rho - r) / r)
                }
            }
            MonotonePart::Tabulated(_) => self.h(rho) - self.h(r) - self.dh(r) * (rho - r),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic() -> PressureLaw {
        PressureLaw::power(1.0, 2.0).unwrap()
    }

    #[test]
    fn bump_values() {
        let b = build_bump_q(1.0, 2.0, 0.1).unwrap();
        assert_eq!(b.value(1.5), 0.1);
        assert_eq!(b.value(0.5), 0.0);
        assert_eq!(b.derivative(1.0), 0.0);
        assert_eq!(b.derivative(2.0), 0.0);
        // one-sided limits of q' at the support ends vanish as well
        assert!(b.derivative(1.0 + 1e-9).abs() < 1e-8);
        assert!(b.derivative(2.0 - 1e-9).abs() < 1e-8);
    }

    #[test]
    fn bump_rejects_bad_support() {
        assert!(matches!(build_bump_q(0.0, 1.0, 0.1), Err(LawError::InvalidSupport { .. })));
        assert!(matches!(build_bump_q(2.0, 1.0, 0.1), Err(LawError::InvalidSupport { .. })));
    }

    #[test]
    fn bump_lipschitz_matches_sampling() {
        let b = build_bump_q(1.0, 3.0, -0.4).unwrap();
        let sampled = (0..=20000)
            .map(|i| b.derivative(1.0 + 2.0 * i as f64 / 20000.0).abs())
            .fold(0.0, f64::max);
        assert!((sampled - b.lipschitz()).abs() < 1e-6);
    }

    #[test]
    fn pressure_examples() {
        let law = quadratic();
        assert_eq!(law.pressure(2.0).unwrap(), 4.0);
        assert_eq!(law.pressure(0.0).unwrap(), 0.0);
        let bumped = quadratic().with_bump(build_bump_q(1.0, 2.0, 0.1).unwrap());
        assert!((bumped.pressure(1.5).unwrap() - 2.35).abs() < 1e-15);
        assert!(matches!(law.pressure(-1.0), Err(LawError::Domain { .. })));
    }

    #[test]
    fn potential_examples() {
        assert_eq!(quadratic().potential(2.0).unwrap(), 2.0);
        let bumped = quadratic().with_bump(build_bump_q(0.5, 2.0, 0.3).unwrap());
        assert_eq!(bumped.potential(1.0).unwrap(), 0.0);
        let iso = PressureLaw::power(1.0, 1.0).unwrap();
        let e = std::f64::consts::E;
        assert!((iso.potential(e).unwrap() - e).abs() < 1e-15);
        assert_eq!(iso.potential(0.0).unwrap(), 0.0);
    }

    #[test]
    fn bregman_examples() {
        let law = quadratic();
        assert!((law.bregman_h(3.0, 1.0).unwrap() - 4.0).abs() < 1e-14);
        assert_eq!(law.bregman_h(1.7, 1.7).unwrap(), 0.0);
        assert!((law.bregman_h(0.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(law.bregman_h(1.0, 0.0), Err(LawError::Domain { .. })));
    }

    #[test]
    fn stable_bregman_agrees_with_naive_away_from_diagonal() {
        for gamma in [1.0, 1.4, 2.0, 3.0] {
            let law = PressureLaw::power(1.3, gamma).unwrap();
            for &(rho, r) in &[(0.2, 1.0), (2.5, 0.7), (5.0, 1.9), (1.05, 1.0)] {
                let naive = law.potential_h(rho).unwrap()
                    - law.potential_h(r).unwrap()
                    - law.potential_dh(r).unwrap() * (rho - r);
                let stable = law.bregman_h(rho, r).unwrap();
                assert!((naive - stable).abs() < 1e-12 * (1.0 + naive.abs()), "{gamma} {rho} {r}");
                let naive_h = law.h(rho) - law.h(r) - law.dh(r) * (rho - r);
                assert!((naive_h - law.bregman_small_h(rho, r)).abs() < 1e-12 * (1.0 + naive_h.abs()));
            }
        }
    }

    #[test]
    fn validate_rejects_nonpositive_coefficients() {
        assert!(PressureLaw::power(0.0, 2.0).is_err());
        assert!(PressureLaw::power(1.0, 0.5).is_err());
        assert!(quadratic().validate(10.0).is_ok());
    }
}
