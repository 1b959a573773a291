use super::WeakStrongError;

/// Initial relative energies below this are treated as zero.
pub const INPUT_FLOOR: f64 = 1e-12;
/// Relative uniqueness floor, scaled by `1 + E_ref`.
pub const OUTPUT_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct GronwallVerdict {
    pub c_total: f64,
    pub t_final: f64,
    pub lambda_bound: f64,
    pub lambda_emp: f64,
    pub e0: f64,
    pub max_e_plus_d: f64,
    /// Set when `E(0)` is below [`INPUT_FLOOR`] and uniqueness is checked instead.
    pub uniqueness: bool,
    pub pass: bool,
}

impl GronwallVerdict {
    pub fn summary(&self) -> String {
        let mode = if self.uniqueness { "uniqueness" } else { "stability" };
        format!(
            "{} mode={mode} E0={:.6e} max(E+D)={:.6e} lambda_emp={:.6e} lambda_bound={:.6e} C={:.6e} T={}",
            if self.pass { "PASS" } else { "FAIL" },
            self.e0,
            self.max_e_plus_d,
            self.lambda_emp,
            self.lambda_bound,
            self.c_total,
            self.t_final
        )
    }
}

/// Compares the observed growth of `E_mv + D` with `exp(C T)`.
pub fn gronwall_verdict(
    times: &[f64],
    e_mv: &[f64],
    defect: &[f64],
    c_total: f64,
    e_ref: f64,
) -> Result<GronwallVerdict, WeakStrongError> {
    if times.is_empty() || times.len() != e_mv.len() || times.len() != defect.len() {
        return Err(WeakStrongError::MismatchedSeries(format!(
            "{} times, {} energies, {} defects",
            times.len(),
            e_mv.len(),
            defect.len()
        )));
    }
    if !(c_total >= 0.0) {
        return Err(WeakStrongError::CannotBound(format!("Gronwall rate {c_total}")));
    }
    let t_final = times[times.len() - 1] - times[0];
    let lambda_bound = (c_total * t_final).exp();
    let e0 = e_mv[0];
    let max_e_plus_d = e_mv.iter().zip(defect).map(|(e, d)| e + d).fold(f64::NEG_INFINITY, f64::max);
    let lambda_emp = max_e_plus_d / e0.max(INPUT_FLOOR);
    let uniqueness = e0 < INPUT_FLOOR;
    let pass = if uniqueness {
        max_e_plus_d < OUTPUT_FLOOR * (1.0 + e_ref.abs())
    } else {
        e_mv.iter()
            .zip(defect)
            .all(|(e, d)| e + d <= lambda_bound * e0 + OUTPUT_FLOOR * (1.0 + e_ref.abs()))
    };
    Ok(GronwallVerdict {
        c_total,
        t_final,
        lambda_bound,
        lambda_emp,
        e0,
        max_e_plus_d,
        uniqueness,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn growth_within_exponential() {
        let times = [0.0, 0.5, 1.0];
        let e = [1.0, 1.2, 1.5];
        let v = gronwall_verdict(&times, &e, &[0.0; 3], 1.0, 1.0).unwrap();
        assert!(v.pass && !v.uniqueness);
        assert!((v.lambda_emp - 1.5).abs() < 1e-15);
        let fast = gronwall_verdict(&times, &[1.0, 2.0, 3.0], &[0.0; 3], 1.0, 1.0).unwrap();
        assert!(!fast.pass);
    }

    #[test]
    fn zero_initial_energy_requires_uniqueness() {
        let times = [0.0, 1.0];
        assert!(gronwall_verdict(&times, &[0.0, 1e-10], &[0.0, 0.0], 5.0, 1.0).unwrap().pass);
        let bad = gronwall_verdict(&times, &[0.0, 1e-6], &[0.0, 0.0], 5.0, 1.0).unwrap();
        assert!(bad.uniqueness && !bad.pass);
    }

    #[test]
    fn mismatched_lengths() {
        assert!(gronwall_verdict(&[0.0], &[0.0, 1.0], &[0.0], 1.0, 0.0).is_err());
    }
}
