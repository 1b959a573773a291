use super::LawError;

/// Monotone cubic Hermite interpolant of strictly increasing samples of
/// `h`, starting at `(0, 0)`. Beyond the last node the table continues as
/// `h_n + (s_n ρ_n / γ)((ρ/ρ_n)^γ - 1)`, which matches value and slope.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    rho: Vec<f64>,
    h: Vec<f64>,
    slope: Vec<f64>,
    gamma: f64,
}

impl Table {
    pub fn new(rho: Vec<f64>, h: Vec<f64>, gamma: f64) -> Result<Self, LawError> {
        if rho.len() != h.len() || rho.len() < 2 {
            return Err(LawError::InvalidParameter(
                "table needs at least two (rho, h) samples of equal length".into(),
            ));
        }
        if rho[0] != 0.0 || h[0] != 0.0 {
            return Err(LawError::InvalidParameter("table must start at (0, 0)".into()));
        }
        if !(gamma >= 1.0 && gamma.is_finite()) {
            return Err(LawError::InvalidParameter(format!("table tail gamma = {gamma} must be >= 1")));
        }
        for i in 1..rho.len() {
            if !(rho[i] > rho[i - 1]) || !(h[i] > h[i - 1]) {
                return Err(LawError::InvalidParameter(format!(
                    "table samples must be strictly increasing (row {i})"
                )));
            }
        }
        let n = rho.len();
        let secant: Vec<f64> = (0..n - 1).map(|i| (h[i + 1] - h[i]) / (rho[i + 1] - rho[i])).collect();
        let mut slope = vec![0.0; n];
        slope[0] = secant[0];
        slope[n - 1] = secant[n - 2];
        for i in 1..n - 1 {
            // Fritsch-Butland weighted harmonic mean
            let (dl, dr) = (rho[i] - rho[i - 1], rho[i + 1] - rho[i]);
            let (w1, w2) = (2.0 * dr + dl, dr + 2.0 * dl);
            slope[i] = (w1 + w2) / (w1 / secant[i - 1] + w2 / secant[i]);
        }
        Ok(Self { rho, h, slope, gamma })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn nodes(&self) -> (&[f64], &[f64]) {
        (&self.rho, &self.h)
    }

    fn segment(&self, x: f64) -> usize {
        match self.rho.binary_search_by(|p| p.total_cmp(&x)) {
            Ok(i) => i.min(self.rho.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.rho.len() - 2),
        }
    }

    fn tail(&self) -> (f64, f64, f64) {
        let n = self.rho.len() - 1;
        (self.rho[n], self.h[n], self.slope[n])
    }

    pub fn value(&self, x: f64) -> f64 {
        let (rn, hn, sn) = self.tail();
        if x > rn {
            return hn + sn * rn / self.gamma * ((x / rn).powf(self.gamma) - 1.0);
        }
        let i = self.segment(x);
        let w = self.rho[i + 1] - self.rho[i];
        let t = (x - self.rho[i]) / w;
        let (t2, t3) = (t * t, t * t * t);
        (2.0 * t3 - 3.0 * t2 + 1.0) * self.h[i]
            + (t3 - 2.0 * t2 + t) * w * self.slope[i]
            + (-2.0 * t3 + 3.0 * t2) * self.h[i + 1]
            + (t3 - t2) * w * self.slope[i + 1]
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let (rn, _, sn) = self.tail();
        if x > rn {
            return sn * (x / rn).powf(self.gamma - 1.0);
        }
        let i = self.segment(x);
        let w = self.rho[i + 1] - self.rho[i];
        let t = (x - self.rho[i]) / w;
        let t2 = t * t;
        ((6.0 * t2 - 6.0 * t) * self.h[i] + (6.0 * t - 6.0 * t2) * self.h[i + 1]) / w
            + (3.0 * t2 - 4.0 * t + 1.0) * self.slope[i]
            + (3.0 * t2 - 2.0 * t) * self.slope[i + 1]
    }

    /// Interior table nodes strictly between `lo` and `hi`.
    pub(crate) fn breakpoints_between(&self, lo: f64, hi: f64) -> Vec<f64> {
        self.rho.iter().copied().filter(|&x| x > lo && x < hi).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sampled_square() -> Table {
        let rho: Vec<f64> = (0..=40).map(|i| i as f64 * 0.25).collect();
        let h = rho.iter().map(|r| r * r).collect();
        Table::new(rho, h, 2.0).unwrap()
    }

    #[test]
    fn interpolates_nodes_and_is_c1() {
        let t = sampled_square();
        assert_eq!(t.value(2.5), 6.25);
        for &x in &[0.25, 1.0, 5.75, 10.0] {
            let (l, r) = (t.derivative(x - 1e-12), t.derivative(x + 1e-12));
            assert!((l - r).abs() < 1e-9, "slope jump at {x}: {l} vs {r}");
        }
        assert!((t.value(3.1) - 3.1 * 3.1).abs() < 5e-3);
    }

    #[test]
    fn monotone_between_nodes() {
        let rho = vec![0.0, 0.1, 0.2, 3.0, 3.1];
        let h = vec![0.0, 1.0, 1.01, 1.02, 5.0];
        let t = Table::new(rho, h, 1.5).unwrap();
        for i in 1..3100 {
            assert!(t.derivative(i as f64 * 1e-3) >= 0.0);
        }
    }

    #[test]
    fn rejects_non_increasing() {
        assert!(Table::new(vec![0.0, 1.0, 1.0], vec![0.0, 1.0, 2.0], 2.0).is_err());
        assert!(Table::new(vec![0.1, 1.0], vec![0.0, 1.0], 2.0).is_err());
    }
}
