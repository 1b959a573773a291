use std::fmt;
use std::sync::Arc;

use super::MeasureError;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Constant(f64),
    /// `b' = 1` below `r0`, smoothstep down to `0` at `r_b`.
    Truncation { r0: f64 },
    Custom { b: ScalarFn, db: ScalarFn },
}

/// `b ∈ C¹[0, ∞)` with `b'(s) = 0` for `s > r_b`.
#[derive(Clone)]
pub struct RenormFunction {
    kind: Kind,
    r_b: f64,
}

impl fmt::Debug for RenormFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.kind {
            Kind::Constant(c) => format!("Constant({c})"),
            Kind::Truncation { r0 } => format!("Truncation {{ r0: {r0} }}"),
            Kind::Custom { .. } => "Custom".to_string(),
        };
        write!(f, "RenormFunction {{ {kind}, r_b: {} }}", self.r_b)
    }
}

impl RenormFunction {
    pub fn constant(c: f64) -> Self {
        Self {
            kind: Kind::Constant(c),
            r_b: 0.0,
        }
    }

    /// `b(s) = s` on `[0, r0]`, flattening smoothly to the constant
    /// `r0 + (r_b - r0)/2` at `r_b`.
    pub fn truncation(r0: f64, r_b: f64) -> Result<Self, MeasureError> {
        if !(r0 >= 0.0 && r_b > r0 && r_b.is_finite()) {
            return Err(MeasureError::Invalid(format!("truncation needs 0 <= r0 < r_b, got {r0}, {r_b}")));
        }
        Ok(Self {
            kind: Kind::Truncation { r0 },
            r_b,
        })
    }

    /// User-supplied `b` and `b'`; the threshold is checked on a grid.
    pub fn custom<B, D>(b: B, db: D, r_b: f64) -> Result<Self, MeasureError>
    where
        B: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let f = Self {
            kind: Kind::Custom {
                b: Arc::new(b),
                db: Arc::new(db),
            },
            r_b,
        };
        f.check_threshold(10.0 * r_b.max(1.0), 10_000)?;
        Ok(f)
    }

    pub fn r_b(&self) -> f64 {
        self.r_b
    }

    pub fn value(&self, s: f64) -> f64 {
        match &self.kind {
            Kind::Constant(c) => *c,
            Kind::Truncation { r0 } => {
                if s <= *r0 {
                    return s;
                }
                let w = self.r_b - r0;
                let t = ((s - r0) / w).min(1.0);
                r0 + w * (t - t * t * t + 0.5 * t * t * t * t)
            }
            Kind::Custom { b, .. } => b(s),
        }
    }

    pub fn derivative(&self, s: f64) -> f64 {
        match &self.kind {
            Kind::Constant(_) => 0.0,
            Kind::Truncation { r0 } => {
                if s <= *r0 {
                    return 1.0;
                }
                let t = ((s - r0) / (self.r_b - r0)).min(1.0);
                1.0 - t * t * (3.0 - 2.0 * t)
            }
            Kind::Custom { db, .. } => db(s),
        }
    }

    /// Verifies `b' = 0` on `n` points of `(r_b, s_max]`.
    pub fn check_threshold(&self, s_max: f64, n: usize) -> Result<(), MeasureError> {
        for i in 1..=n {
            let s = self.r_b + (s_max - self.r_b) * i as f64 / n as f64;
            if self.derivative(s) != 0.0 {
                return Err(MeasureError::Invalid(format!("b'({s}) = {} beyond r_b = {}", self.derivative(s), self.r_b)));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncation_is_c1_and_flat() {
        let b = RenormFunction::truncation(1.0, 2.0).unwrap();
        assert_eq!(b.value(0.7), 0.7);
        assert_eq!(b.value(5.0), 1.5);
        assert!(b.check_threshold(20.0, 1000).is_ok());
        let h = 1e-6;
        for s in [0.5, 1.2, 1.5, 1.9, 2.5] {
            let fd = (b.value(s + h) - b.value(s - h)) / (2.0 * h);
            assert!((fd - b.derivative(s)).abs() < 1e-8);
        }
    }

    #[test]
    fn custom_threshold_enforced() {
        assert!(RenormFunction::custom(|s| s, |_| 1.0, 2.0).is_err());
        assert!(RenormFunction::custom(|s: f64| s.min(2.0), |s| if s < 2.0 { 1.0 } else { 0.0 }, 2.0).is_ok());
    }
}
