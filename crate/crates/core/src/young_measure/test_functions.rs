use std::f64::consts::PI;

/// Space-time test function with analytic first derivatives.
pub trait SpaceTimeFunction: Sync {
    fn id(&self) -> String;
    fn value(&self, t: f64, x: f64) -> f64;
    fn dt(&self, t: f64, x: f64) -> f64;
    fn dx(&self, t: f64, x: f64) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpatialFactor {
    One,
    X,
    /// `cos(kπx/L)`
    Cos(u32),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TemporalFactor {
    One,
    T,
    OnePlusT,
}

/// Vanishes at `x = 0` and `x = L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VectorSpatialFactor {
    /// `sin(kπx/L)`
    Sin(u32),
    /// `x(L - x)`
    Parabola,
}

impl TemporalFactor {
    fn value(self, t: f64) -> f64 {
        match self {
            Self::One => 1.0,
            Self::T => t,
            Self::OnePlusT => 1.0 + t,
        }
    }
    fn derivative(self) -> f64 {
        match self {
            Self::One => 0.0,
            Self::T | Self::OnePlusT => 1.0,
        }
    }
    fn id(self) -> &'static str {
        match self {
            Self::One => "1",
            Self::T => "t",
            Self::OnePlusT => "1+t",
        }
    }
}

/// `spatial(x) · temporal(t)` on `[0, L]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestFunction {
    pub spatial: SpatialFactor,
    pub temporal: TemporalFactor,
    pub length: f64,
}

impl TestFunction {
    fn space(&self, x: f64) -> (f64, f64) {
        match self.spatial {
            SpatialFactor::One => (1.0, 0.0),
            SpatialFactor::X => (x, 1.0),
            SpatialFactor::Cos(k) => {
                let w = k as f64 * PI / self.length;
                ((w * x).cos(), -w * (w * x).sin())
            }
        }
    }
}

impl SpaceTimeFunction for TestFunction {
    fn id(&self) -> String {
        let s = match self.spatial {
            SpatialFactor::One => "1".to_string(),
            SpatialFactor::X => "x".to_string(),
            SpatialFactor::Cos(k) => format!("cos{k}"),
        };
        format!("{s}*({})", self.temporal.id())
    }
    fn value(&self, t: f64, x: f64) -> f64 {
        self.space(x).0 * self.temporal.value(t)
    }
    fn dt(&self, _t: f64, x: f64) -> f64 {
        self.space(x).0 * self.temporal.derivative()
    }
    fn dx(&self, t: f64, x: f64) -> f64 {
        self.space(x).1 * self.temporal.value(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VectorTestFunction {
    pub spatial: VectorSpatialFactor,
    pub temporal: TemporalFactor,
    pub length: f64,
}

impl VectorTestFunction {
    fn space(&self, x: f64) -> (f64, f64) {
        match self.spatial {
            VectorSpatialFactor::Sin(k) => {
                let w = k as f64 * PI / self.length;
                ((w * x).sin(), w * (w * x).cos())
            }
            VectorSpatialFactor::Parabola => (x * (self.length - x), self.length - 2.0 * x),
        }
    }
}

impl SpaceTimeFunction for VectorTestFunction {
    fn id(&self) -> String {
        let s = match self.spatial {
            VectorSpatialFactor::Sin(k) => format!("sin{k}"),
            VectorSpatialFactor::Parabola => "x(L-x)".to_string(),
        };
        format!("{s}*({})", self.temporal.id())
    }
    fn value(&self, t: f64, x: f64) -> f64 {
        self.space(x).0 * self.temporal.value(t)
    }
    fn dt(&self, _t: f64, x: f64) -> f64 {
        self.space(x).0 * self.temporal.derivative()
    }
    fn dx(&self, t: f64, x: f64) -> f64 {
        self.space(x).1 * self.temporal.value(t)
    }
}

const TEMPORAL: [TemporalFactor; 3] = [TemporalFactor::One, TemporalFactor::T, TemporalFactor::OnePlusT];

/// `{1, x, cos(πx/L), cos(2πx/L)} × {1, t, 1 + t}`.
pub fn scalar_library(length: f64) -> Vec<TestFunction> {
    let spatial = [SpatialFactor::One, SpatialFactor::X, SpatialFactor::Cos(1), SpatialFactor::Cos(2)];
    spatial
        .iter()
        .flat_map(|&s| {
            TEMPORAL.iter().map(move |&t| TestFunction {
                spatial: s,
                temporal: t,
                length,
            })
        })
        .collect()
}

/// `{sin(πx/L), sin(2πx/L), x(L - x)} × {1, t, 1 + t}`.
pub fn momentum_library(length: f64) -> Vec<VectorTestFunction> {
    let spatial = [
        VectorSpatialFactor::Sin(1),
        VectorSpatialFactor::Sin(2),
        VectorSpatialFactor::Parabola,
    ];
    spatial
        .iter()
        .flat_map(|&s| {
            TEMPORAL.iter().map(move |&t| VectorTestFunction {
                spatial: s,
                temporal: t,
                length,
            })
        })
        .collect()
}

/// Symmetric-matrix test fields for the compatibility condition; in one
/// dimension these are the scalar library.
pub fn matrix_library(length: f64) -> Vec<TestFunction> {
    scalar_library(length)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_derivatives(f: &dyn SpaceTimeFunction) {
        let h = 1e-6;
        for &(t, x) in &[(0.1, 0.3), (0.7, 0.9), (0.0, 0.05)] {
            let fd_x = (f.value(t, x + h) - f.value(t, x - h)) / (2.0 * h);
            let fd_t = (f.value(t + h, x) - f.value(t - h, x)) / (2.0 * h);
            assert!((fd_x - f.dx(t, x)).abs() < 1e-7, "{}", f.id());
            assert!((fd_t - f.dt(t, x)).abs() < 1e-7, "{}", f.id());
        }
    }

    #[test]
    fn analytic_derivatives_match_differences() {
        for f in scalar_library(1.3) {
            check_derivatives(&f);
        }
        for f in momentum_library(1.3) {
            check_derivatives(&f);
            assert!(f.value(0.4, 0.0).abs() < 1e-15 && f.value(0.4, 1.3).abs() < 1e-12);
        }
    }

    #[test]
    fn ids_are_unique() {
        let mut ids: Vec<String> = scalar_library(1.0).iter().map(|f| f.id()).collect();
        ids.extend(momentum_library(1.0).iter().map(|f| f.id()));
        let n = ids.len();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), n);
    }
}
