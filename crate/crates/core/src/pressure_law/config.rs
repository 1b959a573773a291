use serde::{Deserialize, Serialize};

use super::{build_bump_q, LawError, PressureLaw, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum LawKind {
    #[default]
    Power,
    Tabulated,
}

/// Key-value description of a pressure law.
///
/// ```toml
/// kind = "power"
/// a = 1.0
/// gamma = 2.0
/// bump = [1.0, 2.0, 0.05]   # q1, q2, A
/// ```
///
/// Tabulated laws give `rho` and `h` sample arrays; `gamma` then sets the
/// tail exponent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawConfig {
    #[serde(default)]
    pub kind: LawKind,
    #[serde(default = "one")]
    pub a: f64,
    #[serde(default = "two")]
    pub gamma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bump: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rho: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub h: Vec<f64>,
}

fn one() -> f64 {
    1.0
}
fn two() -> f64 {
    2.0
}

impl Default for LawConfig {
    fn default() -> Self {
        Self {
            kind: LawKind::Power,
            a: 1.0,
            gamma: 2.0,
            bump: None,
            rho: Vec::new(),
            h: Vec::new(),
        }
    }
}

impl LawConfig {
    pub fn power(a: f64, gamma: f64) -> Self {
        Self { a, gamma, ..Self::default() }
    }

    pub fn with_bump(mut self, q1: f64, q2: f64, amplitude: f64) -> Self {
        self.bump = Some([q1, q2, amplitude]);
        self
    }

    pub fn build(&self) -> Result<PressureLaw, LawError> {
        let mut law = match self.kind {
            LawKind::Power => PressureLaw::power(self.a, self.gamma)?,
            LawKind::Tabulated => PressureLaw::tabulated(Table::new(self.rho.clone(), self.h.clone(), self.gamma)?),
        };
        if let Some([q1, q2, amplitude]) = self.bump {
            law = law.with_bump(build_bump_q(q1, q2, amplitude)?);
        }
        Ok(law)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip() {
        let cfg = LawConfig::power(1.5, 1.4).with_bump(1.0, 2.0, 0.05);
        let text = toml::to_string(&cfg).unwrap();
        let back: LawConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, cfg);
        let law = back.build().unwrap();
        assert!((law.q(1.5) - 0.05).abs() < 1e-15);
    }

    #[test]
    fn tabulated_from_text() {
        let cfg: LawConfig = toml::from_str("kind = 'tabulated'\ngamma = 2.0\nrho = [0.0, 1.0, 2.0]\nh = [0.0, 1.0, 4.0]").unwrap();
        let law = cfg.build().unwrap();
        assert_eq!(law.h(2.0), 4.0);
        assert!(toml::from_str::<LawConfig>("kind = 'power'\nbogus = 1").is_err());
    }
}
