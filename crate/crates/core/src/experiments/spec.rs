use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::pressure_law::LawConfig;
use crate::solver1d::{FluidState, Grid1D, SolverConfig, DEFAULT_CFL, DEFAULT_FLOOR};
use crate::weak_strong::EstimatorConfig;

pub const SCHEMA_VERSION: u32 = 1;

/// Initial profile `x -> (ρ, u)`.
pub type Profile = Box<dyn Fn(f64) -> (f64, f64) + Send + Sync>;

/// Names accepted in `checks`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    Energy,
    Continuity,
    Renorm,
    Momentum,
    Compatibility,
    Korn,
    Lemmas,
    RelativeEnergy,
    Gronwall,
}

impl Check {
    pub const ALL: [Check; 9] = [
        Check::Energy,
        Check::Continuity,
        Check::Renorm,
        Check::Momentum,
        Check::Compatibility,
        Check::Korn,
        Check::Lemmas,
        Check::RelativeEnergy,
        Check::Gronwall,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Energy => "energy",
            Check::Continuity => "continuity",
            Check::Renorm => "renorm",
            Check::Momentum => "momentum",
            Check::Compatibility => "compatibility",
            Check::Korn => "korn",
            Check::Lemmas => "lemmas",
            Check::RelativeEnergy => "relative-energy",
            Check::Gronwall => "gronwall",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub n: usize,
    #[serde(default = "one")]
    pub length: f64,
    pub t_end: f64,
    pub lambda: f64,
    #[serde(default)]
    pub mu: f64,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default = "default_floor")]
    pub floor: f64,
    /// Snapshot spacing; every step is stored when absent.
    pub output_dt: Option<f64>,
    #[serde(default)]
    pub delta: f64,
    #[serde(default = "two")]
    pub big_gamma: f64,
}

fn one() -> f64 {
    1.0
}
fn two() -> f64 {
    2.0
}
fn default_cfl() -> f64 {
    DEFAULT_CFL
}
fn default_floor() -> f64 {
    DEFAULT_FLOOR
}

/// Initial density and velocity profile on `[0, L]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialSpec {
    Constant {
        rho: f64,
        #[serde(default)]
        u: f64,
    },
    /// `base + amplitude exp(-((x - center)/width)²)`, velocity `velocity sin(πx/L)`.
    Pulse {
        base: f64,
        amplitude: f64,
        center: f64,
        width: f64,
        #[serde(default)]
        velocity: f64,
    },
    /// `base + amplitude cos(2π mode x/L)`, velocity `velocity sin(πx/L)`.
    Cosine {
        base: f64,
        amplitude: f64,
        #[serde(default = "one_usize")]
        mode: usize,
        #[serde(default)]
        velocity: f64,
    },
    /// Piecewise-linear profile read from an `x,rho,u` CSV.
    Csv { path: String },
}

fn one_usize() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerturbationMode {
    /// Every member equals the base run.
    None,
    /// Density `ρ₀(1 + ε ξ_k)` with seeded smooth noise `ξ_k`.
    Noise,
    /// Member `k` uses artificial pressure weight `deltas[k]`.
    Delta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    pub members: usize,
    pub mode: PerturbationMode,
    #[serde(default)]
    pub epsilon: f64,
    /// Fourier modes in the noise.
    #[serde(default = "default_noise_modes")]
    pub noise_modes: usize,
    #[serde(default)]
    pub deltas: Vec<f64>,
}

fn default_noise_modes() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorSpec {
    pub epsilon: Option<f64>,
    pub delta_split: Option<f64>,
    pub c_p: Option<f64>,
    /// Weight of `ζ` in the total defect.
    pub defect_c: Option<f64>,
    /// Residual tolerance `abs + c_res (dx + dt)`.
    pub residual_abs: Option<f64>,
    pub residual_c: Option<f64>,
    /// Renormalization `b(s) = s` up to this density, constant beyond `renorm_rb`.
    pub renorm_r0: Option<f64>,
    pub renorm_rb: Option<f64>,
    /// Scale of the uniqueness floor; defaults to the reference energy.
    pub e_ref: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifySpec {
    pub r_range: Option<[f64; 2]>,
    pub grid_step: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub schema: u32,
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    pub out: Option<String>,
    pub checks: Vec<Check>,
    pub law: LawConfig,
    pub solver: SolverSpec,
    pub initial: InitialSpec,
    pub ensemble: EnsembleSpec,
    #[serde(default)]
    pub estimator: EstimatorSpec,
    #[serde(default)]
    pub certify: CertifySpec,
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self, ExperimentError> {
        let spec: Self = toml::from_str(text).map_err(|e| ExperimentError::InvalidSpec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_file(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path).map_err(|e| ExperimentError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("experiment spec serializes")
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |msg: String| Err(ExperimentError::InvalidSpec(msg));
        if self.schema != SCHEMA_VERSION {
            return bad(format!("schema {} is not supported (expected {SCHEMA_VERSION})", self.schema));
        }
        if self.name.is_empty() {
            return bad("name is empty".into());
        }
        let e = &self.ensemble;
        if e.members == 0 {
            return bad("ensemble.members must be at least 1".into());
        }
        match e.mode {
            PerturbationMode::Delta if e.deltas.len() != e.members => {
                return bad(format!("ensemble.deltas has {} entries for {} members", e.deltas.len(), e.members))
            }
            PerturbationMode::Delta if e.deltas.iter().any(|d| !(*d >= 0.0)) => {
                return bad("ensemble.deltas must be non-negative".into())
            }
            PerturbationMode::Noise if !(e.epsilon >= 0.0 && e.epsilon < 1.0) => {
                return bad(format!("ensemble.epsilon = {} must lie in [0, 1)", e.epsilon))
            }
            PerturbationMode::Noise if e.noise_modes == 0 => return bad("ensemble.noise_modes must be positive".into()),
            _ => {}
        }
        if let InitialSpec::Csv { .. } = self.initial {
        } else if self.initial_profile_min() <= 0.0 {
            return bad("initial density must be positive".into());
        }
        self.law.build().map_err(|e| ExperimentError::InvalidSpec(format!("law: {e}")))?;
        self.solver_config(self.solver.n)?;
        Ok(())
    }

    fn initial_profile_min(&self) -> f64 {
        match self.initial {
            InitialSpec::Constant { rho, .. } => rho,
            InitialSpec::Pulse { base, amplitude, .. } => base + amplitude.min(0.0),
            InitialSpec::Cosine { base, amplitude, .. } => base - amplitude.abs(),
            InitialSpec::Csv { .. } => 1.0,
        }
    }

    /// Solver configuration at resolution `n`; snapshot spacing scales as `1/n`.
    pub fn solver_config(&self, n: usize) -> Result<SolverConfig, ExperimentError> {
        let s = &self.solver;
        let grid = Grid1D::new(n, s.length).map_err(|e| ExperimentError::InvalidSpec(format!("solver: {e}")))?;
        let law = self.law.build().map_err(|e| ExperimentError::InvalidSpec(format!("law: {e}")))?;
        let mut cfg = SolverConfig::new(grid, law, s.lambda, s.t_end);
        cfg.mu = s.mu;
        cfg.cfl = s.cfl;
        cfg.floor = s.floor;
        cfg.delta = s.delta;
        cfg.big_gamma = s.big_gamma;
        cfg.output_dt = s.output_dt.map(|dt| dt * s.n as f64 / n as f64);
        cfg.track_budget = self.checks.contains(&Check::Energy);
        cfg.validate().map_err(|e| ExperimentError::InvalidSpec(format!("solver: {e}")))?;
        Ok(cfg)
    }

    /// Base initial profile `x -> (ρ, u)`; CSV paths resolve against `base_dir`.
    pub fn initial_profile(&self, base_dir: &Path) -> Result<Profile, ExperimentError> {
        let length = self.solver.length;
        Ok(match self.initial.clone() {
            InitialSpec::Constant { rho, u } => Box::new(move |_| (rho, u)),
            InitialSpec::Pulse {
                base,
                amplitude,
                center,
                width,
                velocity,
            } => Box::new(move |x| {
                (
                    base + amplitude * (-((x - center) / width).powi(2)).exp(),
                    velocity * (PI * x / length).sin(),
                )
            }),
            InitialSpec::Cosine {
                base,
                amplitude,
                mode,
                velocity,
            } => Box::new(move |x| {
                (
                    base + amplitude * (2.0 * PI * mode as f64 * x / length).cos(),
                    velocity * (PI * x / length).sin(),
                )
            }),
            InitialSpec::Csv { path } => {
                let full = base_dir.join(path);
                let file = std::fs::File::open(&full).map_err(|e| ExperimentError::Io(format!("{}: {e}", full.display())))?;
                let f = crate::solver1d::read_initial_csv(file)
                    .map_err(|e| ExperimentError::InvalidSpec(format!("initial csv {}: {e}", full.display())))?;
                Box::new(f)
            }
        })
    }

    /// Per-member initial states and solver configurations.
    pub fn members(
        &self,
        cfg: &SolverConfig,
        base_dir: &Path,
    ) -> Result<Vec<(SolverConfig, FluidState)>, ExperimentError> {
        let profile = self.initial_profile(base_dir)?;
        let e = &self.ensemble;
        (0..e.members)
            .map(|k| {
                let mut member_cfg = cfg.clone();
                let state = match e.mode {
                    PerturbationMode::None => FluidState::from_profile(&cfg.grid, &profile),
                    PerturbationMode::Delta => {
                        member_cfg.delta = e.deltas[k];
                        FluidState::from_profile(&cfg.grid, &profile)
                    }
                    PerturbationMode::Noise => {
                        let xi = noise(self.seed, k, e.noise_modes, self.solver.length);
                        FluidState::from_profile(&cfg.grid, |x| {
                            let (rho, u) = profile(x);
                            (rho * (1.0 + e.epsilon * xi(x)), u)
                        })
                    }
                };
                Ok((member_cfg, state))
            })
            .collect()
    }

    pub fn estimator_config(&self) -> EstimatorConfig {
        EstimatorConfig {
            epsilon: self.estimator.epsilon,
            delta_split: self.estimator.delta_split,
            c_p: self.estimator.c_p,
            ..EstimatorConfig::default()
        }
    }
}

/// Smooth noise with `max |ξ| ≤ 1`, a fixed function of `(seed, member)`.
pub fn noise(seed: u64, member: usize, modes: usize, length: f64) -> impl Fn(f64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(member as u64);
    let coeffs: Vec<(f64, f64)> = (0..modes).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let norm: f64 = coeffs.iter().map(|(a, b)| a.abs() + b.abs()).sum::<f64>().max(f64::MIN_POSITIVE);
    move |x| {
        coeffs
            .iter()
            .enumerate()
            .map(|(m, (a, b))| {
                let arg = 2.0 * PI * (m + 1) as f64 * x / length;
                a * arg.cos() + b * arg.sin()
            })
            .sum::<f64>()
            / norm
    }
}
