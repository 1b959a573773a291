use super::spec::{
    CertifySpec, Check, EnsembleSpec, EstimatorSpec, ExperimentSpec, InitialSpec, PerturbationMode, SolverSpec,
    SCHEMA_VERSION,
};
use crate::pressure_law::LawConfig;

pub const PRESETS: [&str; 5] = [
    "constant-state",
    "smooth-pulse",
    "weak-strong-monotone",
    "weak-strong-bump",
    "delta-sequence",
];

fn solver(n: usize, t_end: f64, output_dt: f64) -> SolverSpec {
    SolverSpec {
        n,
        length: 1.0,
        t_end,
        lambda: 0.1,
        mu: 0.0,
        cfl: crate::solver1d::DEFAULT_CFL,
        floor: crate::solver1d::DEFAULT_FLOOR,
        output_dt: Some(output_dt),
        delta: 0.0,
        big_gamma: 2.0,
    }
}

fn base(name: &str, checks: Vec<Check>, law: LawConfig, solver: SolverSpec, initial: InitialSpec, ensemble: EnsembleSpec) -> ExperimentSpec {
    ExperimentSpec {
        schema: SCHEMA_VERSION,
        name: name.to_string(),
        seed: 7,
        out: None,
        checks,
        law,
        solver,
        initial,
        ensemble,
        estimator: EstimatorSpec::default(),
        certify: CertifySpec {
            r_range: Some([0.5, 2.0]),
            grid_step: None,
        },
    }
}

fn single() -> EnsembleSpec {
    EnsembleSpec {
        members: 1,
        mode: PerturbationMode::None,
        epsilon: 0.0,
        noise_modes: 4,
        deltas: vec![],
    }
}

fn noisy(epsilon: f64) -> EnsembleSpec {
    EnsembleSpec {
        members: 4,
        mode: PerturbationMode::Noise,
        epsilon,
        noise_modes: 4,
        deltas: vec![],
    }
}

fn weak_strong_initial() -> InitialSpec {
    InitialSpec::Cosine {
        base: 1.2,
        amplitude: 0.3,
        mode: 1,
        velocity: 0.2,
    }
}

/// Built-in experiment by name.
pub fn preset(name: &str) -> Option<ExperimentSpec> {
    use Check::*;
    let power = LawConfig::power(1.0, 2.0);
    Some(match name {
        "constant-state" => base(
            name,
            Check::ALL.to_vec(),
            power,
            solver(64, 0.1, 0.01),
            InitialSpec::Constant { rho: 1.0, u: 0.0 },
            single(),
        ),
        "smooth-pulse" => base(
            name,
            vec![Energy, Continuity, Renorm, Momentum, Compatibility],
            power,
            solver(128, 0.2, 0.005),
            InitialSpec::Pulse {
                base: 1.0,
                amplitude: 0.3,
                center: 0.5,
                width: 0.1,
                velocity: 0.2,
            },
            single(),
        ),
        "weak-strong-monotone" => base(
            name,
            vec![Energy, Lemmas, RelativeEnergy, Gronwall, Korn],
            power,
            solver(128, 0.5, 0.01),
            weak_strong_initial(),
            noisy(1e-2),
        ),
        "weak-strong-bump" => base(
            name,
            vec![Energy, Lemmas, RelativeEnergy, Gronwall, Korn],
            power.with_bump(1.0, 2.0, 0.05),
            solver(128, 0.5, 0.01),
            weak_strong_initial(),
            noisy(1e-2),
        ),
        "delta-sequence" => base(
            name,
            vec![Energy, Continuity, Momentum, Compatibility],
            power,
            solver(128, 0.2, 0.005),
            InitialSpec::Pulse {
                base: 1.0,
                amplitude: 0.3,
                center: 0.5,
                width: 0.1,
                velocity: 0.2,
            },
            EnsembleSpec {
                members: 3,
                mode: PerturbationMode::Delta,
                epsilon: 0.0,
                noise_modes: 4,
                deltas: vec![1e-2, 1e-3, 1e-4],
            },
        ),
        _ => return None,
    })
}
