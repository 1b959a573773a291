use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rdmv::experiments::{
    cmd_certify, cmd_convergence, cmd_run, preset, ExperimentError, ExperimentSpec, RunManifest, RunOptions,
    EXIT_CHECK_FAILED, OUT_ENV, PRESETS,
};

#[derive(Parser)]
#[command(name = "rdmv", version, about = "Measure-valued solution experiments for viscous compressible flow")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment spec (TOML).
    #[arg(long, conflicts_with = "preset")]
    spec: Option<PathBuf>,
    /// Built-in spec instead of a file.
    #[arg(long)]
    preset: Option<String>,
    /// Output directory.
    #[arg(long, env = OUT_ENV)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and all of its checks.
    Run(Common),
    /// Refinement study over grid levels.
    Convergence {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_values_t = [64usize, 128, 256])]
        levels: Vec<usize>,
    },
    /// Lemma certificates for the spec's pressure law.
    Certify {
        #[command(flatten)]
        common: Common,
        #[arg(long, requires = "r_max")]
        r_min: Option<f64>,
        #[arg(long, requires = "r_min")]
        r_max: Option<f64>,
    },
    /// List presets, print one, or write all to `--out`.
    Presets {
        name: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

impl Common {
    fn load(&self) -> Result<(ExperimentSpec, RunOptions), ExperimentError> {
        let (spec, base_dir) = match (&self.spec, &self.preset) {
            (Some(path), _) => (
                ExperimentSpec::from_file(path)?,
                path.parent().map(Path::to_path_buf).filter(|p| !p.as_os_str().is_empty()),
            ),
            (None, Some(name)) => (
                preset(name).ok_or_else(|| ExperimentError::InvalidSpec(format!("unknown preset {name:?}")))?,
                None,
            ),
            (None, None) => return Err(ExperimentError::InvalidSpec("one of --spec or --preset is required".into())),
        };
        let opts = RunOptions {
            out: self.out.clone(),
            seed: self.seed,
            jobs: self.jobs,
            base_dir,
        };
        Ok((spec, opts))
    }
}

fn report(manifest: &RunManifest) -> ExitCode {
    for (name, entry) in &manifest.checks {
        println!("{:<16} {}  {}", name, if entry.pass { "PASS" } else { "FAIL" }, entry.detail);
    }
    println!("manifest {}", manifest.hash());
    if manifest.all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_CHECK_FAILED as u8)
    }
}

fn execute(command: Command) -> Result<ExitCode, ExperimentError> {
    match command {
        Command::Run(common) => {
            let (spec, opts) = common.load()?;
            Ok(report(&cmd_run(&spec, &opts)?))
        }
        Command::Convergence { common, levels } => {
            let (spec, opts) = common.load()?;
            let rep = cmd_convergence(&spec, &levels, &opts)?;
            print!("{}", rdmv::experiments::convergence_csv(&rep.rows));
            for row in &rep.delta_rows {
                println!("delta {:e} zeta {:e}", row.delta, row.zeta);
            }
            Ok(report(&rep.manifest))
        }
        Command::Certify { common, r_min, r_max } => {
            let (spec, opts) = common.load()?;
            let range = r_min.zip(r_max);
            Ok(report(&cmd_certify(&spec, range, &opts)?.manifest))
        }
        Command::Presets { name: Some(name), .. } => {
            let spec = preset(&name).ok_or_else(|| ExperimentError::InvalidSpec(format!("unknown preset {name:?}")))?;
            print!("{}", spec.to_toml());
            Ok(ExitCode::SUCCESS)
        }
        Command::Presets { name: None, out } => {
            for name in PRESETS {
                println!("{name}");
                if let Some(dir) = &out {
                    std::fs::create_dir_all(dir).map_err(|e| ExperimentError::Io(e.to_string()))?;
                    let path = dir.join(format!("{name}.toml"));
                    std::fs::write(&path, preset(name).expect("listed preset").to_toml())
                        .map_err(|e| ExperimentError::Io(format!("{}: {e}", path.display())))?;
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse().command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
