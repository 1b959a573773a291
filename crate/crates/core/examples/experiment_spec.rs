//! Drive a full experiment from a spec: edit a preset, run it, and read
//! back the manifest.

use rdmv::experiments::{cmd_run, preset, Check, RunOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut spec = preset("weak-strong-bump").ok_or("missing preset")?;
    spec.ensemble.epsilon = 5e-2;
    spec.checks.push(Check::Continuity);
    println!("{}", spec.to_toml());

    let out = std::env::temp_dir().join("rdmv-example-spec");
    let manifest = cmd_run(
        &spec,
        &RunOptions {
            out: Some(out.clone()),
            jobs: Some(2),
            ..RunOptions::default()
        },
    )?;
    for (name, entry) in &manifest.checks {
        println!("{name:<16} {} {}", if entry.pass { "PASS" } else { "FAIL" }, entry.detail);
    }
    println!("{} files in {}, manifest {}", manifest.files.len(), out.display(), manifest.hash());
    Ok(())
}
