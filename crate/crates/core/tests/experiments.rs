use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::Command;

use rdmv::experiments::{
    cmd_certify, cmd_convergence, cmd_run, preset, read_convergence_csv, read_rows, sha256_hex, Check, DefectRow,
    EnergyRow, ExperimentError, ExperimentSpec, KornRow, RunManifest, RunOptions, COLUMNS, MANIFEST_FILE, PRESETS,
};
use rdmv::pressure_law::read_certificate_csv;
use rdmv::solver1d::{read_series_csv, read_snapshot_csv};
use rdmv::weak_strong::read_relative_energy_csv;
use rdmv::young_measure::{read_measure, read_residual_csv};

fn opts(dir: &Path) -> RunOptions {
    RunOptions {
        out: Some(dir.to_path_buf()),
        ..RunOptions::default()
    }
}

fn reparse(dir: &Path, name: &str) {
    let path = dir.join(name);
    let file = || fs::File::open(&path).unwrap();
    let ok = match name {
        n if n.starts_with("residuals_") => !read_residual_csv(file()).unwrap().is_empty(),
        n if n.ends_with("_series.csv") => !read_series_csv(file()).unwrap().is_empty(),
        n if n.ends_with("_final.csv") => !read_snapshot_csv(file()).unwrap().is_empty(),
        "measure.txt" => read_measure(file()).is_ok(),
        "energy.csv" => !read_rows::<EnergyRow, _>(file()).unwrap().is_empty(),
        "korn.csv" => read_rows::<KornRow, _>(file()).unwrap().len() == 1,
        "defect.csv" => !read_rows::<DefectRow, _>(file()).unwrap().is_empty(),
        "certificates.csv" => !read_certificate_csv(file()).unwrap().is_empty(),
        "relative_energy.csv" => !read_relative_energy_csv(file()).unwrap().is_empty(),
        "convergence.csv" => read_convergence_csv(file()).unwrap().len() >= 3,
        "spec.toml" => ExperimentSpec::from_toml(&fs::read_to_string(&path).unwrap()).is_ok(),
        "verdict.txt" | "convergence_delta.csv" => !fs::read_to_string(&path).unwrap().is_empty(),
        other => panic!("unexpected file {other}"),
    };
    assert!(ok, "{name} did not re-parse");
}

/// Every file in `dir` is listed with its hash, and every CSV re-parses.
fn check_manifest(dir: &Path, manifest: &RunManifest) {
    let on_disk: BTreeSet<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n != MANIFEST_FILE)
        .collect();
    let listed: BTreeSet<String> = manifest.files.iter().map(|f| f.path.clone()).collect();
    assert_eq!(on_disk, listed);
    for f in &manifest.files {
        assert_eq!(sha256_hex(&fs::read(dir.join(&f.path)).unwrap()), f.sha256, "{}", f.path);
        reparse(dir, &f.path);
    }
    let stored = RunManifest::from_toml(&fs::read_to_string(dir.join(MANIFEST_FILE)).unwrap()).unwrap();
    assert_eq!(&stored, manifest);
}

#[test]
fn constant_state_passes_every_check_with_tiny_residuals() {
    let dir = tempfile::tempdir().unwrap();
    let spec = preset("constant-state").unwrap();
    let manifest = cmd_run(&spec, &opts(dir.path())).unwrap();
    assert!(manifest.all_pass, "{manifest:#?}");
    assert_eq!(manifest.checks.len(), Check::ALL.len());
    for kind in ["continuity", "renorm", "momentum", "compatibility"] {
        let rows = read_residual_csv(fs::File::open(dir.path().join(format!("residuals_{kind}.csv"))).unwrap()).unwrap();
        assert!(rows.iter().all(|r| r.residual.abs() < 1e-10), "{kind}");
    }
    check_manifest(dir.path(), &manifest);
}

#[test]
fn weak_strong_monotone_gronwall_passes() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = cmd_run(&preset("weak-strong-monotone").unwrap(), &opts(dir.path())).unwrap();
    assert!(manifest.checks["gronwall"].pass);
    assert!(manifest.all_pass);
    check_manifest(dir.path(), &manifest);
}

#[test]
fn delta_sequence_run_emits_defect_table() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = cmd_run(&preset("delta-sequence").unwrap(), &opts(dir.path())).unwrap();
    assert!(manifest.all_pass, "{manifest:#?}");
    assert!(manifest.files.iter().any(|f| f.path == "defect.csv"));
    check_manifest(dir.path(), &manifest);
}

#[test]
fn presets_round_trip_through_toml() {
    for name in PRESETS {
        let spec = preset(name).unwrap();
        assert_eq!(ExperimentSpec::from_toml(&spec.to_toml()).unwrap(), spec);
    }
    assert!(preset("nope").is_none());
}

#[test]
fn invalid_specs_are_rejected() {
    let good = preset("smooth-pulse").unwrap().to_toml();
    let unknown = good.replace("\"energy\"", "\"entropy\"");
    let err = ExperimentSpec::from_toml(&unknown).unwrap_err();
    assert!(matches!(err, ExperimentError::InvalidSpec(_)));
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("entropy"));

    let mut spec = preset("smooth-pulse").unwrap();
    spec.ensemble.members = 0;
    assert!(matches!(ExperimentSpec::from_toml(&spec.to_toml()), Err(ExperimentError::InvalidSpec(_))));

    let extra = format!("{good}\n[bogus]\nx = 1\n");
    assert!(ExperimentSpec::from_toml(&extra).is_err());
}

#[test]
fn convergence_of_smooth_pulse_is_first_order() {
    let dir = tempfile::tempdir().unwrap();
    let report = cmd_convergence(&preset("smooth-pulse").unwrap(), &[64, 128, 256], &opts(dir.path())).unwrap();
    let col = COLUMNS.iter().position(|c| *c == "continuity").unwrap();
    for row in &report.rows[1..] {
        let order = row.orders[col].unwrap();
        assert!((0.7..=1.3).contains(&order), "order {order}");
    }
    assert_eq!(read_convergence_csv(fs::File::open(dir.path().join("convergence.csv")).unwrap()).unwrap().len(), 3);
    check_manifest(dir.path(), &report.manifest);
}

#[test]
fn convergence_of_constant_state_has_no_orders() {
    let dir = tempfile::tempdir().unwrap();
    let report = cmd_convergence(&preset("constant-state").unwrap(), &[16, 32, 64], &opts(dir.path())).unwrap();
    for row in &report.rows {
        for v in row.values[..4].iter() {
            assert!(v.unwrap() < 1e-12);
        }
        assert!(row.orders.iter().all(Option::is_none));
    }
    let text = fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    assert!(text.contains("n/a"));
}

#[test]
fn convergence_of_delta_sequence_has_decreasing_zeta() {
    let dir = tempfile::tempdir().unwrap();
    let report = cmd_convergence(&preset("delta-sequence").unwrap(), &[32, 64, 128], &opts(dir.path())).unwrap();
    let zetas: Vec<f64> = report.delta_rows.iter().map(|r| r.zeta).collect();
    assert_eq!(zetas.len(), 3);
    assert!(zetas.windows(2).all(|w| w[1] < w[0]), "{zetas:?}");
}

#[test]
fn convergence_needs_three_levels() {
    let dir = tempfile::tempdir().unwrap();
    let err = cmd_convergence(&preset("smooth-pulse").unwrap(), &[64, 128], &opts(dir.path())).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn certify_examples() {
    let dir = tempfile::tempdir().unwrap();
    let spec = preset("smooth-pulse").unwrap();
    let report = cmd_certify(&spec, Some((0.5, 2.0)), &opts(dir.path())).unwrap();
    assert!(report.manifest.all_pass);
    assert!(report.rows.iter().all(|r| r.valid && r.c_middle >= 0.9));

    // a bump steep enough to make p decreasing somewhere still certifies
    let mut steep = spec.clone();
    steep.law = steep.law.with_bump(1.0, 1.2, 0.5);
    let law = steep.law.build().unwrap();
    assert!((0..200).any(|i| law.dpressure(1.0 + 0.001 * i as f64) < 0.0));
    assert!(cmd_certify(&steep, Some((0.5, 2.0)), &opts(dir.path())).unwrap().manifest.all_pass);

    let err = cmd_certify(&spec, Some((0.0, 2.0)), &opts(dir.path())).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn fixed_seed_gives_identical_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let spec = preset("weak-strong-bump").unwrap();
    let run = |sub: &str, jobs| {
        let o = RunOptions {
            out: Some(dir.path().join(sub)),
            seed: Some(3),
            jobs: Some(jobs),
            base_dir: None,
        };
        cmd_run(&spec, &o).unwrap()
    };
    let a = run("a", 1);
    let b = run("b", 3);
    assert_eq!(a.hash(), b.hash());
    let c = cmd_run(
        &spec,
        &RunOptions {
            out: Some(dir.path().join("c")),
            seed: Some(4),
            ..RunOptions::default()
        },
    )
    .unwrap();
    assert_ne!(a.hash(), c.hash());
}

#[test]
fn csv_initial_profile_resolves_relative_to_spec() {
    let dir = tempfile::tempdir().unwrap();
    let mut csv = String::from("x,rho,u\n");
    for i in 0..=20 {
        let x = i as f64 / 20.0;
        csv += &format!("{x},{},{}\n", 1.0 + 0.1 * x, 0.0);
    }
    fs::write(dir.path().join("init.csv"), csv).unwrap();
    let mut spec = preset("smooth-pulse").unwrap();
    spec.initial = rdmv::experiments::InitialSpec::Csv { path: "init.csv".into() };
    spec.checks = vec![Check::Energy, Check::Continuity];
    let o = RunOptions {
        out: Some(dir.path().join("out")),
        base_dir: Some(dir.path().to_path_buf()),
        ..RunOptions::default()
    };
    assert!(cmd_run(&spec, &o).unwrap().all_pass);
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rdmv"))
}

#[test]
fn binary_exit_codes_and_output_env() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, preset("smooth-pulse").unwrap().to_toml().replace("\"energy\"", "\"entropy\"")).unwrap();
    let status = bin().args(["run", "--spec"]).arg(&bad).status().unwrap();
    assert_eq!(status.code(), Some(2));

    let out = dir.path().join("from-env");
    let status = bin()
        .args(["run", "--preset", "constant-state"])
        .env("RDMV_OUT", &out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(out.join(MANIFEST_FILE).exists());

    // a check that cannot pass: Korn with a Poincaré constant of zero
    let mut spec = preset("weak-strong-monotone").unwrap();
    spec.estimator.c_p = Some(1e-12);
    spec.checks = vec![Check::Korn];
    let failing = dir.path().join("failing.toml");
    fs::write(&failing, spec.to_toml()).unwrap();
    let status = bin()
        .args(["run", "--spec"])
        .arg(&failing)
        .arg("--out")
        .arg(dir.path().join("fail-out"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(4));

    let listing = bin().arg("presets").output().unwrap();
    let text = String::from_utf8(listing.stdout).unwrap();
    for name in PRESETS {
        assert!(text.contains(name));
    }
}
