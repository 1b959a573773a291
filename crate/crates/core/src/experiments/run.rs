use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::checks::{csv_bytes, defect_rows, run_check, CheckOutcome};
use super::pipeline::Pipeline;
use super::spec::{Check, ExperimentSpec};
use super::ExperimentError;
use crate::solver1d::{write_series_csv, write_snapshot_csv};
use crate::young_measure::write_measure;

pub const MANIFEST_FILE: &str = "manifest.toml";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Relative to the output directory.
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub name: String,
    pub spec_hash: String,
    pub tool_version: String,
    pub seed: u64,
    pub all_pass: bool,
    pub checks: BTreeMap<String, CheckEntry>,
    pub files: Vec<FileEntry>,
}

impl RunManifest {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self, ExperimentError> {
        toml::from_str(text).map_err(|e| ExperimentError::Io(format!("manifest: {e}")))
    }

    /// SHA-256 of the serialized manifest.
    pub fn hash(&self) -> String {
        sha256_hex(self.to_toml().as_bytes())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Overrides applied on top of the spec file.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    /// Directory that relative paths in the spec resolve against.
    pub base_dir: Option<PathBuf>,
}

impl RunOptions {
    pub(crate) fn resolve(&self, spec: &mut ExperimentSpec) -> (PathBuf, PathBuf) {
        if let Some(seed) = self.seed {
            spec.seed = seed;
        }
        let out = self
            .out
            .clone()
            .or_else(|| spec.out.as_ref().map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("rdmv-out").join(&spec.name));
        (out, self.base_dir.clone().unwrap_or_else(|| PathBuf::from(".")))
    }

    /// Runs `f` on a pool with `jobs` threads, or the global pool.
    pub(crate) fn install<T: Send>(&self, f: impl FnOnce() -> T + Send) -> Result<T, ExperimentError> {
        match self.jobs {
            Some(j) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(j.max(1))
                    .build()
                    .map_err(|e| ExperimentError::InvalidSpec(format!("jobs: {e}")))?;
                Ok(pool.install(f))
            }
            None => Ok(f()),
        }
    }
}

/// Collects files and writes them, plus the manifest, from one place.
pub(crate) struct ManifestWriter {
    dir: PathBuf,
    files: Vec<FileEntry>,
}

impl ManifestWriter {
    pub(crate) fn new(dir: &Path) -> Result<Self, ExperimentError> {
        fs::create_dir_all(dir).map_err(|e| ExperimentError::Io(format!("{}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: vec![],
        })
    }

    pub(crate) fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), ExperimentError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| ExperimentError::Io(format!("{}: {e}", path.display())))?;
        self.files.push(FileEntry {
            path: name.to_string(),
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }

    pub(crate) fn finish(mut self, mut manifest: RunManifest) -> Result<RunManifest, ExperimentError> {
        manifest.files = std::mem::take(&mut self.files);
        self.write(MANIFEST_FILE, manifest.to_toml().as_bytes())?;
        Ok(manifest)
    }
}

pub(crate) fn spec_hash(spec: &ExperimentSpec) -> String {
    let mut canonical = spec.clone();
    canonical.out = None;
    sha256_hex(canonical.to_toml().as_bytes())
}

fn io_err(e: impl std::fmt::Display) -> ExperimentError {
    ExperimentError::Io(e.to_string())
}

/// Runs the ensemble, every requested check, and writes CSVs and the manifest.
pub fn cmd_run(spec: &ExperimentSpec, opts: &RunOptions) -> Result<RunManifest, ExperimentError> {
    let mut spec = spec.clone();
    let (out, base_dir) = opts.resolve(&mut spec);
    spec.validate()?;
    let (pipeline, outcomes) = opts.install(|| -> Result<_, ExperimentError> {
        let pipeline = Pipeline::build(&spec, spec.solver.n, &base_dir)?;
        let needs_report = spec.checks.iter().any(|c| matches!(c, Check::RelativeEnergy | Check::Gronwall));
        let report = if needs_report {
            pipeline.relative_energy(&spec)
        } else {
            Err("not requested".into())
        };
        let mut checks = spec.checks.clone();
        checks.sort();
        checks.dedup();
        let outcomes: Vec<CheckOutcome> = checks.par_iter().map(|&c| run_check(&spec, &pipeline, &report, c)).collect();
        Ok((pipeline, outcomes))
    })??;

    let mut writer = ManifestWriter::new(&out)?;
    writer.write("spec.toml", spec.to_toml().as_bytes())?;
    for (k, traj) in pipeline.members.iter().enumerate() {
        let mut series = Vec::new();
        write_series_csv(traj, &mut series).map_err(io_err)?;
        writer.write(&format!("member_{k:02}_series.csv"), &series)?;
        let mut snap = Vec::new();
        write_snapshot_csv(&traj.grid, traj.last(), pipeline.cfg.floor, &mut snap).map_err(io_err)?;
        writer.write(&format!("member_{k:02}_final.csv"), &snap)?;
    }
    let mut measure = Vec::new();
    write_measure(&pipeline.measure, &mut measure).map_err(io_err)?;
    writer.write("measure.txt", &measure)?;
    if pipeline.defect.is_some() {
        writer.write("defect.csv", &csv_bytes(&defect_rows(&pipeline)).map_err(io_err)?)?;
    }
    let mut checks = BTreeMap::new();
    for outcome in outcomes {
        for (name, bytes) in &outcome.files {
            writer.write(name, bytes)?;
        }
        checks.insert(
            outcome.check.name().to_string(),
            CheckEntry {
                pass: outcome.pass,
                detail: outcome.detail,
            },
        );
    }
    let manifest = RunManifest {
        name: spec.name.clone(),
        spec_hash: spec_hash(&spec),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: spec.seed,
        all_pass: checks.values().all(|c| c.pass),
        checks,
        files: vec![],
    };
    writer.finish(manifest)
}
