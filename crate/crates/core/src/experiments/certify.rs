use super::checks::{certificate_bytes, certificates};
use super::run::{spec_hash, CheckEntry, ManifestWriter, RunManifest, RunOptions};
use super::spec::ExperimentSpec;
use super::ExperimentError;
use crate::pressure_law::CertificateRow;

#[derive(Debug, Clone, PartialEq)]
pub struct CertifyReport {
    pub rows: Vec<CertificateRow>,
    pub manifest: RunManifest,
}

/// Lemma certificates for the spec's law on `r_range` (falls back to the
/// spec's `certify.r_range`).
pub fn cmd_certify(spec: &ExperimentSpec, r_range: Option<(f64, f64)>, opts: &RunOptions) -> Result<CertifyReport, ExperimentError> {
    let mut spec = spec.clone();
    let (out, _) = opts.resolve(&mut spec);
    let range = r_range
        .or(spec.certify.r_range.map(|[a, b]| (a, b)))
        .ok_or_else(|| ExperimentError::InvalidSpec("no r range given".into()))?;
    if !(range.0 > 0.0 && range.1 >= range.0 && range.1.is_finite()) {
        return Err(ExperimentError::InvalidSpec(format!(
            "r range [{}, {}] must be a compact subset of (0, inf)",
            range.0, range.1
        )));
    }
    let law = spec.law.build().map_err(|e| ExperimentError::InvalidSpec(format!("law: {e}")))?;
    let step = spec.certify.grid_step.unwrap_or(1e-3);
    let (rows, entry) = match certificates(&law, range, step) {
        Ok(rows) => {
            let pass = rows.iter().all(|r| r.valid);
            let c = rows.iter().map(|r| r.c_middle.min(r.c_outer)).fold(f64::INFINITY, f64::min);
            (rows, CheckEntry { pass, detail: format!("min c {c:.3e}") })
        }
        Err(e) => (vec![], CheckEntry { pass: false, detail: e }),
    };
    let mut writer = ManifestWriter::new(&out)?;
    if !rows.is_empty() {
        writer.write("certificates.csv", &certificate_bytes(&rows).map_err(ExperimentError::Io)?)?;
    }
    let all_pass = entry.pass;
    let manifest = writer.finish(RunManifest {
        name: format!("{}-certify", spec.name),
        spec_hash: spec_hash(&spec),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: spec.seed,
        all_pass,
        checks: [("lemmas".to_string(), entry)].into_iter().collect(),
        files: vec![],
    })?;
    Ok(CertifyReport { rows, manifest })
}
