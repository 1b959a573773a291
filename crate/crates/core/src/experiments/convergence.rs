use std::io::Read;

use super::pipeline::Pipeline;
use super::run::{spec_hash, ManifestWriter, RunManifest, RunOptions};
use super::spec::ExperimentSpec;
use super::ExperimentError;
use crate::young_measure::{residual_suite, ResidualKind};

pub const COLUMNS: [&str; 7] = ["continuity", "renorm", "momentum", "compatibility", "zeta", "d_max", "e_mv"];
const KINDS: [ResidualKind; 4] = [
    ResidualKind::Continuity,
    ResidualKind::Renormalized,
    ResidualKind::Momentum,
    ResidualKind::Compatibility,
];
/// Values at or below this give no order.
const ORDER_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    /// Same order as [`COLUMNS`]; `None` when not computable.
    pub values: Vec<Option<f64>>,
    pub orders: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaRow {
    pub delta: f64,
    pub zeta: f64,
    pub order: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    pub delta_rows: Vec<DeltaRow>,
    pub manifest: RunManifest,
}

fn order(prev: Option<f64>, cur: Option<f64>, ratio: f64) -> Option<f64> {
    match (prev, cur) {
        (Some(a), Some(b)) if a > ORDER_FLOOR && b > ORDER_FLOOR => Some((a / b).ln() / ratio.ln()),
        _ => None,
    }
}

fn fmt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{x:e}"))
}

fn parse(s: &str) -> Result<Option<f64>, ExperimentError> {
    if s == "n/a" {
        return Ok(None);
    }
    s.parse().map(Some).map_err(|e| ExperimentError::Io(format!("bad value {s:?}: {e}")))
}

fn level_values(spec: &ExperimentSpec, p: &Pipeline) -> Result<Vec<Option<f64>>, ExperimentError> {
    let renorm = p.renorm(spec).map_err(ExperimentError::InvalidSpec)?;
    let rows = residual_suite(&p.measure, &p.physics, &renorm, p.defect.as_ref(), Pipeline::residual_tolerance(spec), &KINDS)
        .map_err(|e| ExperimentError::CheckFailed(e.to_string()))?;
    let mut values: Vec<Option<f64>> = KINDS
        .iter()
        .map(|k| {
            Some(
                rows.iter()
                    .filter(|r| r.test_fn_id.starts_with(k.label()))
                    .map(|r| r.residual.abs())
                    .fold(0.0, f64::max),
            )
        })
        .collect();
    let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    values.push(p.defect.as_ref().map(|d| max(&d.zeta)));
    values.push(p.defect.as_ref().map(|d| max(&d.d_total)));
    values.push(p.relative_energy(spec).ok().map(|r| r.rows.iter().map(|row| row.e_mv).fold(0.0, f64::max)));
    Ok(values)
}

/// Per-level residual, defect and relative-energy maxima with observed
/// orders `log(prev/cur) / log(n_cur/n_prev)`.
pub fn cmd_convergence(spec: &ExperimentSpec, levels: &[usize], opts: &RunOptions) -> Result<ConvergenceReport, ExperimentError> {
    if levels.len() < 3 {
        return Err(ExperimentError::InvalidSpec(format!("convergence needs at least 3 levels, got {}", levels.len())));
    }
    if levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ExperimentError::InvalidSpec("levels must be strictly increasing".into()));
    }
    let mut spec = spec.clone();
    let (out, base_dir) = opts.resolve(&mut spec);
    spec.validate()?;
    let (rows, last) = opts.install(|| -> Result<_, ExperimentError> {
        let mut rows: Vec<ConvergenceRow> = Vec::new();
        let mut last = None;
        for &n in levels {
            let pipeline = Pipeline::build(&spec, n, &base_dir)?;
            let values = level_values(&spec, &pipeline)?;
            let orders = match rows.last() {
                Some(prev) => {
                    let ratio = n as f64 / prev.n as f64;
                    prev.values.iter().zip(&values).map(|(a, b)| order(*a, *b, ratio)).collect()
                }
                None => vec![None; values.len()],
            };
            rows.push(ConvergenceRow { n, values, orders });
            last = Some(pipeline);
        }
        Ok((rows, last.expect("at least one level")))
    })??;

    let mut delta_rows: Vec<DeltaRow> = Vec::new();
    if let Some(defect) = &last.defect {
        for (k, series) in defect.zeta_levels.iter().enumerate() {
            let zeta = series.iter().copied().fold(0.0, f64::max);
            let delta = last.member_deltas[k];
            let order = delta_rows.last().and_then(|p| order(Some(p.zeta), Some(zeta), p.delta / delta));
            delta_rows.push(DeltaRow { delta, zeta, order });
        }
    }

    let mut writer = ManifestWriter::new(&out)?;
    writer.write("convergence.csv", convergence_csv(&rows).as_bytes())?;
    if !delta_rows.is_empty() {
        let mut text = String::from("delta,zeta,order\n");
        for r in &delta_rows {
            text += &format!("{:e},{:e},{}\n", r.delta, r.zeta, fmt(r.order));
        }
        writer.write("convergence_delta.csv", text.as_bytes())?;
    }
    let manifest = writer.finish(RunManifest {
        name: format!("{}-convergence", spec.name),
        spec_hash: spec_hash(&spec),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: spec.seed,
        all_pass: true,
        checks: Default::default(),
        files: vec![],
    })?;
    Ok(ConvergenceReport {
        rows,
        delta_rows,
        manifest,
    })
}

pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut header = vec!["n".to_string()];
    header.extend(COLUMNS.iter().map(|c| c.to_string()));
    header.extend(COLUMNS.iter().map(|c| format!("order_{c}")));
    let mut text = header.join(",") + "\n";
    for r in rows {
        let mut fields = vec![r.n.to_string()];
        fields.extend(r.values.iter().map(|v| fmt(*v)));
        fields.extend(r.orders.iter().map(|v| fmt(*v)));
        text += &(fields.join(",") + "\n");
    }
    text
}

pub fn read_convergence_csv<R: Read>(input: R) -> Result<Vec<ConvergenceRow>, ExperimentError> {
    let mut reader = csv::Reader::from_reader(input);
    let width = COLUMNS.len();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| ExperimentError::Io(e.to_string()))?;
        if record.len() != 1 + 2 * width {
            return Err(ExperimentError::Io(format!("expected {} fields, got {}", 1 + 2 * width, record.len())));
        }
        let n = record[0].parse().map_err(|e| ExperimentError::Io(format!("bad level: {e}")))?;
        let cells: Vec<Option<f64>> = record.iter().skip(1).map(parse).collect::<Result<_, _>>()?;
        rows.push(ConvergenceRow {
            n,
            values: cells[..width].to_vec(),
            orders: cells[width..].to_vec(),
        });
    }
    Ok(rows)
}
