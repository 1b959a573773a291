use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{FluidState, Grid1D, Trajectory};

/// Row of a snapshot or initial-data CSV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnapshotRow {
    pub x: f64,
    pub rho: f64,
    pub u: f64,
}

/// Row of a trajectory series CSV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub t: f64,
    pub energy: f64,
    pub cum_dissipation: f64,
}

fn write_rows<W: Write, T: Serialize>(rows: impl IntoIterator<Item = T>, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_snapshot_csv<W: Write>(grid: &Grid1D, state: &FluidState, floor: f64, out: W) -> csv::Result<()> {
    let u = state.velocity(floor);
    write_rows(
        (0..grid.n).map(|i| SnapshotRow {
            x: grid.x(i),
            rho: state.rho[i],
            u: u[i],
        }),
        out,
    )
}

pub fn read_snapshot_csv<R: Read>(input: R) -> csv::Result<Vec<SnapshotRow>> {
    csv::Reader::from_reader(input).deserialize().collect()
}

pub fn write_initial_csv<W: Write>(grid: &Grid1D, state: &FluidState, floor: f64, out: W) -> csv::Result<()> {
    write_snapshot_csv(grid, state, floor, out)
}

/// Reads `(x, rho, u)` samples and returns a piecewise-linear profile,
/// constant beyond the first and last sample.
pub fn read_initial_csv<R: Read>(input: R) -> csv::Result<impl Fn(f64) -> (f64, f64) + Clone + Send + Sync> {
    let mut rows = read_snapshot_csv(input)?;
    rows.sort_by(|a, b| a.x.total_cmp(&b.x));
    Ok(move |x: f64| {
        if rows.is_empty() {
            return (0.0, 0.0);
        }
        let k = rows.partition_point(|r| r.x < x);
        if k == 0 {
            return (rows[0].rho, rows[0].u);
        }
        if k == rows.len() {
            let r = rows[k - 1];
            return (r.rho, r.u);
        }
        let (a, b) = (rows[k - 1], rows[k]);
        let w = (x - a.x) / (b.x - a.x);
        (a.rho + w * (b.rho - a.rho), a.u + w * (b.u - a.u))
    })
}

pub fn write_series_csv<W: Write>(traj: &Trajectory, out: W) -> csv::Result<()> {
    write_rows(
        traj.snapshots.iter().enumerate().map(|(k, s)| SeriesRow {
            t: s.t,
            energy: traj.energy[k],
            cum_dissipation: traj.cum_dissipation[k],
        }),
        out,
    )
}

pub fn read_series_csv<R: Read>(input: R) -> csv::Result<Vec<SeriesRow>> {
    csv::Reader::from_reader(input).deserialize().collect()
}

/// Writes `{prefix}_snap_{k:04}.csv` per snapshot and `{prefix}_series.csv`.
pub fn write_trajectory(traj: &Trajectory, dir: &Path, prefix: &str, floor: f64) -> csv::Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for (k, s) in traj.snapshots.iter().enumerate() {
        let path = dir.join(format!("{prefix}_snap_{k:04}.csv"));
        write_snapshot_csv(&traj.grid, s, floor, File::create(&path)?)?;
        paths.push(path);
    }
    let path = dir.join(format!("{prefix}_series.csv"));
    write_series_csv(traj, File::create(&path)?)?;
    paths.push(path);
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_csv_round_trip() {
        let grid = Grid1D::new(8, 2.0).unwrap();
        let s = FluidState::from_profile(&grid, |x| (1.0 + x, 0.5 * x));
        let mut buf = Vec::new();
        write_initial_csv(&grid, &s, 1e-10, &mut buf).unwrap();
        let profile = read_initial_csv(&buf[..]).unwrap();
        let back = FluidState::from_profile(&grid, profile);
        for i in 0..grid.n {
            assert!((back.rho[i] - s.rho[i]).abs() < 1e-14);
            assert!((back.m[i] - s.m[i]).abs() < 1e-14);
        }
    }
}
