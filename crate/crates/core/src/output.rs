//! CSV writers for trajectories and diagnostics, plus a run manifest.
//!
//! Floats are written in Rust's shortest round-trip form, so identical runs
//! produce byte-identical files.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::lab::{ReportError, TOOL_VERSION};
use crate::limit::{interface_positions, LimitDiagnostics, LimitTrajectory};
use crate::rd::RdDiagnostics;
use crate::trajectory::Trajectory;

fn fail(path: &Path, e: impl std::fmt::Display) -> ReportError {
    ReportError::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

fn write_table<const N: usize>(
    path: &Path,
    header: [&str; N],
    rows: impl Iterator<Item = [f64; N]>,
) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| fail(path, e))?;
    w.write_record(header).map_err(|e| fail(path, e))?;
    for row in rows {
        w.write_record(row.iter().map(|x| x.to_string())).map_err(|e| fail(path, e))?;
    }
    w.flush().map_err(|source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Long format: one line per stored time and cell.
pub fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> Result<(), ReportError> {
    let xs: Vec<f64> = traj.grid.centers().collect();
    let rows = traj.times.iter().enumerate().flat_map(|(j, &t)| {
        let xs = &xs;
        (0..xs.len()).map(move |i| [t, xs[i], traj.u[j][i], traj.v[j][i]])
    });
    write_table(path, ["t", "x", "u", "v"], rows)
}

pub fn write_rd_diagnostics_csv(path: &Path, rows: &[RdDiagnostics]) -> Result<(), ReportError> {
    write_table(
        path,
        ["t", "mass_u", "mass_v", "mass_sum", "l2_u", "l2_v", "linf_u", "linf_v", "D_alpha", "D_gamma"],
        rows.iter().map(|d| {
            [d.t, d.mass_u, d.mass_v, d.mass_sum, d.l2_u, d.l2_v, d.linf_u, d.linf_v, d.d_alpha, d.d_gamma]
        }),
    )
}

pub fn write_limit_csv(path: &Path, traj: &LimitTrajectory) -> Result<(), ReportError> {
    let xs: Vec<f64> = traj.grid.centers().collect();
    let rows = traj.times.iter().enumerate().flat_map(|(j, &t)| {
        let xs = &xs;
        (0..xs.len()).map(move |i| [t, xs[i], traj.z[j][i], traj.u_star[j][i], traj.v_star[j][i]])
    });
    write_table(path, ["t", "x", "z", "u_star", "v_star"], rows)
}

pub fn write_limit_diagnostics_csv(path: &Path, rows: &[LimitDiagnostics]) -> Result<(), ReportError> {
    write_table(
        path,
        ["t", "mass_z", "mass_u", "mass_v", "l2_z", "linf_z", "newton_iters", "gs_sweeps", "residual"],
        rows.iter().map(|d| {
            [
                d.t,
                d.mass_z,
                d.mass_u,
                d.mass_v,
                d.l2_z,
                d.linf_z,
                d.newton_iters as f64,
                d.gs_sweeps as f64,
                d.residual,
            ]
        }),
    )
}

/// Snapshots with a sign change of `z` only.
pub fn write_interface_csv(path: &Path, traj: &LimitTrajectory) -> Result<usize, ReportError> {
    let points: Vec<[f64; 2]> = interface_positions(traj)
        .into_iter()
        .filter_map(|(t, x)| x.map(|x| [t, x]))
        .collect();
    let n = points.len();
    write_table(path, ["t", "x_interface"], points.into_iter())?;
    Ok(n)
}

/// Provenance of one CLI invocation.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub command: String,
    pub config_hash: String,
    pub tool_version: String,
    pub files: Vec<String>,
}

impl Manifest {
    pub fn new(command: &str, config_hash: &str) -> Self {
        Manifest {
            command: command.to_string(),
            config_hash: config_hash.to_string(),
            tool_version: TOOL_VERSION.to_string(),
            files: Vec::new(),
        }
    }

    pub fn record(&mut self, path: &Path) {
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned());
        self.files.push(name.unwrap_or_else(|| path.display().to_string()));
    }

    /// Writes `<command>.manifest.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<PathBuf, ReportError> {
        let path = dir.join(format!("{}.manifest.json", self.command));
        let text = serde_json::to_string_pretty(self).map_err(|e| fail(&path, e))?;
        std::fs::write(&path, text + "\n").map_err(|source| ReportError::Io {
            path: path.clone(),
            source,
        })?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Field, Grid1D};

    #[test]
    fn trajectory_csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let grid = Grid1D::unit(2).unwrap();
        let traj = Trajectory {
            grid,
            times: vec![0.0, 0.5],
            u: vec![Field(vec![1.0, 2.0]), Field(vec![3.0, 4.0])],
            v: vec![Field(vec![-1.0, 0.1]), Field(vec![0.0, 0.0])],
            stride: 1,
        };
        let path = dir.path().join("t.csv");
        write_trajectory_csv(&path, &traj).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "t,x,u,v\n0,0.25,1,-1\n0,0.75,2,0.1\n0.5,0.25,3,0\n0.5,0.75,4,0\n");
    }

    #[test]
    fn interface_csv_skips_snapshots_without_crossing() {
        let dir = tempfile::tempdir().unwrap();
        let grid = Grid1D::unit(4).unwrap();
        let z = vec![Field(vec![1.0, 1.0, -1.0, -1.0]), Field(vec![1.0; 4])];
        let traj = LimitTrajectory {
            grid,
            times: vec![0.0, 1.0],
            u_star: z.clone(),
            v_star: z.clone(),
            z,
            stride: 1,
        };
        let path = dir.path().join("i.csv");
        assert_eq!(write_interface_csv(&path, &traj).unwrap(), 1);
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "t,x_interface\n0,0.5\n");
    }

    #[test]
    fn manifest_lists_files() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = Manifest::new("run-rd", "abc");
        m.record(&dir.path().join("rd_trajectory.csv"));
        let path = m.write(dir.path()).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        assert!(text.contains("\"rd_trajectory.csv\"") && text.contains("\"abc\""));
    }
}
